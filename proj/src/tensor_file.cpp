#include "negprobe/tensor_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "negprobe/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor containers are read by direct little-endian copies");

namespace negprobe {

using nlohmann::json;

std::int64_t Tensor::element_count() const {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open tensor file: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 8) throw Error("tensor file too short: " + path.string());
  std::uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data(), 8);
  if (header_len > bytes.size() - 8) throw Error("tensor header length exceeds file size");

  json header;
  try {
    header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const json::exception& e) {
    throw Error(std::string("malformed tensor header: ") + e.what());
  }
  if (!header.is_object()) throw Error("tensor header is not a JSON object");

  const std::size_t data_begin = 8 + header_len;
  const std::size_t data_size = bytes.size() - data_begin;

  TensorFile file;
  for (const auto& [name, entry] : header.items()) {
    if (name == "__metadata__") {
      if (!entry.is_object()) throw Error("__metadata__ must be an object");
      for (const auto& [key, value] : entry.items()) {
        if (!value.is_string()) throw Error("metadata value for '" + key + "' must be a string");
        file.metadata[key] = value.get<std::string>();
      }
      continue;
    }
    try {
      const auto dtype = entry.at("dtype").get<std::string>();
      if (dtype != "f32" && dtype != "F32") {
        throw Error("unsupported dtype '" + dtype + "' for tensor " + name);
      }
      Tensor t;
      t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
      const auto offsets = entry.at("data_offsets").get<std::vector<std::uint64_t>>();
      if (offsets.size() != 2 || offsets[0] > offsets[1] || offsets[1] > data_size) {
        throw Error("data_offsets out of range for tensor " + name);
      }
      for (auto d : t.shape) {
        if (d < 0) throw Error("negative dimension in tensor " + name);
      }
      const auto count = static_cast<std::uint64_t>(t.element_count());
      if (offsets[1] - offsets[0] != count * sizeof(float)) {
        throw Error("byte size does not match shape for tensor " + name);
      }
      t.data.resize(count);
      std::memcpy(t.data.data(), bytes.data() + data_begin + offsets[0], count * sizeof(float));
      file.tensors.emplace(name, std::move(t));
    } catch (const json::exception& e) {
      throw Error("malformed header entry for tensor " + name + ": " + e.what());
    }
  }
  return file;
}

void write_tensor_file(const std::filesystem::path& path, const TensorFile& file) {
  json header = json::object();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : file.tensors) {
    if (static_cast<std::int64_t>(t.data.size()) != t.element_count()) {
      throw Error("tensor " + name + " data does not match its shape");
    }
    const std::uint64_t size = t.data.size() * sizeof(float);
    header[name] = {{"dtype", "f32"}, {"shape", t.shape}, {"data_offsets", {offset, offset + size}}};
    offset += size;
  }
  if (!file.metadata.empty()) header["__metadata__"] = file.metadata;

  std::string text = header.dump();
  // Pad so tensor data starts 8-byte aligned.
  while ((8 + text.size()) % 8 != 0) text.push_back(' ');
  const std::uint64_t header_len = text.size();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write tensor file: " + path.string());
  out.write(reinterpret_cast<const char*>(&header_len), 8);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, t] : file.tensors) {
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace negprobe
