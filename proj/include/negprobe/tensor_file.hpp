#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace negprobe {

// Dense row-major f32 tensor as stored in a tensor container.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::int64_t element_count() const;
};

// Contents of a tensor container: named tensors plus string metadata.
//
// On disk: u64 little-endian header length N, N bytes of JSON mapping
// name -> {"dtype": "f32", "shape": [...], "data_offsets": [begin, end]}
// with an optional "__metadata__" object of strings, then the raw tensor bytes.
// Offsets are relative to the end of the header.
struct TensorFile {
  std::map<std::string, Tensor> tensors;
  std::map<std::string, std::string> metadata;
};

// Throws Error on I/O failure, malformed header, unsupported dtype, or
// offsets that disagree with the declared shape.
TensorFile read_tensor_file(const std::filesystem::path& path);

// Tensors are laid out in name order; output is byte-deterministic.
void write_tensor_file(const std::filesystem::path& path, const TensorFile& file);

}  // namespace negprobe
