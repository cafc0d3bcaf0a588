#include "negprobe/text_encoder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>

#include "negprobe/error.hpp"

namespace negprobe {
namespace {

std::string shape_string(const std::vector<std::int64_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t metadata_size(const TensorFile& file, const std::string& key) {
  auto it = file.metadata.find(key);
  if (it == file.metadata.end()) throw Error("missing metadata: " + key);
  std::size_t value = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value == 0) {
    throw Error("metadata " + key + " must be a positive integer, got '" + s + "'");
  }
  return value;
}

class TensorReader {
 public:
  explicit TensorReader(const TensorFile& file) : file_(file) {}

  std::vector<float> take(const std::string& name, std::vector<std::int64_t> shape) const {
    auto it = file_.tensors.find(name);
    if (it == file_.tensors.end()) throw Error("missing tensor: " + name);
    const Tensor& t = it->second;
    if (t.shape != shape) {
      throw Error("shape mismatch for " + name + ": expected " + shape_string(shape) + ", got " +
                  shape_string(t.shape));
    }
    for (float v : t.data) {
      if (!std::isfinite(v)) throw Error("non-finite value in tensor " + name);
    }
    return t.data;
  }

  Matrix matrix(const std::string& name, std::size_t rows, std::size_t cols) const {
    Matrix m;
    m.rows = rows;
    m.cols = cols;
    m.values = take(name, {static_cast<std::int64_t>(rows), static_cast<std::int64_t>(cols)});
    return m;
  }

  std::vector<float> vector(const std::string& name, std::size_t n) const {
    return take(name, {static_cast<std::int64_t>(n)});
  }

  Linear linear(const std::string& prefix, std::size_t in, std::size_t out) const {
    return {matrix(prefix + ".weight", in, out), vector(prefix + ".bias", out)};
  }

  LayerNormParams norm(const std::string& prefix, std::size_t n) const {
    return {vector(prefix + ".weight", n), vector(prefix + ".bias", n)};
  }

 private:
  const TensorFile& file_;
};

// out[r] = x[r] * W + b, accumulated in double.
Matrix apply(const Linear& lin, const Matrix& x) {
  const std::size_t in = lin.weight.rows;
  const std::size_t out_dim = lin.weight.cols;
  Matrix out(x.rows, out_dim);
  std::vector<double> acc(out_dim);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t j = 0; j < out_dim; ++j) acc[j] = lin.bias[j];
    const float* xr = x.row(r).data();
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xr[i];
      const float* w = lin.weight.row(i).data();
      for (std::size_t j = 0; j < out_dim; ++j) acc[j] += xi * static_cast<double>(w[j]);
    }
    float* o = out.row(r).data();
    for (std::size_t j = 0; j < out_dim; ++j) o[j] = static_cast<float>(acc[j]);
  }
  return out;
}

void layer_norm_row(std::span<const float> x, const LayerNormParams& p, double eps,
                    std::span<float> out) {
  double mean = 0.0;
  for (float v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (float v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  const double inv = 1.0 / std::sqrt(var + eps);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = static_cast<float>((x[i] - mean) * inv * p.scale[i] + p.shift[i]);
  }
}

Matrix layer_norm(const Matrix& x, const LayerNormParams& p, double eps) {
  Matrix out(x.rows, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) layer_norm_row(x.row(r), p, eps, out.row(r));
  return out;
}

float quick_gelu(float x) {
  const double v = x;
  return static_cast<float>(v / (1.0 + std::exp(-1.702 * v)));
}

void check_ids(const EncoderModel& model, const TokenSequence& seq) {
  if (seq.context_length() != model.config.context_length) {
    throw Error("context length mismatch: sequence has " + std::to_string(seq.context_length()) +
                ", model expects " + std::to_string(model.config.context_length));
  }
  for (TokenId id : seq.ids()) {
    if (id < 0 || static_cast<std::size_t>(id) >= model.config.vocab_size) {
      throw Error("token id out of range: " + std::to_string(id));
    }
  }
}

// Runs the first `positions` tokens through every block. Causal masking means
// hidden states at positions < `positions` do not depend on later tokens.
// When `trace` is set, the attention of layer trace->layer_index is recorded.
Matrix run_blocks(const EncoderModel& model, std::span<const TokenId> ids, std::size_t positions,
                  AttentionTrace* trace) {
  const auto& cfg = model.config;
  const std::size_t d = cfg.d_model;
  const std::size_t hd = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  Matrix x(positions, d);
  for (std::size_t p = 0; p < positions; ++p) {
    auto tok = model.token_embedding.row(static_cast<std::size_t>(ids[p]));
    auto pos = model.positional_embedding.row(p);
    auto dst = x.row(p);
    for (std::size_t i = 0; i < d; ++i) dst[i] = tok[i] + pos[i];
  }

  std::vector<double> weights(positions);
  std::vector<double> acc(hd);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const EncoderBlock& block = model.layers[l];
    const bool record = trace != nullptr && trace->layer_index == l;

    Matrix h = layer_norm(x, block.ln_1, cfg.layer_norm_epsilon);
    Matrix q = apply(block.query, h);
    Matrix k = apply(block.key, h);
    Matrix v = apply(block.value, h);
    Matrix mixed(positions, d);
    if (record) {
      trace->heads.clear();
      for (std::size_t head = 0; head < cfg.n_heads; ++head) {
        trace->heads.push_back({l, head, Matrix(positions, positions)});
      }
    }

    for (std::size_t head = 0; head < cfg.n_heads; ++head) {
      const std::size_t off = head * hd;
      for (std::size_t i = 0; i < positions; ++i) {
        const float* qi = q.row(i).data() + off;
        double max_score = -INFINITY;
        for (std::size_t j = 0; j <= i; ++j) {
          const float* kj = k.row(j).data() + off;
          double s = 0.0;
          for (std::size_t c = 0; c < hd; ++c) s += static_cast<double>(qi[c]) * kj[c];
          weights[j] = s * scale;
          max_score = std::max(max_score, weights[j]);
        }
        double total = 0.0;
        for (std::size_t j = 0; j <= i; ++j) {
          weights[j] = std::exp(weights[j] - max_score);
          total += weights[j];
        }
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t j = 0; j <= i; ++j) {
          weights[j] /= total;
          const float* vj = v.row(j).data() + off;
          for (std::size_t c = 0; c < hd; ++c) acc[c] += weights[j] * vj[c];
        }
        float* mi = mixed.row(i).data() + off;
        for (std::size_t c = 0; c < hd; ++c) mi[c] = static_cast<float>(acc[c]);
        if (record) {
          auto& w = trace->heads[head].weights;
          for (std::size_t j = 0; j <= i; ++j) w(i, j) = static_cast<float>(weights[j]);
        }
      }
    }

    Matrix attn = apply(block.output, mixed);
    for (std::size_t i = 0; i < x.values.size(); ++i) x.values[i] += attn.values[i];
    if (record) {
      trace->values = std::move(v);
      trace->mixed = std::move(mixed);
      return x;  // later layers are not needed by a trace
    }

    Matrix h2 = layer_norm(x, block.ln_2, cfg.layer_norm_epsilon);
    Matrix f = apply(block.expand, h2);
    for (float& e : f.values) e = quick_gelu(e);
    Matrix g = apply(block.contract, f);
    for (std::size_t i = 0; i < x.values.size(); ++i) x.values[i] += g.values[i];
  }
  return x;
}

void put(TensorFile& file, const std::string& name, const Matrix& m) {
  file.tensors[name] = {{static_cast<std::int64_t>(m.rows), static_cast<std::int64_t>(m.cols)},
                        m.values};
}

void put(TensorFile& file, const std::string& name, const std::vector<float>& v) {
  file.tensors[name] = {{static_cast<std::int64_t>(v.size())}, v};
}

}  // namespace

EncoderModel model_from_tensors(const TensorFile& file) {
  EncoderModel m;
  auto& cfg = m.config;
  cfg.n_layers = metadata_size(file, "n_layers");
  cfg.n_heads = metadata_size(file, "n_heads");
  cfg.d_model = metadata_size(file, "d_model");
  cfg.d_ff = metadata_size(file, "d_ff");
  cfg.d_out = metadata_size(file, "d_out");
  cfg.context_length = metadata_size(file, "context_length");
  cfg.vocab_size = metadata_size(file, "vocab_size");
  if (auto it = file.metadata.find("layer_norm_epsilon"); it != file.metadata.end()) {
    try {
      std::size_t used = 0;
      cfg.layer_norm_epsilon = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error("metadata layer_norm_epsilon is not a number: '" + it->second + "'");
    }
    if (!(cfg.layer_norm_epsilon > 0.0)) throw Error("layer_norm_epsilon must be positive");
  }
  if (cfg.d_model % cfg.n_heads != 0) throw Error("d_model not divisible by n_heads");

  const TensorReader r(file);
  const std::size_t d = cfg.d_model;
  m.token_embedding = r.matrix("token_embedding", cfg.vocab_size, d);
  m.positional_embedding = r.matrix("positional_embedding", cfg.context_length, d);
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    EncoderBlock b;
    b.ln_1 = r.norm(p + "ln_1", d);
    b.query = r.linear(p + "attn.query", d, d);
    b.key = r.linear(p + "attn.key", d, d);
    b.value = r.linear(p + "attn.value", d, d);
    b.output = r.linear(p + "attn.out", d, d);
    b.ln_2 = r.norm(p + "ln_2", d);
    b.expand = r.linear(p + "mlp.fc", d, cfg.d_ff);
    b.contract = r.linear(p + "mlp.proj", cfg.d_ff, d);
    m.layers.push_back(std::move(b));
  }
  m.final_layer_norm = r.norm("ln_final", d);
  m.text_projection = r.matrix("text_projection", d, cfg.d_out);
  return m;
}

TensorFile model_to_tensors(const EncoderModel& m) {
  TensorFile f;
  const auto& cfg = m.config;
  f.metadata = {{"n_layers", std::to_string(cfg.n_layers)},
                {"n_heads", std::to_string(cfg.n_heads)},
                {"d_model", std::to_string(cfg.d_model)},
                {"d_ff", std::to_string(cfg.d_ff)},
                {"d_out", std::to_string(cfg.d_out)},
                {"context_length", std::to_string(cfg.context_length)},
                {"vocab_size", std::to_string(cfg.vocab_size)}};
  char eps[32];
  auto [end, ec] = std::to_chars(eps, eps + sizeof eps, cfg.layer_norm_epsilon);
  f.metadata["layer_norm_epsilon"] = std::string(eps, end);

  put(f, "token_embedding", m.token_embedding);
  put(f, "positional_embedding", m.positional_embedding);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    const EncoderBlock& b = m.layers[l];
    auto put_linear = [&](const std::string& name, const Linear& lin) {
      put(f, p + name + ".weight", lin.weight);
      put(f, p + name + ".bias", lin.bias);
    };
    auto put_norm = [&](const std::string& name, const LayerNormParams& n) {
      put(f, p + name + ".weight", n.scale);
      put(f, p + name + ".bias", n.shift);
    };
    put_norm("ln_1", b.ln_1);
    put_linear("attn.query", b.query);
    put_linear("attn.key", b.key);
    put_linear("attn.value", b.value);
    put_linear("attn.out", b.output);
    put_norm("ln_2", b.ln_2);
    put_linear("mlp.fc", b.expand);
    put_linear("mlp.proj", b.contract);
  }
  put(f, "ln_final.weight", m.final_layer_norm.scale);
  put(f, "ln_final.bias", m.final_layer_norm.shift);
  put(f, "text_projection", m.text_projection);
  return f;
}

EncoderModel load_weights(const std::filesystem::path& path) {
  return model_from_tensors(read_tensor_file(path));
}

void save_weights(const std::filesystem::path& path, const EncoderModel& model) {
  write_tensor_file(path, model_to_tensors(model));
}

Embedding forward(const EncoderModel& model, const TokenSequence& seq, std::string source_text) {
  check_ids(model, seq);
  const auto& cfg = model.config;
  const std::size_t eot = seq.eot_index();
  Matrix hidden = run_blocks(model, seq.ids(), eot + 1, nullptr);

  std::vector<float> pooled(cfg.d_model);
  layer_norm_row(hidden.row(eot), model.final_layer_norm, cfg.layer_norm_epsilon, pooled);

  std::vector<double> acc(cfg.d_out, 0.0);
  for (std::size_t i = 0; i < cfg.d_model; ++i) {
    const double xi = pooled[i];
    auto w = model.text_projection.row(i);
    for (std::size_t j = 0; j < cfg.d_out; ++j) acc[j] += xi * static_cast<double>(w[j]);
  }
  Embedding e;
  e.source_text = std::move(source_text);
  e.values.resize(cfg.d_out);
  for (std::size_t j = 0; j < cfg.d_out; ++j) e.values[j] = static_cast<float>(acc[j]);
  return e;
}

AttentionTrace attention_trace(const EncoderModel& model, const TokenSequence& seq,
                               std::size_t layer) {
  if (layer >= model.config.n_layers) {
    throw Error("layer index out of range: " + std::to_string(layer));
  }
  check_ids(model, seq);
  AttentionTrace trace;
  trace.layer_index = layer;
  run_blocks(model, seq.ids(), seq.context_length(), &trace);
  return trace;
}

AttentionMatrix attention_weights(const EncoderModel& model, const TokenSequence& seq,
                                  std::size_t layer, std::size_t head) {
  if (head >= model.config.n_heads) {
    throw Error("head index out of range: " + std::to_string(head));
  }
  AttentionTrace trace = attention_trace(model, seq, layer);
  return std::move(trace.heads[head]);
}

}  // namespace negprobe
