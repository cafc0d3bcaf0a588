#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "negprobe/tensor_file.hpp"
#include "negprobe/tokenizer.hpp"

namespace negprobe {

// Row-major f32 matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0f) {}

  float& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  float operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<float> row(std::size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const float> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

struct EncoderConfig {
  std::size_t n_layers = 0;
  std::size_t n_heads = 0;
  std::size_t d_model = 0;
  std::size_t d_ff = 0;
  std::size_t d_out = 0;
  std::size_t context_length = 0;
  std::size_t vocab_size = 0;
  double layer_norm_epsilon = 1e-5;

  std::size_t head_dim() const { return d_model / n_heads; }
};

struct LayerNormParams {
  std::vector<float> scale;
  std::vector<float> shift;
};

// y = x * weight + bias, weight stored [in x out].
struct Linear {
  Matrix weight;
  std::vector<float> bias;
};

struct EncoderBlock {
  LayerNormParams ln_1;
  Linear query;
  Linear key;
  Linear value;
  Linear output;
  LayerNormParams ln_2;
  Linear expand;    // [d_model x d_ff]
  Linear contract;  // [d_ff x d_model]
};

// Pre-layer-norm causal transformer text tower with a final projection.
// Immutable after construction; every operation on it is a pure function.
struct EncoderModel {
  EncoderConfig config;
  Matrix token_embedding;       // [vocab_size x d_model]
  Matrix positional_embedding;  // [context_length x d_model]
  std::vector<EncoderBlock> layers;
  LayerNormParams final_layer_norm;
  Matrix text_projection;  // [d_model x d_out]
};

// Pooled, projected sentence vector. Not length-normalized.
struct Embedding {
  std::vector<double> values;
  std::string source_text;

  std::size_t dim() const noexcept { return values.size(); }
};

struct AttentionMatrix {
  std::size_t layer_index = 0;
  std::size_t head_index = 0;
  Matrix weights;  // [context_length x context_length], causal, row-stochastic
};

// Everything needed to check that a layer's attention output is a convex
// combination of its value vectors.
struct AttentionTrace {
  std::size_t layer_index = 0;
  std::vector<AttentionMatrix> heads;
  Matrix values;  // value projections, [context_length x d_model]
  Matrix mixed;   // per-head weighted sums before the output projection
};

// Checks hyperparameters, tensor presence, shapes and finiteness.
EncoderModel model_from_tensors(const TensorFile& file);
TensorFile model_to_tensors(const EncoderModel& model);

EncoderModel load_weights(const std::filesystem::path& path);
void save_weights(const std::filesystem::path& path, const EncoderModel& model);

// Hidden state at the end-of-text position after the final layer norm,
// multiplied by the text projection.
Embedding forward(const EncoderModel& model, const TokenSequence& seq,
                  std::string source_text = {});

AttentionMatrix attention_weights(const EncoderModel& model, const TokenSequence& seq,
                                  std::size_t layer, std::size_t head);

AttentionTrace attention_trace(const EncoderModel& model, const TokenSequence& seq,
                               std::size_t layer);

}  // namespace negprobe
