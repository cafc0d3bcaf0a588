#pragma once

#include <span>
#include <vector>

#include "negprobe/text_encoder.hpp"

namespace negprobe {

// Vectors with a norm below this are treated as zero.
inline constexpr double kNormFloor = 1e-12;

struct CompositionTerm {
  double coefficient = 1.0;
  Embedding embedding;
};

// Ordered weighted sum of embeddings, e.g. f(w_abs) - f(w_con).
struct CompositionSpec {
  std::vector<CompositionTerm> terms;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

// a.b / (|a||b|). Throws on dimension mismatch or a near-zero norm.
double cosine_similarity(const Embedding& a, const Embedding& b);

// Sum of coefficient_i * embedding_i; never renormalized.
Embedding linear_combine(const CompositionSpec& spec);

// v - (v.d)d with d the unit vector along `direction`.
Embedding project_out(const Embedding& v, const Embedding& direction);

}  // namespace negprobe
