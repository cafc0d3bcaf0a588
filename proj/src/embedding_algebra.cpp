#include "negprobe/embedding_algebra.hpp"

#include <algorithm>
#include <cmath>

#include "negprobe/error.hpp"

namespace negprobe {
namespace {

void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine_similarity(const Embedding& a, const Embedding& b) {
  require_same_dim(a.dim(), b.dim());
  const double na = norm(a.values);
  const double nb = norm(b.values);
  if (na < kNormFloor || nb < kNormFloor) throw Error("near-zero norm in cosine similarity");
  return std::clamp(dot(a.values, b.values) / (na * nb), -1.0, 1.0);
}

Embedding linear_combine(const CompositionSpec& spec) {
  if (spec.terms.empty()) throw Error("composition needs at least one term");
  const std::size_t dim = spec.terms.front().embedding.dim();
  Embedding out;
  out.values.assign(dim, 0.0);
  for (const auto& term : spec.terms) {
    require_same_dim(dim, term.embedding.dim());
    for (std::size_t i = 0; i < dim; ++i) out.values[i] += term.coefficient * term.embedding.values[i];
  }
  return out;
}

Embedding project_out(const Embedding& v, const Embedding& direction) {
  require_same_dim(v.dim(), direction.dim());
  const double n = norm(direction.values);
  if (n < kNormFloor) throw Error("zero direction in projection");
  std::vector<double> unit(direction.values);
  for (double& x : unit) x /= n;
  const double along = dot(v.values, unit);
  Embedding out;
  out.source_text = v.source_text;
  out.values.resize(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out.values[i] = v.values[i] - along * unit[i];
  return out;
}

}  // namespace negprobe
