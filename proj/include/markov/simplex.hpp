#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "markov/errors.hpp"

namespace markov {

// Most negative entry accepted before construction fails; anything in
// [-1e-12, 0) is treated as round-off and clamped to zero.
inline constexpr double kSimplexEntryTolerance = 1e-12;
// Admissible deviation of the entry sum from one.
inline constexpr double kSimplexSumTolerance = 1e-9;

inline std::size_t ipow(std::size_t base, int exponent) {
  std::size_t result = 1;
  for (int i = 0; i < exponent; ++i) result *= base;
  return result;
}

// A point of the probability simplex: non-negative entries summing to one.
class SimplexVector {
 public:
  explicit SimplexVector(std::vector<double> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw contract_error("simplex vector must have positive dimension");
    double sum = 0.0;
    for (double& e : entries_) {
      if (e < 0.0) {
        if (e < -kSimplexEntryTolerance)
          throw contract_error("simplex vector entry " + std::to_string(e) +
                               " below tolerance " + std::to_string(-kSimplexEntryTolerance));
        e = 0.0;
      }
      sum += e;
    }
    if (std::abs(sum - 1.0) > kSimplexSumTolerance)
      throw contract_error("simplex vector sums to " + std::to_string(sum) + ", expected 1");
  }

  static SimplexVector uniform(std::size_t dim) {
    return SimplexVector(std::vector<double>(dim, 1.0 / static_cast<double>(dim)));
  }

  // Point mass on the given 1-based symbol.
  static SimplexVector point_mass(std::size_t dim, std::size_t symbol) {
    if (symbol < 1 || symbol > dim) throw contract_error("point mass symbol out of range");
    std::vector<double> e(dim, 0.0);
    e[symbol - 1] = 1.0;
    return SimplexVector(std::move(e));
  }

  std::size_t dim() const { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<double>& entries() const { return entries_; }
  std::span<const double> span() const { return entries_; }

 private:
  std::vector<double> entries_;
};

inline double l1_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

inline double l1_distance(const SimplexVector& a, const SimplexVector& b) {
  if (a.dim() != b.dim()) throw contract_error("l1_distance: dimension mismatch");
  return l1_distance(a.span(), b.span());
}

}  // namespace markov
