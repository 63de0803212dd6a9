#pragma once

#include <cstdint>
#include <vector>

#include "markov/dense.hpp"
#include "markov/family.hpp"
#include "markov/simplex.hpp"

namespace markov {

// SplitMix64. Fixed constants, so identical seeds reproduce identical
// streams on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Random simplex vector with entries bounded below by floor/(dim*floor+1)
// after normalization; floor > 0 keeps the vector strictly positive.
inline SimplexVector random_simplex(SplitMix64& rng, std::size_t dim, double floor = 0.05) {
  std::vector<double> e(dim);
  double sum = 0.0;
  for (double& v : e) {
    v = floor + rng.next_double();
    sum += v;
  }
  for (double& v : e) v /= sum;
  return SimplexVector(std::move(e));
}

inline ConditionalFamily random_family(int alphabet, int order, std::uint64_t seed,
                                       double floor = 0.05) {
  SplitMix64 rng(seed);
  const std::size_t n = static_cast<std::size_t>(alphabet);
  const std::size_t count = ipow(n, order);
  std::vector<double> flat;
  flat.reserve(count * n);
  for (std::size_t i = 0; i < count; ++i) {
    auto row = random_simplex(rng, n, floor);
    flat.insert(flat.end(), row.entries().begin(), row.entries().end());
  }
  return ConditionalFamily(alphabet, order, std::move(flat));
}

// Random column-stochastic matrix with strictly positive entries.
inline DenseMatrix random_stochastic_matrix(int n, SplitMix64& rng, double floor = 0.05) {
  DenseMatrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    auto col = random_simplex(rng, static_cast<std::size_t>(n), floor);
    for (int i = 0; i < n; ++i) m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = col[static_cast<std::size_t>(i)];
  }
  return m;
}

}  // namespace markov
