#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "markov/errors.hpp"
#include "markov/simplex.hpp"

namespace markov {

// The N^k next-symbol conditionals of an order-k chain over an N-letter
// alphabet. Member i (0-based) occupies the flat slice [i*N, (i+1)*N).
class ConditionalFamily {
 public:
  ConditionalFamily(int alphabet, int order, std::vector<double> flat)
      : alphabet_(alphabet), order_(order), flat_(std::move(flat)) {
    if (alphabet_ < 2) throw contract_error("conditional family: alphabet must be >= 2");
    if (order_ < 0) throw contract_error("conditional family: order must be >= 0");
    const std::size_t n = static_cast<std::size_t>(alphabet_);
    const std::size_t count = ipow(n, order_);
    if (flat_.size() != count * n)
      throw contract_error("conditional family: expected " + std::to_string(count) +
                           " members of dimension " + std::to_string(n));
    for (std::size_t i = 0; i < count; ++i) {
      // Validates and clamps each member through the simplex constructor.
      SimplexVector row(std::vector<double>(flat_.begin() + static_cast<std::ptrdiff_t>(i * n),
                                            flat_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n)));
      for (std::size_t y = 0; y < n; ++y) flat_[i * n + y] = row[y];
    }
  }

  ConditionalFamily(int alphabet, int order, const std::vector<SimplexVector>& members)
      : ConditionalFamily(alphabet, order, flatten(alphabet, members)) {}

  int alphabet() const { return alphabet_; }
  int order() const { return order_; }
  std::size_t member_count() const { return flat_.size() / static_cast<std::size_t>(alphabet_); }

  std::span<const double> member(std::size_t i) const {
    const std::size_t n = static_cast<std::size_t>(alphabet_);
    return {flat_.data() + i * n, n};
  }

  SimplexVector member_vector(std::size_t i) const {
    auto m = member(i);
    return SimplexVector(std::vector<double>(m.begin(), m.end()));
  }

  const std::vector<double>& flat() const { return flat_; }

 private:
  static std::vector<double> flatten(int alphabet, const std::vector<SimplexVector>& members) {
    std::vector<double> flat;
    flat.reserve(members.size() * static_cast<std::size_t>(alphabet));
    for (const auto& m : members) {
      if (m.dim() != static_cast<std::size_t>(alphabet))
        throw contract_error("conditional family: member dimension differs from alphabet");
      flat.insert(flat.end(), m.entries().begin(), m.entries().end());
    }
    return flat;
  }

  int alphabet_;
  int order_;
  std::vector<double> flat_;
};

}  // namespace markov
