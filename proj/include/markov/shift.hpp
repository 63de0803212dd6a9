#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "markov/dense.hpp"
#include "markov/errors.hpp"
#include "markov/family.hpp"
#include "markov/markov_core.hpp"
#include "markov/simplex.hpp"
#include "markov/tensor_ops.hpp"

namespace markov {

// Conditional families of orders 1..k over a shared alphabet; the argument
// list of the k-shift construction.
class ShiftChain {
 public:
  explicit ShiftChain(std::vector<ConditionalFamily> families) : families_(std::move(families)) {
    if (families_.empty()) throw contract_error("shift chain: needs at least one family");
    const int n = families_.front().alphabet();
    for (std::size_t i = 0; i < families_.size(); ++i) {
      if (families_[i].alphabet() != n)
        throw contract_error("shift chain: families must share one alphabet");
      if (families_[i].order() != static_cast<int>(i) + 1)
        throw contract_error("shift chain: family " + std::to_string(i) + " has order " +
                             std::to_string(families_[i].order()) + ", expected " +
                             std::to_string(i + 1));
    }
  }

  int alphabet() const { return families_.front().alphabet(); }
  int order() const { return static_cast<int>(families_.size()); }
  const ConditionalFamily& family(int m) const {
    return families_[static_cast<std::size_t>(m - 1)];
  }

 private:
  std::vector<ConditionalFamily> families_;
};

// The defining composition M_1 ... M_k C_1 B_k ... B_1: maps a one-symbol
// distribution to the distribution of the symbol k steps ahead under
// conditionals of increasing order.
inline StructuredOperator shift_operator(const ShiftChain& chain) {
  const int n = chain.alphabet();
  const int k = chain.order();
  std::vector<StructuredOperator> factors;
  factors.reserve(2 * static_cast<std::size_t>(k) + 1);
  for (int m = 1; m <= k; ++m) factors.push_back(StructuredOperator::marginalization(n, m, m));
  factors.push_back(StructuredOperator::cycling(n, k + 1, 1));
  for (int m = k; m >= 1; --m)
    factors.push_back(StructuredOperator::branching(m, m, chain.family(m)));
  return StructuredOperator::compose(std::move(factors));
}

inline DenseMatrix shift_matrix(const ShiftChain& chain, std::size_t cap = kDenseSizeCap) {
  return shift_operator(chain).materialize(cap);
}

// Backward recursion over block matrices: level k starts from the order-k
// family blocks and each step contracts one order against the next family
// down. Equals shift_matrix without materializing anything larger than N^k
// many N x N blocks.
inline DenseMatrix shift_matrix_recursive(const ShiftChain& chain) {
  const int n = chain.alphabet();
  const int k = chain.order();
  const std::size_t nn = static_cast<std::size_t>(n);
  std::vector<DenseMatrix> level(ipow(nn, k - 1));
  {
    const ConditionalFamily& top = chain.family(k);
    for (std::size_t i = 0; i < level.size(); ++i) {
      DenseMatrix block(nn, nn);
      for (std::size_t j = 0; j < nn; ++j) {
        const auto q = top.member(i * nn + j);
        for (std::size_t y = 0; y < nn; ++y) block.at(y, j) = q[y];
      }
      level[i] = std::move(block);
    }
  }
  for (int m = k - 1; m >= 1; --m) {
    const ConditionalFamily& fam = chain.family(m);
    std::vector<DenseMatrix> next(ipow(nn, m - 1));
    for (std::size_t i = 0; i < next.size(); ++i) {
      DenseMatrix block(nn, nn);
      for (std::size_t j = 0; j < nn; ++j) {
        const auto col = matvec(level[i * nn + j], fam.member(i * nn + j));
        for (std::size_t y = 0; y < nn; ++y) block.at(y, j) = col[y];
      }
      next[i] = std::move(block);
    }
    level = std::move(next);
  }
  return level.front();
}

// Sum out the lowest digit of an order-k joint until m digits remain.
inline std::vector<double> marginal_of(std::vector<double> theta, int alphabet, int order,
                                       int target) {
  if (target < 0 || target > order)
    throw contract_error("marginal_of: need 0 <= target <= order");
  for (int j = order - 1; j >= target; --j)
    theta = StructuredOperator::marginalization(alphabet, j, j).apply_raw(theta);
  return theta;
}

// Residuals of the marginal-stationarity conditions without the input
// stationarity precondition; verify_marginal_conditions is the checked
// entry point.
inline std::vector<double> marginal_condition_residuals(const SimplexVector& theta,
                                                        const ConditionalFamily& family) {
  const int n = family.alphabet();
  const int k = family.order();
  const ChainDecomposition d = chain_decompose(theta, n, k);
  const SimplexVector theta0 = d.levels.front().member_vector(0);
  std::vector<double> residuals;
  residuals.reserve(static_cast<std::size_t>(k));
  std::vector<ConditionalFamily> prefix;
  for (int m = 1; m < k; ++m) {
    prefix.push_back(d.levels[static_cast<std::size_t>(m)]);
    const DenseMatrix s = shift_matrix(ShiftChain(prefix));
    residuals.push_back(l1_distance(theta0.span(), matvec(s, theta0.span())));
  }
  prefix.push_back(family);
  const DenseMatrix s = shift_matrix(ShiftChain(prefix));
  residuals.push_back(l1_distance(theta0.span(), matvec(s, theta0.span())));
  return residuals;
}

// Conditions a stationary vector imposes on its one-symbol marginal:
// ||theta0 - S(Theta_1..Theta_m) theta0||_1 for m = 1..k-1, then the same
// with the chain's own order-k family closing the list.
inline std::vector<double> verify_marginal_conditions(const SimplexVector& theta,
                                                      const ConditionalFamily& family) {
  const HigherOrderChain chain(family);
  if (theta.dim() != chain.state_count())
    throw contract_error("verify_marginal_conditions: vector dim does not match state count");
  const double input_residual = l1_distance(theta.span(), chain.apply(theta).span());
  if (input_residual > 1e-6)
    throw contract_error("verify_marginal_conditions: input residual " +
                         std::to_string(input_residual) +
                         " exceeds 1e-6; supply a stationary vector");
  return marginal_condition_residuals(theta, family);
}

// Order-m marginal of the stationary distribution, obtained by repeatedly
// summing out the lowest digit of the full stationary vector.
inline SimplexVector marginal_stationary(const ConditionalFamily& family, int m,
                                         const SolverConfig& config = {}) {
  const int k = family.order();
  if (m < 1 || m > k) throw contract_error("marginal_stationary: need 1 <= m <= k");
  const HigherOrderChain chain(family);
  StationaryResult full = stationary_solve(chain, config);
  return SimplexVector(marginal_of(full.theta.entries(), family.alphabet(), k, m));
}

}  // namespace markov
