#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "markov/dense.hpp"
#include "markov/errors.hpp"
#include "markov/family.hpp"
#include "markov/simplex.hpp"
#include "markov/tensor_ops.hpp"

namespace markov {

struct SolverConfig {
  double tolerance = 1e-12;             // L1 residual
  std::size_t max_iterations = 1000000;
  double damping = 0.5;                 // update weight gamma in (0, 1]
};

// States are tuples (X_1,...,X_k) of 1-based symbols with X_1 the most
// recent symbol and the most significant base-N digit. The encoded index is
// 1-based: index = 1 + sum_j (X_j - 1) N^{k-j}.
inline std::size_t encode_state(int alphabet, int order, std::span<const int> symbols) {
  if (static_cast<int>(symbols.size()) != order)
    throw contract_error("encode_state: expected " + std::to_string(order) + " symbols");
  std::size_t idx = 0;
  for (int s : symbols) {
    if (s < 1 || s > alphabet)
      throw contract_error("encode_state: symbol " + std::to_string(s) + " out of range");
    idx = idx * static_cast<std::size_t>(alphabet) + static_cast<std::size_t>(s - 1);
  }
  return idx + 1;
}

inline std::vector<int> decode_state(int alphabet, int order, std::size_t index) {
  if (index < 1 || index > ipow(static_cast<std::size_t>(alphabet), order))
    throw contract_error("decode_state: index " + std::to_string(index) + " out of range");
  std::vector<int> symbols(static_cast<std::size_t>(order));
  std::size_t rem = index - 1;
  for (int j = order - 1; j >= 0; --j) {
    symbols[static_cast<std::size_t>(j)] = static_cast<int>(rem % static_cast<std::size_t>(alphabet)) + 1;
    rem /= static_cast<std::size_t>(alphabet);
  }
  return symbols;
}

// The N states reachable from state j in one step: the successor drops the
// oldest (least significant) digit and prepends the new symbol on top.
// Returned ascending.
inline std::vector<std::size_t> reachable_set(int alphabet, int order, std::size_t state) {
  const std::size_t n = static_cast<std::size_t>(alphabet);
  const std::size_t count = ipow(n, order);
  if (state < 1 || state > count) throw contract_error("reachable_set: state out of range");
  const std::size_t prefix = (state - 1) / n;
  const std::size_t stride = ipow(n, order - 1);
  std::vector<std::size_t> out(n);
  for (std::size_t y = 0; y < n; ++y) out[y] = y * stride + prefix + 1;
  return out;
}

// Order-k transition matrix: column j carries the next-symbol conditional
// q_j on the rows of reachable_set(j).
inline DenseMatrix build_transition(const ConditionalFamily& family,
                                    std::size_t cap = kDenseSizeCap) {
  if (family.order() < 1) throw contract_error("build_transition: order must be >= 1");
  const std::size_t n = static_cast<std::size_t>(family.alphabet());
  const std::size_t count = family.member_count();
  check_dense_capacity(count, count, cap);
  const std::size_t stride = count / n;
  DenseMatrix q(count, count);
  for (std::size_t j = 0; j < count; ++j) {
    const auto member = family.member(j);
    const std::size_t prefix = j / n;
    for (std::size_t y = 0; y < n; ++y) q.at(y * stride + prefix, j) = member[y];
  }
  return q;
}

// A higher-order chain with a matrix-free transition kernel: applying the
// transition costs O(N^{k+1}) time and O(N^k) space.
class HigherOrderChain {
 public:
  explicit HigherOrderChain(ConditionalFamily family) : family_(std::move(family)) {
    if (family_.order() < 1) throw contract_error("higher-order chain: order must be >= 1");
    state_count_ = family_.member_count();
    prefix_count_ = state_count_ / static_cast<std::size_t>(family_.alphabet());
  }

  const ConditionalFamily& family() const { return family_; }
  int alphabet() const { return family_.alphabet(); }
  int order() const { return family_.order(); }
  std::size_t state_count() const { return state_count_; }

  void apply_into(std::span<const double> in, std::span<double> out) const {
    const std::size_t n = static_cast<std::size_t>(family_.alphabet());
    const double* q = family_.flat().data();
    for (std::size_t y = 0; y < n; ++y) {
      double* dst = out.data() + y * prefix_count_;
      for (std::size_t p = 0; p < prefix_count_; ++p) {
        double acc = 0.0;
        const std::size_t base = p * n;
        for (std::size_t l = 0; l < n; ++l) acc += q[(base + l) * n + y] * in[base + l];
        dst[p] = acc;
      }
    }
  }

  SimplexVector apply(const SimplexVector& theta) const {
    if (theta.dim() != state_count_)
      throw contract_error("transition_apply: vector dim " + std::to_string(theta.dim()) +
                           " does not match state count " + std::to_string(state_count_));
    std::vector<double> out(state_count_);
    apply_into(theta.span(), out);
    return SimplexVector(std::move(out));
  }

 private:
  ConditionalFamily family_;
  std::size_t state_count_;
  std::size_t prefix_count_;
};

inline SimplexVector transition_apply(const HigherOrderChain& chain, const SimplexVector& theta) {
  return chain.apply(theta);
}

using TransitionApplyFn = std::function<void(std::span<const double>, std::span<double>)>;

struct StationaryResult {
  SimplexVector theta;
  std::size_t iterations;
  double residual;
};

namespace detail {

inline DenseMatrix materialize_from_apply(const TransitionApplyFn& apply, std::size_t dim) {
  DenseMatrix q(dim, dim);
  std::vector<double> e(dim, 0.0), col(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    e[j] = 1.0;
    apply(e, col);
    for (std::size_t i = 0; i < dim; ++i) q.at(i, j) = col[i];
    e[j] = 0.0;
  }
  return q;
}

// Solves (Q - I) theta = 0 with the last row replaced by the normalization
// sum(theta) = 1. Returns nullopt when the system is singular (multiple
// recurrent classes).
inline std::optional<std::vector<double>> stationary_direct(const DenseMatrix& q) {
  const std::size_t n = q.rows();
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a.at(i, j) = q.at(i, j) - (i == j ? 1.0 : 0.0);
  std::vector<double> b(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) a.at(n - 1, j) = 1.0;
  b[n - 1] = 1.0;
  auto x = solve_linear(std::move(a), std::move(b));
  if (!x) return std::nullopt;
  double sum = 0.0;
  for (double& v : *x) {
    if (v < 0.0 && v > -1e-9) v = 0.0;
    sum += v;
  }
  if (sum <= 0.0) return std::nullopt;
  for (double& v : *x) v /= sum;
  return x;
}

}  // namespace detail

// Damped power iteration theta <- (1-gamma) theta + gamma Q theta from the
// uniform start, stopping once the L1 residual ||theta - Q theta||_1 falls
// below config.tolerance. For dim <= 64 the result is cross-checked against
// a direct linear solve whenever the chain is irreducible.
inline StationaryResult stationary_solve(const TransitionApplyFn& apply, std::size_t dim,
                                         const SolverConfig& config = {}) {
  if (dim == 0) throw contract_error("stationary: dimension must be positive");
  if (config.damping <= 0.0 || config.damping > 1.0)
    throw contract_error("stationary: damping must lie in (0, 1]");
  std::vector<double> theta(dim, 1.0 / static_cast<double>(dim)), next(dim);
  double residual = 0.0;
  for (std::size_t iter = 0; iter <= config.max_iterations; ++iter) {
    apply(theta, next);
    residual = l1_distance(theta, next);
    if (residual <= config.tolerance) {
      SimplexVector result((std::vector<double>(theta)));
      if (dim <= 64) {
        const DenseMatrix q = detail::materialize_from_apply(apply, dim);
        if (strongly_connected(q, 1e-12)) {
          if (auto direct = detail::stationary_direct(q)) {
            const double gap = l1_distance(result.span(), *direct);
            if (gap > 1e-9)
              throw numeric_error(
                  "stationary: power iteration and direct solve disagree by L1 " +
                  std::to_string(gap) + " on an irreducible chain");
          }
        }
      }
      return {std::move(result), iter, residual};
    }
    const double g = config.damping;
    double sum = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      theta[i] = (1.0 - g) * theta[i] + g * next[i];
      sum += theta[i];
    }
    for (double& v : theta) v /= sum;
  }
  throw convergence_error("stationary: residual " + std::to_string(residual) + " after " +
                              std::to_string(config.max_iterations) + " iterations",
                          config.max_iterations, residual);
}

inline StationaryResult stationary_solve(const HigherOrderChain& chain,
                                         const SolverConfig& config = {}) {
  return stationary_solve(
      [&chain](std::span<const double> in, std::span<double> out) { chain.apply_into(in, out); },
      chain.state_count(), config);
}

inline StationaryResult stationary_solve(const DenseMatrix& q, const SolverConfig& config = {}) {
  if (q.rows() != q.cols()) throw contract_error("stationary: matrix must be square");
  return stationary_solve(
      [&q](std::span<const double> in, std::span<double> out) {
        auto y = matvec(q, in);
        std::copy(y.begin(), y.end(), out.begin());
      },
      q.rows(), config);
}

inline SimplexVector stationary(const TransitionApplyFn& apply, std::size_t dim,
                                const SolverConfig& config = {}) {
  return stationary_solve(apply, dim, config).theta;
}

// Chain-rule factorization of a joint distribution over k digits: level m
// holds the conditional of digit m+1 given the m digits above it.
struct ChainDecomposition {
  int alphabet;
  int order;
  std::vector<ConditionalFamily> levels;  // levels[m] has order m, for m = 0..k-1
};

inline ChainDecomposition chain_decompose(const SimplexVector& theta, int alphabet, int order) {
  const std::size_t n = static_cast<std::size_t>(alphabet);
  if (theta.dim() != ipow(n, order))
    throw contract_error("chain_decompose: vector dim does not match N^k");
  std::vector<ConditionalFamily> levels;
  levels.reserve(static_cast<std::size_t>(order));
  std::vector<double> cur = theta.entries();  // marginal over the top m+1 digits
  for (int m = order - 1; m >= 0; --m) {
    const std::size_t blocks = ipow(n, m);
    std::vector<double> marg(blocks), cond(blocks * n);
    for (std::size_t i = 0; i < blocks; ++i) {
      double mass = 0.0;
      for (std::size_t y = 0; y < n; ++y) mass += cur[i * n + y];
      marg[i] = mass;
      if (mass == 0.0) {
        for (std::size_t y = 0; y < n; ++y) cond[i * n + y] = 1.0 / static_cast<double>(n);
      } else {
        for (std::size_t y = 0; y < n; ++y) cond[i * n + y] = cur[i * n + y] / mass;
      }
    }
    levels.emplace_back(alphabet, m, std::move(cond));
    cur = std::move(marg);
  }
  std::reverse(levels.begin(), levels.end());
  return {alphabet, order, std::move(levels)};
}

inline SimplexVector chain_compose(const ChainDecomposition& d) {
  if (static_cast<int>(d.levels.size()) != d.order)
    throw contract_error("chain_compose: expected one level per order");
  std::vector<double> cur{1.0};
  for (int m = 0; m < d.order; ++m) {
    if (d.levels[static_cast<std::size_t>(m)].order() != m)
      throw contract_error("chain_compose: level " + std::to_string(m) + " has wrong order");
    cur = StructuredOperator::branching(m, m, d.levels[static_cast<std::size_t>(m)]).apply_raw(cur);
  }
  return SimplexVector(std::move(cur));
}

}  // namespace markov
