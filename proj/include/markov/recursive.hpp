#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "markov/dense.hpp"
#include "markov/errors.hpp"
#include "markov/family.hpp"
#include "markov/markov_core.hpp"
#include "markov/rng.hpp"
#include "markov/shift.hpp"
#include "markov/simplex.hpp"

namespace markov {

// A recursion rule: a pure map f from a single conditional (a point of the
// N-simplex) to the N x N column-stochastic block of conditionals one order
// higher. The map is sampled at construction to catch rules that leave the
// simplex.
class RecursiveSpec {
 public:
  using Map = std::function<DenseMatrix(const SimplexVector&)>;

  RecursiveSpec(int alphabet, Map map, std::string kind = "custom")
      : alphabet_(alphabet), map_(std::move(map)), kind_(std::move(kind)) {
    if (alphabet_ < 2) throw contract_error("recursive spec: alphabet must be >= 2");
    if (!map_) throw contract_error("recursive spec: map must be callable");
    const std::size_t n = static_cast<std::size_t>(alphabet_);
    SplitMix64 rng(0x5eedULL);
    std::vector<SimplexVector> probes;
    probes.push_back(SimplexVector::uniform(n));
    for (std::size_t i = 1; i <= n; ++i) probes.push_back(SimplexVector::point_mass(n, i));
    for (int i = 0; i < 3; ++i) probes.push_back(random_simplex(rng, n, 0.0));
    for (const auto& p : probes) validate_output(map_(p));
  }

  int alphabet() const { return alphabet_; }
  const std::string& kind() const { return kind_; }

  DenseMatrix operator()(const SimplexVector& omega) const {
    if (omega.dim() != static_cast<std::size_t>(alphabet_))
      throw contract_error("recursive spec: argument dim does not match alphabet");
    return map_(omega);
  }

  // f ignores its argument; the fixed-point equation reduces to omega = R omega.
  static RecursiveSpec constant(DenseMatrix r) {
    require_square_stochastic(r, "constant spec");
    const int n = static_cast<int>(r.rows());
    return RecursiveSpec(
        n, [r = std::move(r)](const SimplexVector&) { return r; }, "constant");
  }

  // f(omega) = (1-epsilon) * (omega as every column) + epsilon * R.
  static RecursiveSpec mixture(double epsilon, DenseMatrix r) {
    if (!(epsilon > 0.0) || epsilon > 1.0)
      throw contract_error("mixture spec: epsilon must lie in (0, 1]");
    require_square_stochastic(r, "mixture spec");
    const int n = static_cast<int>(r.rows());
    return RecursiveSpec(
        n,
        [epsilon, r = std::move(r)](const SimplexVector& omega) {
          const std::size_t nn = omega.dim();
          DenseMatrix out(nn, nn);
          for (std::size_t i = 0; i < nn; ++i)
            for (std::size_t j = 0; j < nn; ++j)
              out.at(i, j) = (1.0 - epsilon) * omega[i] + epsilon * r.at(i, j);
          return out;
        },
        "mixture");
  }

 private:
  static void require_square_stochastic(const DenseMatrix& r, const std::string& what) {
    if (r.rows() != r.cols() || r.rows() < 2)
      throw contract_error(what + ": matrix must be square of size >= 2");
    if (!is_column_stochastic(r))
      throw contract_error(what + ": matrix must be column-stochastic");
  }

  void validate_output(const DenseMatrix& out) const {
    const std::size_t n = static_cast<std::size_t>(alphabet_);
    if (out.rows() != n || out.cols() != n)
      throw contract_error("recursive spec: map output is not N x N");
    if (!is_column_stochastic(out))
      throw contract_error("recursive spec: map output is not column-stochastic");
  }

  int alphabet_;
  Map map_;
  std::string kind_;
};

struct FixedPointResult {
  SimplexVector omega;
  std::size_t iterations;
  double residual;  // ||omega - f(omega) omega||_1
};

// Default order-1 base family: the columns of f(uniform).
inline ConditionalFamily default_truncation_base(const RecursiveSpec& spec) {
  const std::size_t n = static_cast<std::size_t>(spec.alphabet());
  const DenseMatrix f = spec(SimplexVector::uniform(n));
  std::vector<double> flat(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t y = 0; y < n; ++y) flat[j * n + y] = f.at(y, j);
  return ConditionalFamily(spec.alphabet(), 1, std::move(flat));
}

// Grows the base family one order at a time: the N columns of f applied to
// an order-m member become its N order-(m+1) refinements, the new lowest
// digit selecting the column.
inline ConditionalFamily build_truncation(const RecursiveSpec& spec, const ConditionalFamily& base,
                                          int k, std::size_t cap = kDenseSizeCap) {
  if (base.alphabet() != spec.alphabet())
    throw contract_error("build_truncation: base alphabet does not match spec");
  if (base.order() != 1) throw contract_error("build_truncation: base must have order 1");
  if (k < 1) throw contract_error("build_truncation: k must be >= 1");
  const std::size_t n = static_cast<std::size_t>(spec.alphabet());
  if (ipow(n, k + 1) > cap)
    throw capacity_error("build_truncation: order " + std::to_string(k) + " needs " +
                         std::to_string(ipow(n, k + 1)) + " entries, cap " + std::to_string(cap));
  ConditionalFamily cur = base;
  for (int m = 1; m < k; ++m) {
    const std::size_t count = cur.member_count();
    std::vector<double> next(count * n * n);
    for (std::size_t i = 0; i < count; ++i) {
      const DenseMatrix f = spec(cur.member_vector(i));
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t y = 0; y < n; ++y) next[(i * n + j) * n + y] = f.at(y, j);
    }
    cur = ConditionalFamily(spec.alphabet(), m + 1, std::move(next));
  }
  return cur;
}

inline ConditionalFamily build_truncation(const RecursiveSpec& spec, int k,
                                          std::size_t cap = kDenseSizeCap) {
  return build_truncation(spec, default_truncation_base(spec), k, cap);
}

// Damped iteration omega <- (1-gamma) omega + gamma f(omega) omega until the
// L1 residual of omega = f(omega) omega drops below config.tolerance.
inline FixedPointResult fixed_point(const RecursiveSpec& spec, const SolverConfig& config,
                                    const SimplexVector& start) {
  if (start.dim() != static_cast<std::size_t>(spec.alphabet()))
    throw contract_error("fixed_point: start dim does not match alphabet");
  if (config.damping <= 0.0 || config.damping > 1.0)
    throw contract_error("fixed_point: damping must lie in (0, 1]");
  std::vector<double> omega = start.entries();
  double residual = 0.0;
  for (std::size_t iter = 0; iter <= config.max_iterations; ++iter) {
    SimplexVector cur((std::vector<double>(omega)));
    const auto next = matvec(spec(cur), omega);
    residual = l1_distance(omega, next);
    if (residual <= config.tolerance) return {std::move(cur), iter, residual};
    const double g = config.damping;
    double sum = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i) {
      omega[i] = (1.0 - g) * omega[i] + g * next[i];
      sum += omega[i];
    }
    // The scale defect feeds back through f and would grow geometrically;
    // renormalizing is exact on the simplex.
    for (double& v : omega) v /= sum;
  }
  throw convergence_error("fixed_point: residual " + std::to_string(residual) + " after " +
                              std::to_string(config.max_iterations) + " iterations",
                          config.max_iterations, residual);
}

inline FixedPointResult fixed_point(const RecursiveSpec& spec, const SolverConfig& config = {}) {
  return fixed_point(spec, config,
                     SimplexVector::uniform(static_cast<std::size_t>(spec.alphabet())));
}

struct TruncationDiagnostics {
  int order;                  // truncation order k
  double marginal_distance;   // || omega_1^{(k)} - omega* ||_1
  double hypothesis_residual; // || theta^{(k)} - M^{(k)}_k theta^{(k+1)} ||_1
};

// Observational diagnostics for the truncation tower: how far each
// truncation's order-1 stationary marginal sits from the fixed point, and
// how close consecutive stationary vectors are to being projections of one
// another. Nothing is asserted here.
inline std::vector<TruncationDiagnostics> truncation_convergence(const RecursiveSpec& spec,
                                                                 const ConditionalFamily& base,
                                                                 int k_max,
                                                                 const SolverConfig& config = {}) {
  if (k_max < 1) throw contract_error("truncation_convergence: k_max must be >= 1");
  const int n = spec.alphabet();
  const SimplexVector omega_star = fixed_point(spec, config).omega;
  std::vector<TruncationDiagnostics> out;
  out.reserve(static_cast<std::size_t>(k_max));
  std::vector<double> theta =
      stationary_solve(HigherOrderChain(build_truncation(spec, base, 1)), config).theta.entries();
  for (int k = 1; k <= k_max; ++k) {
    const std::vector<double> omega1 = marginal_of(theta, n, k, 1);
    const double dist = l1_distance(omega1, omega_star.span());
    std::vector<double> theta_next =
        stationary_solve(HigherOrderChain(build_truncation(spec, base, k + 1)), config)
            .theta.entries();
    const auto projected =
        StructuredOperator::marginalization(n, k, k).apply_raw(theta_next);
    const double residual = l1_distance(theta, projected);
    out.push_back({k, dist, residual});
    theta = std::move(theta_next);
  }
  return out;
}

inline std::vector<TruncationDiagnostics> truncation_convergence(const RecursiveSpec& spec,
                                                                 int k_max,
                                                                 const SolverConfig& config = {}) {
  return truncation_convergence(spec, default_truncation_base(spec), k_max, config);
}

// True iff the directed graph on entries above the threshold is strongly
// connected.
inline bool check_irreducibility(const DenseMatrix& q, double threshold = 1e-12) {
  if (q.rows() != q.cols()) throw contract_error("check_irreducibility: matrix must be square");
  return strongly_connected(q, threshold);
}

}  // namespace markov
