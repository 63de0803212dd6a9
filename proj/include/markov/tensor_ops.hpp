#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "markov/dense.hpp"
#include "markov/errors.hpp"
#include "markov/family.hpp"
#include "markov/rng.hpp"
#include "markov/simplex.hpp"

namespace markov {

namespace detail {

inline DenseMatrix unit_row(std::size_t dim, std::size_t i) {
  DenseMatrix m(1, dim);
  m.at(0, i) = 1.0;
  return m;
}

inline DenseMatrix unit_col(std::size_t dim, std::size_t i) {
  DenseMatrix m(dim, 1);
  m.at(i, 0) = 1.0;
  return m;
}

// E_{dim,i} = e_i e_i^T: a single 1 at (i, i).
inline DenseMatrix unit_diag(std::size_t dim, std::size_t i) {
  DenseMatrix m(dim, dim);
  m.at(i, i) = 1.0;
  return m;
}

inline DenseMatrix ones_row(std::size_t dim) { return DenseMatrix(1, dim, 1.0); }

// The commutation matrix as its defining sum of Kronecker products.
inline DenseMatrix commutation_sum(std::size_t n, std::size_t m) {
  DenseMatrix out(n * m, m * n);
  const DenseMatrix id = DenseMatrix::identity(n);
  for (std::size_t i = 0; i < m; ++i)
    out.add_in_place(kron(kron(unit_row(m, i), id), unit_col(m, i)));
  return out;
}

inline int normalize_rotation(int m, int k) {
  if (k == 0) return 0;
  const int r = m % k;
  return r < 0 ? r + k : r;
}

}  // namespace detail

// Symbolic form of the four structured operator families and their
// compositions. Immutable after construction; apply() is matrix-free and
// costs at most max(input_dim, output_dim) * alphabet operations, while
// materialize() builds the defining Kronecker-product sum densely.
class StructuredOperator {
 public:
  // Sums out the digit at significance rank m+1 from the top of a
  // (k+1)-digit joint distribution: dimension N^{k+1} -> N^k.
  struct Marginalization {
    int alphabet;
    int k;
    int m;
  };

  // Inserts a new digit below the top m digits of a k-digit joint,
  // distributed as the family member indexed by the k surrounding digits
  // read cyclically from just below the insertion point (the state rotated
  // so the new digit sits at the bottom): dimension N^k -> N^{k+1}. This
  // indexing is rotation-covariant, which is what makes the cycling
  // conjugation identity hold for every index pair; it coincides with the
  // plain state index when m = 0 or m = k.
  struct Branching {
    int k;
    int m;
    ConditionalFamily family;
  };

  // Moves the lowest m digits of a k-digit joint to the top (a right
  // rotation of the digit string by m); m is reduced modulo k.
  struct Cycling {
    int alphabet;
    int k;
    int m;  // normalized into {0,...,k-1}
  };

  // Swaps the two factors of a Kronecker-structured vector: u (x) v -> v (x) u
  // with dim(u) = m (high block), dim(v) = n (low block).
  struct Commutation {
    std::size_t n;
    std::size_t m;
  };

  // Factors in matrix-product order: the last factor is applied first.
  struct Composition {
    std::vector<StructuredOperator> factors;
  };

  static StructuredOperator marginalization(int alphabet, int k, int m) {
    if (alphabet < 2) throw contract_error("marginalization: alphabet must be >= 2");
    if (k < 0 || m < 0 || m > k) throw contract_error("marginalization: need 0 <= m <= k");
    return StructuredOperator(Marginalization{alphabet, k, m});
  }

  static StructuredOperator branching(int k, int m, ConditionalFamily family) {
    if (m < 0 || m > k) throw contract_error("branching: need 0 <= m <= k");
    if (family.order() != k)
      throw contract_error("branching: family order " + std::to_string(family.order()) +
                           " does not match k = " + std::to_string(k));
    return StructuredOperator(Branching{k, m, std::move(family)});
  }

  static StructuredOperator cycling(int alphabet, int k, int m) {
    if (alphabet < 2) throw contract_error("cycling: alphabet must be >= 2");
    if (k < 0) throw contract_error("cycling: order must be >= 0");
    return StructuredOperator(Cycling{alphabet, k, detail::normalize_rotation(m, k)});
  }

  static StructuredOperator commutation(std::size_t n, std::size_t m) {
    if (n == 0 || m == 0) throw contract_error("commutation: block sizes must be positive");
    return StructuredOperator(Commutation{n, m});
  }

  static StructuredOperator compose(std::vector<StructuredOperator> factors) {
    if (factors.empty()) throw contract_error("compose: empty factor list");
    for (std::size_t i = 0; i + 1 < factors.size(); ++i)
      if (factors[i].input_dim() != factors[i + 1].output_dim())
        throw contract_error("compose: factor " + std::to_string(i) + " expects input dim " +
                             std::to_string(factors[i].input_dim()) + " but factor " +
                             std::to_string(i + 1) + " outputs dim " +
                             std::to_string(factors[i + 1].output_dim()));
    return StructuredOperator(Composition{std::move(factors)});
  }

  std::size_t input_dim() const {
    return std::visit(
        [](const auto& op) -> std::size_t {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, Marginalization>)
            return ipow(static_cast<std::size_t>(op.alphabet), op.k + 1);
          else if constexpr (std::is_same_v<T, Branching>)
            return ipow(static_cast<std::size_t>(op.family.alphabet()), op.k);
          else if constexpr (std::is_same_v<T, Cycling>)
            return ipow(static_cast<std::size_t>(op.alphabet), op.k);
          else if constexpr (std::is_same_v<T, Commutation>)
            return op.m * op.n;
          else
            return op.factors.back().input_dim();
        },
        v_);
  }

  std::size_t output_dim() const {
    return std::visit(
        [](const auto& op) -> std::size_t {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, Marginalization>)
            return ipow(static_cast<std::size_t>(op.alphabet), op.k);
          else if constexpr (std::is_same_v<T, Branching>)
            return ipow(static_cast<std::size_t>(op.family.alphabet()), op.k + 1);
          else if constexpr (std::is_same_v<T, Cycling>)
            return ipow(static_cast<std::size_t>(op.alphabet), op.k);
          else if constexpr (std::is_same_v<T, Commutation>)
            return op.n * op.m;
          else
            return op.factors.front().output_dim();
        },
        v_);
  }

  std::vector<double> apply_raw(std::span<const double> x) const {
    if (x.size() != input_dim())
      throw contract_error("apply: vector dim " + std::to_string(x.size()) +
                           " does not match operator input dim " + std::to_string(input_dim()));
    return std::visit([&](const auto& op) { return apply_impl(op, x); }, v_);
  }

  SimplexVector apply(const SimplexVector& x) const { return SimplexVector(apply_raw(x.span())); }

  DenseMatrix materialize(std::size_t cap = kDenseSizeCap) const {
    check_dense_capacity(output_dim(), input_dim(), cap);
    return std::visit([&](const auto& op) { return materialize_impl(op, cap); }, v_);
  }

 private:
  using Variant = std::variant<Marginalization, Branching, Cycling, Commutation, Composition>;
  explicit StructuredOperator(Variant v) : v_(std::move(v)) {}

  static std::vector<double> apply_impl(const Marginalization& op, std::span<const double> x) {
    const std::size_t n = static_cast<std::size_t>(op.alphabet);
    const std::size_t high = ipow(n, op.m);
    const std::size_t low = ipow(n, op.k - op.m);
    std::vector<double> out(high * low, 0.0);
    for (std::size_t a = 0; a < high; ++a)
      for (std::size_t y = 0; y < n; ++y) {
        const double* in = x.data() + (a * n + y) * low;
        double* o = out.data() + a * low;
        for (std::size_t b = 0; b < low; ++b) o[b] += in[b];
      }
    return out;
  }

  static std::vector<double> apply_impl(const Branching& op, std::span<const double> x) {
    const std::size_t n = static_cast<std::size_t>(op.family.alphabet());
    const std::size_t high = ipow(n, op.m);
    const std::size_t low = ipow(n, op.k - op.m);
    std::vector<double> out(high * n * low);
    for (std::size_t a = 0; a < high; ++a)
      for (std::size_t b = 0; b < low; ++b) {
        const auto q = op.family.member(b * high + a);
        const double mass = x[a * low + b];
        for (std::size_t y = 0; y < n; ++y) out[(a * n + y) * low + b] = q[y] * mass;
      }
    return out;
  }

  static std::vector<double> apply_impl(const Cycling& op, std::span<const double> x) {
    const std::size_t n = static_cast<std::size_t>(op.alphabet);
    const std::size_t lowsz = ipow(n, op.m);
    const std::size_t highsz = ipow(n, op.k - op.m);
    std::vector<double> out(x.size());
    for (std::size_t u = 0; u < highsz; ++u)
      for (std::size_t v = 0; v < lowsz; ++v) out[v * highsz + u] = x[u * lowsz + v];
    return out;
  }

  static std::vector<double> apply_impl(const Commutation& op, std::span<const double> x) {
    std::vector<double> out(x.size());
    for (std::size_t iu = 0; iu < op.m; ++iu)
      for (std::size_t iv = 0; iv < op.n; ++iv) out[iv * op.m + iu] = x[iu * op.n + iv];
    return out;
  }

  static std::vector<double> apply_impl(const Composition& op, std::span<const double> x) {
    std::vector<double> cur(x.begin(), x.end());
    for (std::size_t i = op.factors.size(); i-- > 0;) cur = op.factors[i].apply_raw(cur);
    return cur;
  }

  static DenseMatrix materialize_impl(const Marginalization& op, std::size_t) {
    const std::size_t n = static_cast<std::size_t>(op.alphabet);
    return kron(kron(DenseMatrix::identity(ipow(n, op.m)), detail::ones_row(n)),
                DenseMatrix::identity(ipow(n, op.k - op.m)));
  }

  static DenseMatrix materialize_impl(const Branching& op, std::size_t) {
    const std::size_t n = static_cast<std::size_t>(op.family.alphabet());
    const std::size_t high = ipow(n, op.m);
    const std::size_t low = ipow(n, op.k - op.m);
    DenseMatrix out(high * n * low, high * low);
    for (std::size_t i = 0; i < high; ++i)
      for (std::size_t j = 0; j < low; ++j) {
        const auto q = op.family.member(j * high + i);
        DenseMatrix qcol(n, 1, std::vector<double>(q.begin(), q.end()));
        out.add_in_place(
            kron(kron(detail::unit_diag(high, i), qcol), detail::unit_diag(low, j)));
      }
    return out;
  }

  static DenseMatrix materialize_impl(const Cycling& op, std::size_t) {
    const std::size_t n = static_cast<std::size_t>(op.alphabet);
    return detail::commutation_sum(ipow(n, op.m), ipow(n, op.k - op.m));
  }

  static DenseMatrix materialize_impl(const Commutation& op, std::size_t) {
    return detail::commutation_sum(op.n, op.m);
  }

  static DenseMatrix materialize_impl(const Composition& op, std::size_t cap) {
    DenseMatrix acc = op.factors.front().materialize(cap);
    for (std::size_t i = 1; i < op.factors.size(); ++i) {
      const DenseMatrix next = op.factors[i].materialize(cap);
      check_dense_capacity(acc.rows(), next.cols(), cap);
      acc = matmul(acc, next);
    }
    return acc;
  }

  Variant v_;
};

inline SimplexVector apply_operator(const StructuredOperator& op, const SimplexVector& x) {
  return op.apply(x);
}

inline DenseMatrix materialize(const StructuredOperator& op, std::size_t cap = kDenseSizeCap) {
  return op.materialize(cap);
}

// The (n*m) x (m*n) permutation matrix C_{n,m}: acting on a vector whose
// high block has size m and low block size n, it swaps the blocks.
inline DenseMatrix commutation_matrix(std::size_t n, std::size_t m,
                                      std::size_t cap = kDenseSizeCap) {
  if (n == 0 || m == 0) throw contract_error("commutation_matrix: sizes must be positive");
  check_dense_capacity(n * m, m * n, cap);
  return detail::commutation_sum(n, m);
}

// Maximum elementwise errors of the four operator identities, evaluated on
// dense materializations over every admissible index pair for one
// pseudo-random strictly positive family.
struct IdentityReport {
  double marginalization_cycle = 0.0;    // M = C M C
  double marginalization_exchange = 0.0; // M M reorder, both branches
  double branching_cycle = 0.0;          // B = C B C
  double cycling_power = 0.0;            // C_{nm mod k} = C_n^m

  double max_error() const {
    return std::max(std::max(marginalization_cycle, marginalization_exchange),
                    std::max(branching_cycle, cycling_power));
  }
};

inline IdentityReport check_identities(int alphabet, int k, std::uint64_t seed,
                                       std::size_t cap = kDenseSizeCap) {
  if (k < 1) throw contract_error("check_identities: order must be >= 1");
  const std::size_t n = static_cast<std::size_t>(alphabet);
  check_dense_capacity(ipow(n, k + 1), ipow(n, k + 2), cap);
  const ConditionalFamily family = random_family(alphabet, k, seed);
  IdentityReport report;

  const auto marg = [&](int kk, int m) { return StructuredOperator::marginalization(alphabet, kk, m); };
  const auto cyc = [&](int kk, int m) { return StructuredOperator::cycling(alphabet, kk, m); };

  for (int m = 0; m <= k; ++m)
    for (int nn = 0; nn <= k; ++nn) {
      const DenseMatrix lhs = marg(k, m).materialize(cap);
      const DenseMatrix rhs =
          StructuredOperator::compose({cyc(k, m - nn), marg(k, nn), cyc(k + 1, nn - m)})
              .materialize(cap);
      report.marginalization_cycle = std::max(report.marginalization_cycle, max_abs_diff(lhs, rhs));
    }

  for (int nn = 0; nn <= k; ++nn)
    for (int m = 0; m <= k + 1; ++m) {
      const DenseMatrix lhs =
          StructuredOperator::compose({marg(k, nn), marg(k + 1, m)}).materialize(cap);
      const DenseMatrix rhs =
          nn >= m ? StructuredOperator::compose({marg(k, m), marg(k + 1, nn + 1)}).materialize(cap)
                  : StructuredOperator::compose({marg(k, m - 1), marg(k + 1, nn)}).materialize(cap);
      report.marginalization_exchange =
          std::max(report.marginalization_exchange, max_abs_diff(lhs, rhs));
    }

  for (int m = 0; m <= k; ++m)
    for (int nn = 0; nn <= k; ++nn) {
      const DenseMatrix lhs = StructuredOperator::branching(k, m, family).materialize(cap);
      const DenseMatrix rhs =
          StructuredOperator::compose(
              {cyc(k + 1, m - nn), StructuredOperator::branching(k, nn, family), cyc(k, nn - m)})
              .materialize(cap);
      report.branching_cycle = std::max(report.branching_cycle, max_abs_diff(lhs, rhs));
    }

  for (int nn = -k; nn <= k; ++nn)
    for (int m = 0; m <= 2 * k; ++m) {
      const DenseMatrix lhs = cyc(k, nn * m).materialize(cap);
      DenseMatrix pw = DenseMatrix::identity(ipow(n, k));
      const DenseMatrix base = cyc(k, nn).materialize(cap);
      for (int p = 0; p < m; ++p) pw = matmul(pw, base);
      report.cycling_power = std::max(report.cycling_power, max_abs_diff(lhs, pw));
    }

  return report;
}

}  // namespace markov
