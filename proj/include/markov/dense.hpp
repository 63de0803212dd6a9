#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "markov/errors.hpp"

namespace markov {

// Default cap on dense materializations, in matrix entries. Dense forms are
// test oracles; anything larger must go through the matrix-free paths.
inline constexpr std::size_t kDenseSizeCap = std::size_t{1} << 20;

inline void check_dense_capacity(std::size_t rows, std::size_t cols,
                                 std::size_t cap = kDenseSizeCap) {
  if (rows != 0 && cols > cap / rows)
    throw capacity_error("dense matrix of " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " entries exceeds cap " + std::to_string(cap));
}

// Row-major dense matrix with just the operations the library needs.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows_ * cols_)
      throw contract_error("dense matrix entry count does not match rows*cols");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  const std::vector<double>& entries() const { return entries_; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = at(i, j);
    return c;
  }

  void add_in_place(const DenseMatrix& other) {
    if (other.rows_ != rows_ || other.cols_ != cols_)
      throw contract_error("matrix addition: shape mismatch");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw contract_error("matmul: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double av = a.at(i, k);
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c.at(i, j) += av * b.at(k, j);
    }
  return c;
}

inline std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw contract_error("matvec: dimension mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a.at(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

inline DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double av = a.at(i, j);
      if (av == 0.0) continue;
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          out.at(i * b.rows() + p, j * b.cols() + q) = av * b.at(p, q);
    }
  return out;
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw contract_error("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

inline bool is_column_stochastic(const DenseMatrix& m, double tol = 1e-9) {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (m.at(i, j) < -tol) return false;
      sum += m.at(i, j);
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

// Gaussian elimination with partial pivoting. Returns nullopt when a pivot
// falls below the singularity threshold.
inline std::optional<std::vector<double>> solve_linear(DenseMatrix a, std::vector<double> b,
                                                       double pivot_tol = 1e-11) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw contract_error("solve_linear: shape mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a.at(r, col)) > std::abs(a.at(pivot, col))) pivot = r;
    if (std::abs(a.at(pivot, col)) < pivot_tol) return std::nullopt;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a.at(pivot, j), a.at(col, j));
      std::swap(b[pivot], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a.at(r, col) / a.at(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a.at(r, j) -= f * a.at(col, j);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= a.at(i, j) * x[j];
    x[i] = acc / a.at(i, i);
  }
  return x;
}

// Strong connectivity of the directed graph whose edges are the entries of q
// above the threshold. Strong connectivity is invariant under transposition,
// so the column-versus-row orientation of q does not matter.
inline bool strongly_connected(const DenseMatrix& q, double threshold = 1e-12) {
  const std::size_t n = q.rows();
  if (q.cols() != n) throw contract_error("strongly_connected: matrix must be square");
  if (n == 0) return false;
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w = 0; w < n; ++w) {
        const double e = transpose ? q.at(v, w) : q.at(w, v);
        if (!seen[w] && e > threshold) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == n;
  };
  return reaches_all(false) && reaches_all(true);
}

}  // namespace markov
