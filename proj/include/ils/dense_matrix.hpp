#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ils/csr_matrix.hpp"
#include "ils/vector_ops.hpp"

namespace ils {

/// Row-major dense real matrix.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t n_rows, std::size_t n_cols, double fill = 0.0)
      : n_rows_(n_rows), n_cols_(n_cols), values_(n_rows * n_cols, fill) {}
  DenseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<double> row_major);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_sparse(const SparseMatrixCsr& a);

  [[nodiscard]] std::size_t n_rows() const noexcept { return n_rows_; }
  [[nodiscard]] std::size_t n_cols() const noexcept { return n_cols_; }
  [[nodiscard]] bool is_square() const noexcept { return n_rows_ == n_cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * n_cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return values_[i * n_cols_ + j];
  }

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * n_cols_, n_cols_};
  }

  [[nodiscard]] DenseMatrix transposed() const;
  [[nodiscard]] SparseMatrixCsr to_sparse() const;

private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<double> values_;
};

[[nodiscard]] Vector matvec(const DenseMatrix& a, std::span<const double> x);
void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y);
[[nodiscard]] Vector matvec_transpose(const DenseMatrix& a, std::span<const double> x);
void matvec_transpose(const DenseMatrix& a, std::span<const double> x, std::span<double> y);

[[nodiscard]] DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
/// A^T B without forming A^T.
[[nodiscard]] DenseMatrix multiply_transpose_left(const DenseMatrix& a, const DenseMatrix& b);
/// Dense Gram matrix A^T A of a sparse matrix.
[[nodiscard]] DenseMatrix gram(const SparseMatrixCsr& a);
[[nodiscard]] DenseMatrix gram(const DenseMatrix& a);

/// alpha * A + beta * B
[[nodiscard]] DenseMatrix combine(double alpha, const DenseMatrix& a, double beta,
                                  const DenseMatrix& b);
void add_to_diagonal(DenseMatrix& a, double shift);

[[nodiscard]] double frobenius_norm(const DenseMatrix& a);
[[nodiscard]] double one_norm(const DenseMatrix& a);
[[nodiscard]] bool is_symmetric(const DenseMatrix& a, double rel_tolerance);

struct CholeskyFactor {
  std::size_t n = 0;
  DenseMatrix lower;  // L with M = L L^T; strictly upper part is zero
};

/// Outcome of a Cholesky attempt. A failed pivot is an ordinary result (the
/// factorization doubles as the SPD test), not an exception.
struct CholeskyOutcome {
  std::optional<CholeskyFactor> factor;
  std::size_t failed_pivot = 0;  // valid when !factor

  [[nodiscard]] bool is_spd() const noexcept { return factor.has_value(); }
};

/// Dense Cholesky. Pivots at or below n * eps * max|diag| count as failure.
/// Throws ContractViolation when M is not square or not symmetric to 1e-12.
[[nodiscard]] CholeskyOutcome dense_cholesky(const DenseMatrix& m);

[[nodiscard]] Vector cholesky_solve(const CholeskyFactor& f, std::span<const double> rhs);
void cholesky_solve_in_place(const CholeskyFactor& f, std::span<double> rhs);

/// Solves L y = b in place (lower triangular, non-unit diagonal).
void forward_substitute(const DenseMatrix& lower, std::span<double> b);
/// Solves L^T y = b in place.
void backward_substitute_transpose(const DenseMatrix& lower, std::span<double> b);

struct LuFactor {
  DenseMatrix lu;
  std::vector<std::size_t> pivots;
};

/// Partial-pivoting LU; throws DegenerateInput on an exactly singular pivot column.
[[nodiscard]] LuFactor lu_factor(const DenseMatrix& m);
[[nodiscard]] Vector lu_solve(const LuFactor& f, std::span<const double> rhs);

}  // namespace ils
