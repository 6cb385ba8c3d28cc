#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <variant>

#include "ils/csr_matrix.hpp"
#include "ils/dense_matrix.hpp"
#include "ils/vector_ops.hpp"

namespace ils {

/// Anything that maps a vector of length n_cols to one of length n_rows.
///
/// The callbacks write into a caller-provided output span; they must not
/// retain references to either span. Operators are immutable and may be
/// applied concurrently as long as the captured state is immutable.
class LinearOperator {
public:
  using ApplyFn = std::function<void(std::span<const double>, std::span<double>)>;

  LinearOperator() = default;
  LinearOperator(std::size_t n_rows, std::size_t n_cols, ApplyFn apply,
                 ApplyFn apply_transpose = {})
      : n_rows_(n_rows),
        n_cols_(n_cols),
        apply_(std::move(apply)),
        apply_transpose_(std::move(apply_transpose)) {}

  static LinearOperator identity(std::size_t n);
  /// Keeps its own copy of the matrix.
  static LinearOperator from_sparse(SparseMatrixCsr a);
  static LinearOperator from_dense(DenseMatrix a);

  [[nodiscard]] std::size_t n_rows() const noexcept { return n_rows_; }
  [[nodiscard]] std::size_t n_cols() const noexcept { return n_cols_; }
  [[nodiscard]] bool has_transpose() const noexcept { return static_cast<bool>(apply_transpose_); }

  void apply(std::span<const double> x, std::span<double> y) const {
    require_same_size(x.size(), n_cols_, "LinearOperator::apply: x");
    require_same_size(y.size(), n_rows_, "LinearOperator::apply: y");
    apply_(x, y);
  }

  [[nodiscard]] Vector apply(std::span<const double> x) const {
    Vector y(n_rows_);
    apply(x, y);
    return y;
  }

  void apply_transpose(std::span<const double> x, std::span<double> y) const;

private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  ApplyFn apply_;
  ApplyFn apply_transpose_;
};

/// Dense materialization by applying the operator to unit vectors.
[[nodiscard]] DenseMatrix to_dense(const LinearOperator& op);

/// A matrix stored either sparse (CSR) or dense. The ILS blocks A1 and A2 use
/// this so that fully dense data such as the Hilbert matrix is not forced into
/// CSR storage.
class StoredMatrix {
public:
  StoredMatrix() = default;
  StoredMatrix(SparseMatrixCsr a) : storage_(std::move(a)) {}  // NOLINT(implicit)
  StoredMatrix(DenseMatrix a) : storage_(std::move(a)) {}      // NOLINT(implicit)

  [[nodiscard]] std::size_t n_rows() const noexcept;
  [[nodiscard]] std::size_t n_cols() const noexcept;
  [[nodiscard]] bool is_sparse() const noexcept {
    return std::holds_alternative<SparseMatrixCsr>(storage_);
  }
  [[nodiscard]] const SparseMatrixCsr& sparse() const { return std::get<SparseMatrixCsr>(storage_); }
  [[nodiscard]] const DenseMatrix& dense() const { return std::get<DenseMatrix>(storage_); }

  void apply(std::span<const double> x, std::span<double> y) const;
  void apply_transpose(std::span<const double> x, std::span<double> y) const;
  [[nodiscard]] Vector apply(std::span<const double> x) const;
  [[nodiscard]] Vector apply_transpose(std::span<const double> x) const;

  [[nodiscard]] double one_norm() const;
  /// Number of stored entries (all entries for dense storage).
  [[nodiscard]] std::size_t stored_entries() const noexcept;
  [[nodiscard]] DenseMatrix to_dense() const;
  [[nodiscard]] SparseMatrixCsr to_sparse() const;
  [[nodiscard]] DenseMatrix gram() const;

private:
  std::variant<SparseMatrixCsr, DenseMatrix> storage_;
};

}  // namespace ils
