#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ils/vector_ops.hpp"

namespace ils {

using Index = std::int64_t;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed-sparse-row real matrix.
///
/// Invariants (enforced at construction): row offsets start at 0 and are
/// non-decreasing, column indices are strictly increasing inside a row and
/// below n_cols, and no explicit zeros are stored.
class SparseMatrixCsr {
public:
  SparseMatrixCsr() = default;

  /// Takes ownership of raw CSR arrays after validating every invariant.
  SparseMatrixCsr(Index n_rows, Index n_cols, std::vector<Index> row_offsets,
                  std::vector<Index> col_indices, std::vector<double> values);

  /// Builds from unordered coordinates; duplicates are summed and entries that
  /// sum to exactly zero are dropped.
  static SparseMatrixCsr from_triplets(Index n_rows, Index n_cols, std::vector<Triplet> entries);

  static SparseMatrixCsr identity(Index n);

  /// q x n matrix with `diagonal_value` at (i, i) for i < min(q, n); an empty
  /// pattern when diagonal_value is zero.
  static SparseMatrixCsr rectangular_identity(Index n_rows, Index n_cols, double diagonal_value);

  [[nodiscard]] Index n_rows() const noexcept { return n_rows_; }
  [[nodiscard]] Index n_cols() const noexcept { return n_cols_; }
  [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }

  [[nodiscard]] std::span<const Index> row_offsets() const noexcept { return row_offsets_; }
  [[nodiscard]] std::span<const Index> col_indices() const noexcept { return col_indices_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  /// Entry lookup by binary search within the row; zero when not stored.
  [[nodiscard]] double at(Index row, Index col) const;

  [[nodiscard]] std::vector<Triplet> to_triplets() const;

  /// Rows [first, last) as a new (last - first) x n_cols matrix.
  [[nodiscard]] SparseMatrixCsr row_block(Index first, Index last) const;

  [[nodiscard]] SparseMatrixCsr scaled(double factor) const;

private:
  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

/// y = A x
[[nodiscard]] Vector spmv(const SparseMatrixCsr& a, std::span<const double> x);
void spmv(const SparseMatrixCsr& a, std::span<const double> x, std::span<double> y);

/// y = A^T x, without forming A^T.
[[nodiscard]] Vector spmv_transpose(const SparseMatrixCsr& a, std::span<const double> x);
void spmv_transpose(const SparseMatrixCsr& a, std::span<const double> x, std::span<double> y);

/// Maximum absolute column sum.
[[nodiscard]] double one_norm(const SparseMatrixCsr& a);

/// A / ||A||_1. Throws DegenerateInput for an all-zero matrix.
[[nodiscard]] SparseMatrixCsr normalize_to_unit_one_norm(const SparseMatrixCsr& a);

}  // namespace ils
