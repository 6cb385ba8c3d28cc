#include "ils/csr_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ils {

SparseMatrixCsr::SparseMatrixCsr(Index n_rows, Index n_cols, std::vector<Index> row_offsets,
                                 std::vector<Index> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (n_rows < 0 || n_cols < 0) throw ContractViolation("CSR: negative dimension");
  if (row_offsets_.size() != static_cast<std::size_t>(n_rows) + 1) {
    throw ContractViolation("CSR: row_offsets must have n_rows + 1 entries");
  }
  if (row_offsets_.front() != 0) throw ContractViolation("CSR: row_offsets[0] must be 0");
  if (col_indices_.size() != values_.size() ||
      row_offsets_.back() != static_cast<Index>(values_.size())) {
    throw ContractViolation("CSR: row_offsets[n_rows], col_indices and values disagree on nnz");
  }
  for (Index i = 0; i < n_rows_; ++i) {
    const Index begin = row_offsets_[i];
    const Index end = row_offsets_[i + 1];
    if (end < begin) throw ContractViolation("CSR: row_offsets must be non-decreasing");
    for (Index k = begin; k < end; ++k) {
      if (col_indices_[k] < 0 || col_indices_[k] >= n_cols_) {
        throw BoundsError("CSR: column index " + std::to_string(col_indices_[k]) +
                          " out of range in row " + std::to_string(i));
      }
      if (k > begin && col_indices_[k] <= col_indices_[k - 1]) {
        throw ContractViolation("CSR: column indices must be strictly increasing in row " +
                                std::to_string(i));
      }
      if (values_[k] == 0.0) {
        throw ContractViolation("CSR: explicit zero stored in row " + std::to_string(i));
      }
    }
  }
}

SparseMatrixCsr SparseMatrixCsr::from_triplets(Index n_rows, Index n_cols,
                                               std::vector<Triplet> entries) {
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols) {
      throw BoundsError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                        ") outside " + std::to_string(n_rows) + " x " + std::to_string(n_cols));
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<Index> offsets(static_cast<std::size_t>(n_rows) + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(entries.size());
  vals.reserve(entries.size());

  std::size_t k = 0;
  while (k < entries.size()) {
    const Index r = entries[k].row;
    const Index c = entries[k].col;
    double sum = 0.0;
    while (k < entries.size() && entries[k].row == r && entries[k].col == c) {
      sum += entries[k].value;
      ++k;
    }
    if (sum != 0.0) {
      cols.push_back(c);
      vals.push_back(sum);
      ++offsets[r + 1];
    }
  }
  for (Index i = 0; i < n_rows; ++i) offsets[i + 1] += offsets[i];
  return SparseMatrixCsr(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrixCsr SparseMatrixCsr::identity(Index n) { return rectangular_identity(n, n, 1.0); }

SparseMatrixCsr SparseMatrixCsr::rectangular_identity(Index n_rows, Index n_cols,
                                                      double diagonal_value) {
  const Index diag = std::min(n_rows, n_cols);
  std::vector<Index> offsets(static_cast<std::size_t>(n_rows) + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  if (diagonal_value != 0.0) {
    cols.reserve(diag);
    vals.reserve(diag);
    for (Index i = 0; i < n_rows; ++i) {
      offsets[i + 1] = offsets[i];
      if (i < diag) {
        cols.push_back(i);
        vals.push_back(diagonal_value);
        ++offsets[i + 1];
      }
    }
  }
  return SparseMatrixCsr(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

double SparseMatrixCsr::at(Index row, Index col) const {
  if (row < 0 || row >= n_rows_ || col < 0 || col >= n_cols_) {
    throw BoundsError("CSR::at: index out of range");
  }
  const auto first = col_indices_.begin() + row_offsets_[row];
  const auto last = col_indices_.begin() + row_offsets_[row + 1];
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

std::vector<Triplet> SparseMatrixCsr::to_triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (Index i = 0; i < n_rows_; ++i) {
    for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      out.push_back({i, col_indices_[k], values_[k]});
    }
  }
  return out;
}

SparseMatrixCsr SparseMatrixCsr::row_block(Index first, Index last) const {
  if (first < 0 || last > n_rows_ || first > last) {
    throw ContractViolation("CSR::row_block: invalid row range");
  }
  const Index base = row_offsets_[first];
  std::vector<Index> offsets(static_cast<std::size_t>(last - first) + 1);
  for (Index i = first; i <= last; ++i) offsets[i - first] = row_offsets_[i] - base;
  std::vector<Index> cols(col_indices_.begin() + base, col_indices_.begin() + row_offsets_[last]);
  std::vector<double> vals(values_.begin() + base, values_.begin() + row_offsets_[last]);
  return SparseMatrixCsr(last - first, n_cols_, std::move(offsets), std::move(cols),
                         std::move(vals));
}

SparseMatrixCsr SparseMatrixCsr::scaled(double factor) const {
  if (factor == 0.0) return SparseMatrixCsr::rectangular_identity(n_rows_, n_cols_, 0.0);
  std::vector<double> vals = values_;
  for (double& v : vals) v *= factor;
  return SparseMatrixCsr(n_rows_, n_cols_, row_offsets_, col_indices_, std::move(vals));
}

void spmv(const SparseMatrixCsr& a, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), static_cast<std::size_t>(a.n_cols()), "spmv: x");
  require_same_size(y.size(), static_cast<std::size_t>(a.n_rows()), "spmv: y");
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (Index i = 0; i < a.n_rows(); ++i) {
    double sum = 0.0;
    for (Index k = offsets[i]; k < offsets[i + 1]; ++k) sum += vals[k] * x[cols[k]];
    y[i] = sum;
  }
}

Vector spmv(const SparseMatrixCsr& a, std::span<const double> x) {
  Vector y(static_cast<std::size_t>(a.n_rows()));
  spmv(a, x, y);
  return y;
}

void spmv_transpose(const SparseMatrixCsr& a, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), static_cast<std::size_t>(a.n_rows()), "spmv_transpose: x");
  require_same_size(y.size(), static_cast<std::size_t>(a.n_cols()), "spmv_transpose: y");
  std::fill(y.begin(), y.end(), 0.0);
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (Index i = 0; i < a.n_rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (Index k = offsets[i]; k < offsets[i + 1]; ++k) y[cols[k]] += vals[k] * xi;
  }
}

Vector spmv_transpose(const SparseMatrixCsr& a, std::span<const double> x) {
  Vector y(static_cast<std::size_t>(a.n_cols()));
  spmv_transpose(a, x, y);
  return y;
}

double one_norm(const SparseMatrixCsr& a) {
  Vector col_sums(static_cast<std::size_t>(a.n_cols()), 0.0);
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (std::size_t k = 0; k < a.nnz(); ++k) col_sums[cols[k]] += std::fabs(vals[k]);
  double best = 0.0;
  for (double s : col_sums) best = std::max(best, s);
  return best;
}

SparseMatrixCsr normalize_to_unit_one_norm(const SparseMatrixCsr& a) {
  const double norm = one_norm(a);
  if (norm == 0.0) throw DegenerateInput("normalize_to_unit_one_norm: matrix is all zero");
  std::vector<double> vals(a.values().begin(), a.values().end());
  // Divide rather than multiply by the reciprocal: each entry is then correctly rounded.
  for (double& v : vals) v /= norm;
  return SparseMatrixCsr(a.n_rows(), a.n_cols(),
                         std::vector<Index>(a.row_offsets().begin(), a.row_offsets().end()),
                         std::vector<Index>(a.col_indices().begin(), a.col_indices().end()),
                         std::move(vals));
}

}  // namespace ils
