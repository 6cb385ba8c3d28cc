#include "ils/linear_operator.hpp"

#include <algorithm>

namespace ils {

LinearOperator LinearOperator::identity(std::size_t n) {
  auto copy = [](std::span<const double> x, std::span<double> y) {
    std::copy(x.begin(), x.end(), y.begin());
  };
  return {n, n, copy, copy};
}

LinearOperator LinearOperator::from_sparse(SparseMatrixCsr a) {
  auto m = std::make_shared<const SparseMatrixCsr>(std::move(a));
  return {static_cast<std::size_t>(m->n_rows()), static_cast<std::size_t>(m->n_cols()),
          [m](std::span<const double> x, std::span<double> y) { spmv(*m, x, y); },
          [m](std::span<const double> x, std::span<double> y) { spmv_transpose(*m, x, y); }};
}

LinearOperator LinearOperator::from_dense(DenseMatrix a) {
  auto m = std::make_shared<const DenseMatrix>(std::move(a));
  return {m->n_rows(), m->n_cols(),
          [m](std::span<const double> x, std::span<double> y) { matvec(*m, x, y); },
          [m](std::span<const double> x, std::span<double> y) { matvec_transpose(*m, x, y); }};
}

void LinearOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  if (!apply_transpose_) throw ContractViolation("LinearOperator: no transpose available");
  require_same_size(x.size(), n_rows_, "LinearOperator::apply_transpose: x");
  require_same_size(y.size(), n_cols_, "LinearOperator::apply_transpose: y");
  apply_transpose_(x, y);
}

DenseMatrix to_dense(const LinearOperator& op) {
  DenseMatrix m(op.n_rows(), op.n_cols());
  Vector e(op.n_cols(), 0.0);
  Vector col(op.n_rows());
  for (std::size_t j = 0; j < op.n_cols(); ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < op.n_rows(); ++i) m(i, j) = col[i];
  }
  return m;
}

std::size_t StoredMatrix::n_rows() const noexcept {
  return is_sparse() ? static_cast<std::size_t>(sparse().n_rows()) : dense().n_rows();
}

std::size_t StoredMatrix::n_cols() const noexcept {
  return is_sparse() ? static_cast<std::size_t>(sparse().n_cols()) : dense().n_cols();
}

void StoredMatrix::apply(std::span<const double> x, std::span<double> y) const {
  if (is_sparse()) {
    spmv(sparse(), x, y);
  } else {
    matvec(dense(), x, y);
  }
}

void StoredMatrix::apply_transpose(std::span<const double> x, std::span<double> y) const {
  if (is_sparse()) {
    spmv_transpose(sparse(), x, y);
  } else {
    matvec_transpose(dense(), x, y);
  }
}

Vector StoredMatrix::apply(std::span<const double> x) const {
  Vector y(n_rows());
  apply(x, y);
  return y;
}

Vector StoredMatrix::apply_transpose(std::span<const double> x) const {
  Vector y(n_cols());
  apply_transpose(x, y);
  return y;
}

double StoredMatrix::one_norm() const {
  return is_sparse() ? ils::one_norm(sparse()) : ils::one_norm(dense());
}

std::size_t StoredMatrix::stored_entries() const noexcept {
  return is_sparse() ? sparse().nnz() : dense().n_rows() * dense().n_cols();
}

DenseMatrix StoredMatrix::to_dense() const {
  return is_sparse() ? DenseMatrix::from_sparse(sparse()) : dense();
}

SparseMatrixCsr StoredMatrix::to_sparse() const {
  return is_sparse() ? sparse() : dense().to_sparse();
}

DenseMatrix StoredMatrix::gram() const {
  return is_sparse() ? ils::gram(sparse()) : ils::gram(dense());
}

}  // namespace ils
