#include "ils/dense_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace ils {

DenseMatrix::DenseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<double> row_major)
    : n_rows_(n_rows), n_cols_(n_cols), values_(std::move(row_major)) {
  if (values_.size() != n_rows_ * n_cols_) {
    throw ContractViolation("DenseMatrix: value count does not match n_rows * n_cols");
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_sparse(const SparseMatrixCsr& a) {
  DenseMatrix m(static_cast<std::size_t>(a.n_rows()), static_cast<std::size_t>(a.n_cols()));
  for (const auto& t : a.to_triplets()) {
    m(static_cast<std::size_t>(t.row), static_cast<std::size_t>(t.col)) = t.value;
  }
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(n_cols_, n_rows_);
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (std::size_t j = 0; j < n_cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

SparseMatrixCsr DenseMatrix::to_sparse() const {
  std::vector<Triplet> entries;
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (std::size_t j = 0; j < n_cols_; ++j) {
      const double v = (*this)(i, j);
      if (v != 0.0) entries.push_back({static_cast<Index>(i), static_cast<Index>(j), v});
    }
  }
  return SparseMatrixCsr::from_triplets(static_cast<Index>(n_rows_), static_cast<Index>(n_cols_),
                                        std::move(entries));
}

void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), a.n_cols(), "matvec: x");
  require_same_size(y.size(), a.n_rows(), "matvec: y");
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    const auto r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  Vector y(a.n_rows());
  matvec(a, x, y);
  return y;
}

void matvec_transpose(const DenseMatrix& a, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), a.n_rows(), "matvec_transpose: x");
  require_same_size(y.size(), a.n_cols(), "matvec_transpose: y");
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    const auto r = a.row(i);
    const double xi = x[i];
    for (std::size_t j = 0; j < r.size(); ++j) y[j] += r[j] * xi;
  }
}

Vector matvec_transpose(const DenseMatrix& a, std::span<const double> x) {
  Vector y(a.n_cols());
  matvec_transpose(a, x, y);
  return y;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_size(a.n_cols(), b.n_rows(), "multiply");
  DenseMatrix c(a.n_rows(), b.n_cols());
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    for (std::size_t k = 0; k < a.n_cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.n_cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

DenseMatrix multiply_transpose_left(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_size(a.n_rows(), b.n_rows(), "multiply_transpose_left");
  DenseMatrix c(a.n_cols(), b.n_cols());
  for (std::size_t k = 0; k < a.n_rows(); ++k) {
    for (std::size_t i = 0; i < a.n_cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.n_cols(); ++j) c(i, j) += aki * b(k, j);
    }
  }
  return c;
}

DenseMatrix gram(const SparseMatrixCsr& a) {
  const auto n = static_cast<std::size_t>(a.n_cols());
  DenseMatrix g(n, n);
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  // Sum of outer products of the sparse rows.
  for (Index r = 0; r < a.n_rows(); ++r) {
    for (Index k = offsets[r]; k < offsets[r + 1]; ++k) {
      for (Index l = offsets[r]; l < offsets[r + 1]; ++l) {
        g(static_cast<std::size_t>(cols[k]), static_cast<std::size_t>(cols[l])) +=
            vals[k] * vals[l];
      }
    }
  }
  return g;
}

DenseMatrix gram(const DenseMatrix& a) { return multiply_transpose_left(a, a); }

DenseMatrix combine(double alpha, const DenseMatrix& a, double beta, const DenseMatrix& b) {
  require_same_size(a.n_rows(), b.n_rows(), "combine: rows");
  require_same_size(a.n_cols(), b.n_cols(), "combine: cols");
  DenseMatrix c(a.n_rows(), a.n_cols());
  const auto av = a.values();
  const auto bv = b.values();
  auto cv = c.values();
  for (std::size_t k = 0; k < cv.size(); ++k) cv[k] = alpha * av[k] + beta * bv[k];
  return c;
}

void add_to_diagonal(DenseMatrix& a, double shift) {
  const std::size_t n = std::min(a.n_rows(), a.n_cols());
  for (std::size_t i = 0; i < n; ++i) a(i, i) += shift;
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.values()); }

double one_norm(const DenseMatrix& a) {
  Vector sums(a.n_cols(), 0.0);
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    for (std::size_t j = 0; j < a.n_cols(); ++j) sums[j] += std::fabs(a(i, j));
  }
  return sums.empty() ? 0.0 : *std::max_element(sums.begin(), sums.end());
}

bool is_symmetric(const DenseMatrix& a, double rel_tolerance) {
  if (!a.is_square()) return false;
  double max_abs = 0.0;
  for (double v : a.values()) max_abs = std::max(max_abs, std::fabs(v));
  const double tol = rel_tolerance * max_abs;
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    for (std::size_t j = i + 1; j < a.n_cols(); ++j) {
      if (std::fabs(a(i, j) - a(j, i)) > tol) return false;
    }
  }
  return true;
}

CholeskyOutcome dense_cholesky(const DenseMatrix& m) {
  if (!m.is_square()) throw ContractViolation("dense_cholesky: matrix is not square");
  if (!is_symmetric(m, 1e-12)) throw ContractViolation("dense_cholesky: matrix is not symmetric");

  const std::size_t n = m.n_rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::fabs(m(i, i)));
  const double pivot_floor =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_diag;

  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || d <= pivot_floor) {
      CholeskyOutcome out;
      out.failed_pivot = j;
      return out;
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      const auto li = l.row(i);
      const auto lj = l.row(j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      l(i, j) = s / ljj;
    }
  }
  CholeskyOutcome out;
  out.factor = CholeskyFactor{n, std::move(l)};
  return out;
}

void forward_substitute(const DenseMatrix& lower, std::span<double> b) {
  const std::size_t n = lower.n_rows();
  require_same_size(b.size(), n, "forward_substitute");
  for (std::size_t i = 0; i < n; ++i) {
    const auto li = lower.row(i);
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * b[k];
    b[i] = s / li[i];
  }
}

void backward_substitute_transpose(const DenseMatrix& lower, std::span<double> b) {
  const std::size_t n = lower.n_rows();
  require_same_size(b.size(), n, "backward_substitute_transpose");
  for (std::size_t ii = n; ii-- > 0;) {
    b[ii] /= lower(ii, ii);
    const double bi = b[ii];
    const auto li = lower.row(ii);
    for (std::size_t k = 0; k < ii; ++k) b[k] -= li[k] * bi;
  }
}

void cholesky_solve_in_place(const CholeskyFactor& f, std::span<double> rhs) {
  require_same_size(rhs.size(), f.n, "cholesky_solve");
  forward_substitute(f.lower, rhs);
  backward_substitute_transpose(f.lower, rhs);
}

Vector cholesky_solve(const CholeskyFactor& f, std::span<const double> rhs) {
  Vector z(rhs.begin(), rhs.end());
  cholesky_solve_in_place(f, z);
  return z;
}

LuFactor lu_factor(const DenseMatrix& m) {
  if (!m.is_square()) throw ContractViolation("lu_factor: matrix is not square");
  const std::size_t n = m.n_rows();
  LuFactor f{m, std::vector<std::size_t>(n)};
  DenseMatrix& a = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::fabs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::fabs(a(i, k)) > best) {
        best = std::fabs(a(i, k));
        piv = i;
      }
    }
    if (best == 0.0) throw DegenerateInput("lu_factor: singular at column " + std::to_string(k));
    f.pivots[k] = piv;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
    }
    const double inv = 1.0 / a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double lik = a(i, k) * inv;
      a(i, k) = lik;
      if (lik == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= lik * a(k, j);
    }
  }
  return f;
}

Vector lu_solve(const LuFactor& f, std::span<const double> rhs) {
  const std::size_t n = f.lu.n_rows();
  require_same_size(rhs.size(), n, "lu_solve");
  Vector x(rhs.begin(), rhs.end());
  for (std::size_t k = 0; k < n; ++k) std::swap(x[k], x[f.pivots[k]]);
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= f.lu(i, k) * x[k];
    x[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= f.lu(ii, k) * x[k];
    x[ii] = s / f.lu(ii, ii);
  }
  return x;
}

}  // namespace ils
