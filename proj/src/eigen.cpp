#include "ils/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ils {

namespace {

double off_diagonal_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    for (std::size_t j = 0; j < a.n_cols(); ++j) {
      if (i != j) s += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(s);
}

}  // namespace

SymmetricEigen symmetric_eigen(const DenseMatrix& s, std::size_t max_sweeps) {
  if (!is_symmetric(s, 1e-12)) throw ContractViolation("symmetric_eigen: matrix is not symmetric");
  const std::size_t n = s.n_rows();
  DenseMatrix a = s;
  DenseMatrix v = DenseMatrix::identity(n);
  const double target = 1e-12 * frobenius_norm(s);

  SymmetricEigen out;
  double off = off_diagonal_norm(a);
  while (off > target && out.sweeps < max_sweeps) {
    ++out.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::fabs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
    off = off_diagonal_norm(a);
  }
  out.off_norm = off;
  out.converged = off <= target;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

SymmetricEigen generalized_sym_eigen(const DenseMatrix& b, const DenseMatrix& c,
                                     std::size_t max_sweeps) {
  if (!b.is_square() || !c.is_square() || b.n_rows() != c.n_rows()) {
    throw ContractViolation("generalized_sym_eigen: B and C must be square and the same size");
  }
  if (!is_symmetric(b, 1e-12)) {
    throw ContractViolation("generalized_sym_eigen: B is not symmetric");
  }
  auto chol = dense_cholesky(c);
  if (!chol.is_spd()) {
    throw ContractViolation("generalized_sym_eigen: C is not SPD (pivot " +
                            std::to_string(chol.failed_pivot) + ")");
  }
  const DenseMatrix& l = chol.factor->lower;
  const std::size_t n = b.n_rows();

  // X = L^{-1} B, column by column; then S = L^{-1} X^T = L^{-1} B L^{-T}.
  DenseMatrix x(n, n);
  Vector col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = b(i, j);
    forward_substitute(l, col);
    for (std::size_t i = 0; i < n; ++i) x(i, j) = col[i];
  }
  DenseMatrix s(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = x(j, i);
    forward_substitute(l, col);
    for (std::size_t i = 0; i < n; ++i) s(i, j) = col[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (s(i, j) + s(j, i));
      s(i, j) = avg;
      s(j, i) = avg;
    }
  }

  SymmetricEigen eig = symmetric_eigen(s, max_sweeps);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) col[i] = eig.vectors(i, k);
    backward_substitute_transpose(l, col);
    for (std::size_t i = 0; i < n; ++i) eig.vectors(i, k) = col[i];
  }
  return eig;
}

std::vector<double> generalized_sym_eigs(const DenseMatrix& b, const DenseMatrix& c) {
  return generalized_sym_eigen(b, c).values;
}

}  // namespace ils
