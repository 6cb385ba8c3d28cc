#pragma once

#include <cstddef>
#include <vector>

#include "ils/dense_matrix.hpp"

namespace ils {

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column k belongs to values[k]
  std::size_t sweeps = 0;
  double off_norm = 0.0;       // off-diagonal Frobenius norm at exit
  bool converged = false;      // false when the sweep cap was hit
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// 1e-12 * ||S||_F or `max_sweeps` sweeps have run. Requires S symmetric to
/// 1e-12 (ContractViolation otherwise).
[[nodiscard]] SymmetricEigen symmetric_eigen(const DenseMatrix& s, std::size_t max_sweeps = 100);

/// Eigenpairs of C^{-1} B for symmetric B and SPD C, via C = L L^T and the
/// symmetric matrix L^{-1} B L^{-T}. Eigenvectors are returned in the original
/// coordinates (y = L^{-T} w). Throws ContractViolation when C is not SPD.
[[nodiscard]] SymmetricEigen generalized_sym_eigen(const DenseMatrix& b, const DenseMatrix& c,
                                                   std::size_t max_sweeps = 100);

/// Eigenvalues only, ascending.
[[nodiscard]] std::vector<double> generalized_sym_eigs(const DenseMatrix& b, const DenseMatrix& c);

}  // namespace ils
