#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ils/linear_operator.hpp"
#include "ils/vector_ops.hpp"

namespace ils {

struct CgConfig {
  double rel_tolerance = 1e-3;
  std::size_t max_iterations = 1000;
  /// Called with (k, x_k) after each step when set.
  std::function<void(std::size_t, std::span<const double>)> on_iterate;

  void validate() const;
};

struct FgmresConfig {
  double rel_tolerance = 1e-8;
  std::size_t max_iterations = 2000;
  /// Cycle length; std::nullopt means unrestarted.
  std::optional<std::size_t> restart;
  /// How many times a failed true-residual confirmation may resume iterating.
  std::size_t max_resumptions = 3;

  void validate() const;
};

/// Outcome of one iterative solve.
///
/// res_history has iterations + 1 entries; entry 0 is the initial relative
/// residual and the last entry equals final_res.
struct SolveReport {
  std::size_t iterations = 0;
  double wall_seconds = 0.0;
  double final_res = 0.0;
  std::vector<double> res_history;
  bool converged = false;
  std::optional<double> err;
  /// FGMRES only: number of Arnoldi cycles after the first.
  std::size_t cycles = 0;
  std::vector<std::string> diagnostics;
};

struct SolveResult {
  Vector x;
  SolveReport report;
};

/// Conjugate gradients for an SPD operator, relative residual measured
/// against ||rhs||_2. A zero right-hand side returns x = 0 after 0 iterations.
/// If max_iterations is reached the iterate with the smallest recurrence
/// residual is returned with converged = false. Throws IndefiniteOperator when
/// p^T A p <= 0.
[[nodiscard]] SolveResult cg_solve(const LinearOperator& op, std::span<const double> rhs,
                                   std::span<const double> x0, const CgConfig& cfg);

/// z = M^{-1} r. May change between calls (flexible preconditioning).
using RightPreconditioner = std::function<void(std::span<const double>, std::span<double>)>;

/// Right-preconditioned flexible GMRES with modified Gram-Schmidt.
///
/// The per-iteration residual is the least-squares estimate; when it declares
/// convergence the true residual ||rhs - A x|| / ||rhs|| is recomputed and must
/// also meet the tolerance, otherwise iteration resumes from the current x
/// (at most cfg.max_resumptions times). An empty preconditioner means identity.
/// Throws NumericalFailure on NaN/Inf in the basis.
[[nodiscard]] SolveResult fgmres_solve(const LinearOperator& op,
                                       const RightPreconditioner& precond,
                                       std::span<const double> rhs, std::span<const double> x0,
                                       const FgmresConfig& cfg);

}  // namespace ils
