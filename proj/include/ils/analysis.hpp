#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ils/ils_problem.hpp"
#include "ils/krylov.hpp"
#include "ils/preconditioners.hpp"

namespace ils {

/// Largest n accepted by the dense diagnostics below.
inline constexpr std::size_t kAnalysisCap = 2000;

/// SPD/SPSD status of the matrices appearing in the convergence conditions
/// of the IBS stationary iterations, plus spectral condition numbers of P
/// and P_hat.
struct ConditionReport {
  bool normal_spd = false;              // P - A2^T A2
  bool phat_minus_a2_spd = false;       // P_hat - A2^T A2
  bool ibs13_matrix_spd = false;        // 2 P_hat - P - A2^T A2
  bool ibs24_matrix_spd = false;        // 2 P_hat - P + A2^T A2
  bool phat_minus_p_spsd = false;       // P_hat - P
  double kappa_p = 0.0;                 // +inf when P is not SPD
  double kappa_phat = 0.0;

  /// Sufficient conditions for rho(G1), rho(G3) < 1.
  [[nodiscard]] bool ibs13_converges() const noexcept {
    return ibs13_matrix_spd && phat_minus_a2_spd;
  }
  /// Sufficient condition for rho(G2), rho(G4) < 1.
  [[nodiscard]] bool ibs24_converges() const noexcept { return ibs24_matrix_spd; }
  /// The standing assumption plus P_hat - P SPSD: every IBS iteration converges.
  [[nodiscard]] bool all_ibs_converge() const noexcept { return normal_spd && phat_minus_p_spsd; }
};

[[nodiscard]] ConditionReport check_convergence_conditions(const IlsProblem& prob);

/// x <- x + M^{-1}(b_tilde - calA x) with exact inner solves until
/// RES = ||b_tilde - calA x|| / ||b_tilde|| < tol or maxit steps. Throws
/// DivergenceDetected once RES exceeds 1e8 times its initial value.
[[nodiscard]] std::pair<BlockVector, SolveReport> stationary_solve(PreconditionerKind kind,
                                                                   const IlsProblem& prob,
                                                                   const BlockVector& x0,
                                                                   double tol,
                                                                   std::size_t maxit);

struct SpectralRadiusOptions {
  std::size_t restarts = 8;
  std::size_t window = 50;
  std::size_t max_steps = 5000;
  std::uint64_t seed = 12345;
};

/// Dominant-modulus estimate for a square operator: the geometric-mean norm
/// growth per step of normalized power iteration, evaluated over windows and
/// maximized over random starts. Converges to |lambda_max| even for complex
/// dominant pairs. Throws EstimateUnreliable when the last two window
/// estimates still differ by more than 1e-3 after max_steps.
[[nodiscard]] double spectral_radius_estimate(const LinearOperator& g,
                                              const SpectralRadiusOptions& opts = {});

/// rho(G) for G = I - M^{-1} calA with exact inner solves.
[[nodiscard]] double spectral_radius_estimate(PreconditionerKind kind, const IlsProblem& prob,
                                              const SpectralRadiusOptions& opts = {});

/// Dense iteration matrix G = I - M^{-1} calA (desk scale).
[[nodiscard]] DenseMatrix iteration_matrix(PreconditionerKind kind, const IlsProblem& prob);

struct EigenFamilyCheck {
  std::string family;      // e.g. "(e_i;0;0)"
  double eigenvalue = 1.0; // predicted mu; NaN for mixed non-unit families
  std::size_t candidates = 0;
  std::size_t verified = 0;
  double max_residual = 0.0;
  bool vacuous = false;
  std::string note;
};

struct EigenvalueMultiplicity {
  double mu = 0.0;
  std::size_t verified_vectors = 0;  // h_j as observed
};

struct SpectralReport {
  PreconditionerKind kind = PreconditionerKind::none;
  std::optional<double> spectral_radius;
  /// Generalized eigenvalues of (P - A2^T A2, P_hat), ascending.
  std::vector<double> interval_eigs;
  std::vector<double> eigenvector_residuals;
  std::vector<EigenFamilyCheck> unit_eigenvalue_checks;
  std::vector<EigenFamilyCheck> nonunit_checks;
  std::vector<EigenvalueMultiplicity> multiplicities;
  std::size_t unit_vectors_verified = 0;
  std::size_t nonunit_vectors_verified = 0;  // h
  bool convergence_conditions_hold = false;
  bool disk_containment = true;      // |1 - mu| < 1 for every verified mu
  bool interval_containment = true;  // mu in (0, 2), IBS2/IBS4 only
  std::vector<std::string> warnings;

  [[nodiscard]] double max_residual() const noexcept;
};

/// Residual tolerance for a candidate to count as a verified eigenvector.
inline constexpr double kEigenvectorTolerance = 1e-10;

/// Builds the eigenvectors predicted by the eigenstructure analysis of
/// M^{-1} calA and checks ||M^{-1} calA v - mu v|| / ||v|| for each.
[[nodiscard]] SpectralReport verify_eigenstructure(PreconditionerKind kind,
                                                   const IlsProblem& prob);

struct GmresBoundCheck {
  std::size_t iterations = 0;
  std::size_t bound = 0;  // n + q + 1
  bool converged = false;
  bool pass = false;
};

/// Unrestarted FGMRES, exact inner solves, tolerance 1e-12; passes when it
/// converges within n + q + 1 iterations.
[[nodiscard]] GmresBoundCheck gmres_bound_check(PreconditionerKind kind, const IlsProblem& prob);

/// Orthonormal basis (as columns) of N(A) for a dense matrix A, from the
/// eigendecomposition of A^T A with threshold max(rows, cols) * eps * lambda_max.
/// `ambiguous` is set when an eigenvalue falls within 1e4 of the threshold.
struct NullSpace {
  DenseMatrix basis;
  bool ambiguous = false;
};
[[nodiscard]] NullSpace null_space(const DenseMatrix& a);

}  // namespace ils
