#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ils/krylov.hpp"

namespace ils {

void FgmresConfig::validate() const {
  if (!(rel_tolerance > 0.0 && rel_tolerance < 1.0)) {
    throw ContractViolation("FgmresConfig: rel_tolerance must lie in (0, 1)");
  }
  if (max_iterations < 1) throw ContractViolation("FgmresConfig: max_iterations must be >= 1");
  if (restart && *restart < 1) throw ContractViolation("FgmresConfig: restart must be >= 1");
}

namespace {

constexpr double kHappyBreakdown = 1e-14;

void true_residual(const LinearOperator& op, std::span<const double> rhs,
                   std::span<const double> x, std::span<double> r) {
  op.apply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
}

}  // namespace

SolveResult fgmres_solve(const LinearOperator& op, const RightPreconditioner& precond,
                         std::span<const double> rhs, std::span<const double> x0,
                         const FgmresConfig& cfg) {
  cfg.validate();
  if (op.n_rows() != op.n_cols()) throw ContractViolation("fgmres_solve: operator is not square");
  require_same_size(rhs.size(), op.n_rows(), "fgmres_solve: rhs");
  require_same_size(x0.size(), op.n_cols(), "fgmres_solve: x0");

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = rhs.size();
  SolveResult out;
  SolveReport& rep = out.report;
  auto finish = [&] {
    rep.final_res = rep.res_history.back();
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const double rhs_norm = norm2(rhs);
  if (rhs_norm == 0.0) {
    out.x.assign(n, 0.0);
    rep.converged = true;
    rep.res_history = {0.0};
    finish();
    return out;
  }

  Vector x(x0.begin(), x0.end());
  Vector r(n);
  true_residual(op, rhs, x, r);
  double beta = norm2(r);
  rep.res_history.push_back(beta / rhs_norm);
  if (rep.res_history.back() < cfg.rel_tolerance) {
    rep.converged = true;
    out.x = std::move(x);
    finish();
    return out;
  }

  const std::size_t cycle_cap = cfg.restart.value_or(cfg.max_iterations);
  std::vector<Vector> basis;   // V
  std::vector<Vector> precond_basis;  // Z
  // Column-major Hessenberg storage, one column per Arnoldi step, already
  // reduced to upper-triangular form by the accumulated Givens rotations.
  std::vector<Vector> hess;
  Vector cs, sn, g;
  Vector w(n);
  std::size_t failed_confirmations = 0;

  while (true) {
    const std::size_t m = std::min(cycle_cap, cfg.max_iterations - rep.iterations);
    basis.clear();
    precond_basis.clear();
    hess.clear();
    cs.assign(m, 0.0);
    sn.assign(m, 0.0);
    g.assign(m + 1, 0.0);
    g[0] = beta;

    basis.emplace_back(r);
    scale(1.0 / beta, basis[0]);

    std::size_t k = 0;
    bool estimate_converged = false;
    bool happy = false;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t iteration = rep.iterations + 1;
      Vector z(n);
      if (precond) {
        precond(basis[j], z);
      } else {
        z = basis[j];
      }
      if (!all_finite(z)) {
        throw NumericalFailure("fgmres_solve: non-finite preconditioned vector at iteration " +
                                   std::to_string(iteration),
                               iteration);
      }
      op.apply(z, w);
      if (!all_finite(w)) {
        throw NumericalFailure("fgmres_solve: non-finite basis vector at iteration " +
                                   std::to_string(iteration),
                               iteration);
      }
      precond_basis.push_back(std::move(z));

      Vector h(j + 2, 0.0);
      const double w_norm_before = norm2(w);
      for (std::size_t i = 0; i <= j; ++i) {
        h[i] = dot(w, basis[i]);
        axpy(-h[i], basis[i], w);
      }
      double w_norm = norm2(w);
      if (w_norm < 0.5 * w_norm_before) {
        // One reorthogonalization pass.
        for (std::size_t i = 0; i <= j; ++i) {
          const double c = dot(w, basis[i]);
          h[i] += c;
          axpy(-c, basis[i], w);
        }
        w_norm = norm2(w);
      }
      h[j + 1] = w_norm;

      for (std::size_t i = 0; i < j; ++i) {
        const double t = cs[i] * h[i] + sn[i] * h[i + 1];
        h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
        h[i] = t;
      }
      const double d = std::hypot(h[j], h[j + 1]);
      if (d == 0.0) {
        throw NumericalFailure("fgmres_solve: singular Hessenberg column at iteration " +
                                   std::to_string(iteration),
                               iteration);
      }
      cs[j] = h[j] / d;
      sn[j] = h[j + 1] / d;
      h[j] = d;
      h[j + 1] = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      hess.push_back(std::move(h));

      ++rep.iterations;
      k = j + 1;
      const double estimate = std::fabs(g[j + 1]) / rhs_norm;
      rep.res_history.push_back(estimate);

      estimate_converged = estimate < cfg.rel_tolerance;
      happy = w_norm <= kHappyBreakdown * rhs_norm;
      if (estimate_converged || happy || rep.iterations >= cfg.max_iterations) break;

      basis.emplace_back(w);
      scale(1.0 / w_norm, basis.back());
    }

    // Back substitution R y = g and update x with the preconditioned basis.
    Vector y(k);
    for (std::size_t ii = k; ii-- > 0;) {
      double s = g[ii];
      for (std::size_t jj = ii + 1; jj < k; ++jj) s -= hess[jj][ii] * y[jj];
      y[ii] = s / hess[ii][ii];
    }
    for (std::size_t i = 0; i < k; ++i) axpy(y[i], precond_basis[i], x);

    true_residual(op, rhs, x, r);
    beta = norm2(r);
    const double res = beta / rhs_norm;
    rep.res_history.back() = res;

    if (res < cfg.rel_tolerance) {
      rep.converged = true;
      break;
    }
    if (estimate_converged || happy) {
      ++failed_confirmations;
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "true residual %.2e above tolerance after declared convergence at "
                    "iteration %zu",
                    res, rep.iterations);
      rep.diagnostics.emplace_back(buf);
      if (failed_confirmations > cfg.max_resumptions) {
        rep.diagnostics.push_back("giving up after " + std::to_string(cfg.max_resumptions) +
                                  " resumptions");
        break;
      }
    }
    if (rep.iterations >= cfg.max_iterations) {
      rep.diagnostics.push_back("iteration cap " + std::to_string(cfg.max_iterations) +
                                " reached");
      break;
    }
    ++rep.cycles;
  }

  out.x = std::move(x);
  finish();
  return out;
}

}  // namespace ils
