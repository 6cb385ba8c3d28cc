#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "ils/krylov.hpp"

namespace ils {

void CgConfig::validate() const {
  if (!(rel_tolerance > 0.0 && rel_tolerance < 1.0)) {
    throw ContractViolation("CgConfig: rel_tolerance must lie in (0, 1)");
  }
  if (max_iterations < 1) throw ContractViolation("CgConfig: max_iterations must be >= 1");
}

SolveResult cg_solve(const LinearOperator& op, std::span<const double> rhs,
                     std::span<const double> x0, const CgConfig& cfg) {
  cfg.validate();
  if (op.n_rows() != op.n_cols()) throw ContractViolation("cg_solve: operator is not square");
  require_same_size(rhs.size(), op.n_rows(), "cg_solve: rhs");
  require_same_size(x0.size(), op.n_cols(), "cg_solve: x0");

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = rhs.size();
  SolveResult out;
  SolveReport& rep = out.report;

  const double rhs_norm = norm2(rhs);
  if (rhs_norm == 0.0) {
    out.x.assign(n, 0.0);
    rep.converged = true;
    rep.res_history = {0.0};
    return out;
  }

  Vector x(x0.begin(), x0.end());
  Vector r(n);
  op.apply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
  Vector p = r;
  Vector ap(n);

  double rr = dot(r, r);
  double res = std::sqrt(rr) / rhs_norm;
  rep.res_history.push_back(res);

  Vector best_x = x;
  double best_res = res;

  std::size_t k = 0;
  while (res >= cfg.rel_tolerance && k < cfg.max_iterations) {
    op.apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      throw IndefiniteOperator("cg_solve: p^T A p = " + std::to_string(pap) + " at iteration " +
                                   std::to_string(k + 1),
                               k + 1);
    }
    const double step = rr / pap;
    axpy(step, p, x);
    axpy(-step, ap, r);
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    ++k;
    res = std::sqrt(rr) / rhs_norm;
    rep.res_history.push_back(res);
    if (cfg.on_iterate) cfg.on_iterate(k, x);
    if (res < best_res) {
      best_res = res;
      if (res >= cfg.rel_tolerance) best_x = x;
    }
  }

  rep.iterations = k;
  rep.converged = res < cfg.rel_tolerance;
  if (rep.converged) {
    out.x = std::move(x);
    rep.final_res = res;
  } else {
    out.x = std::move(best_x);
    rep.final_res = best_res;
    rep.res_history.back() = best_res;
    rep.diagnostics.push_back("cg_solve: not converged after " + std::to_string(k) +
                              " iterations");
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace ils
