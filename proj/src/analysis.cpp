#include "ils/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ils/eigen.hpp"

namespace ils {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_desk_scale(const IlsProblem& prob, const char* what) {
  if (prob.n() > kAnalysisCap) {
    throw ConfigurationError(std::string(what) + ": n = " + std::to_string(prob.n()) +
                             " exceeds the dense analysis cap " + std::to_string(kAnalysisCap));
  }
}

bool is_spd(const DenseMatrix& m) { return dense_cholesky(m).is_spd(); }

bool is_spsd(DenseMatrix m) {
  const double shift = static_cast<double>(m.n_rows()) * kEps * std::max(one_norm(m), kEps);
  add_to_diagonal(m, shift);
  return dense_cholesky(m).is_spd();
}

double spd_condition_number(const DenseMatrix& m) {
  const auto eig = symmetric_eigen(m);
  const double lo = eig.values.front();
  const double hi = eig.values.back();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

bool is_ibs24(PreconditionerKind kind) {
  return kind == PreconditionerKind::ibs2 || kind == PreconditionerKind::ibs4;
}

bool is_ibs(PreconditionerKind kind) { return uses_shifted_gram(kind); }

}  // namespace

ConditionReport check_convergence_conditions(const IlsProblem& prob) {
  require_desk_scale(prob, "check_convergence_conditions");
  const DenseMatrix p = dense_gram(prob);
  const DenseMatrix a2g = dense_a2_gram(prob);
  DenseMatrix phat = p;
  add_to_diagonal(phat, prob.alpha());

  ConditionReport rep;
  rep.normal_spd = is_spd(combine(1.0, p, -1.0, a2g));
  rep.phat_minus_a2_spd = is_spd(combine(1.0, phat, -1.0, a2g));
  const DenseMatrix two_phat_minus_p = combine(2.0, phat, -1.0, p);
  rep.ibs13_matrix_spd = is_spd(combine(1.0, two_phat_minus_p, -1.0, a2g));
  rep.ibs24_matrix_spd = is_spd(combine(1.0, two_phat_minus_p, 1.0, a2g));
  rep.phat_minus_p_spsd = is_spsd(combine(1.0, phat, -1.0, p));
  rep.kappa_p = spd_condition_number(p);
  rep.kappa_phat = spd_condition_number(phat);
  return rep;
}

std::pair<BlockVector, SolveReport> stationary_solve(PreconditionerKind kind,
                                                     const IlsProblem& prob,
                                                     const BlockVector& x0, double tol,
                                                     std::size_t maxit) {
  if (!is_ibs(kind)) throw ContractViolation("stationary_solve: kind must be IBS1..IBS4");
  if (x0.layout() != prob.layout()) throw ContractViolation("stationary_solve: layout mismatch");
  require_desk_scale(prob, "stationary_solve");

  const BlockPreconditioner precond(prob, kind, InnerSolverMode::dense());
  const BlockVector rhs = build_rhs(prob);
  const double rhs_norm = norm2(rhs.flat());
  const double denom = rhs_norm > 0.0 ? rhs_norm : 1.0;
  const std::size_t size = prob.layout().size();

  BlockVector x = x0;
  Vector r(size);
  Vector z(size);
  auto residual = [&] {
    apply_block_a(prob, x.flat(), r);
    for (std::size_t i = 0; i < size; ++i) r[i] = rhs.flat()[i] - r[i];
    return norm2(r) / denom;
  };

  SolveReport rep;
  double res = residual();
  const double initial = res;
  rep.res_history.push_back(res);
  while (!(res < tol) && rep.iterations < maxit) {
    if (res == 0.0) break;
    precond.apply(r, z);
    axpy(1.0, z, x.flat());
    res = residual();
    ++rep.iterations;
    rep.res_history.push_back(res);
    if (!std::isfinite(res) || res > 1e8 * initial) {
      throw DivergenceDetected("stationary_solve: RES grew from " + std::to_string(initial) +
                                   " to " + std::to_string(res) + " at iteration " +
                                   std::to_string(rep.iterations),
                               rep.iterations);
    }
  }
  rep.final_res = res;
  rep.converged = res < tol || res == 0.0;
  return {std::move(x), std::move(rep)};
}

double spectral_radius_estimate(const LinearOperator& g, const SpectralRadiusOptions& opts) {
  if (g.n_rows() != g.n_cols()) throw ContractViolation("spectral_radius_estimate: not square");
  if (opts.restarts < 1 || opts.window < 1 || opts.max_steps < 2 * opts.window) {
    throw ContractViolation("spectral_radius_estimate: invalid options");
  }
  const std::size_t n = g.n_rows();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;

  double best = 0.0;
  Vector v(n);
  Vector w(n);
  for (std::size_t start = 0; start < opts.restarts; ++start) {
    for (double& t : v) t = normal(rng);
    scale(1.0 / norm2(v), v);

    std::vector<double> window_logs;  // mean log-growth per window
    double window_sum = 0.0;
    double estimate = 0.0;
    bool settled = false;
    bool annihilated = false;
    for (std::size_t step = 1; step <= opts.max_steps; ++step) {
      g.apply(v, w);
      const double nrm = norm2(w);
      if (!(nrm > std::numeric_limits<double>::min())) {
        annihilated = true;  // G^k v = 0: this start sees no growth at all
        break;
      }
      for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nrm;
      window_sum += std::log(nrm);
      if (step % opts.window == 0) {
        window_logs.push_back(window_sum / static_cast<double>(opts.window));
        window_sum = 0.0;
        const std::size_t k = window_logs.size();
        if (k >= 2) {
          const double cur = std::exp(window_logs[k - 1]);
          const double prev = std::exp(window_logs[k - 2]);
          if (std::fabs(cur - prev) <= 1e-12 * std::max(cur, 1e-300)) {
            estimate = cur;
            settled = true;
            break;
          }
        }
      }
    }
    if (annihilated) {
      estimate = 0.0;
    } else if (!settled) {
      const std::size_t k = window_logs.size();
      const double cur = std::exp(window_logs[k - 1]);
      const double prev = std::exp(window_logs[k - 2]);
      if (std::fabs(cur - prev) > 1e-3) {
        throw EstimateUnreliable("spectral_radius_estimate: window estimates still oscillate",
                                 prev, cur);
      }
      // Long-span growth rate over the second half of the run.
      double sum = 0.0;
      for (std::size_t i = k / 2; i < k; ++i) sum += window_logs[i];
      estimate = std::exp(sum / static_cast<double>(k - k / 2));
    }
    best = std::max(best, estimate);
  }
  return best;
}

DenseMatrix iteration_matrix(PreconditionerKind kind, const IlsProblem& prob) {
  DenseMatrix g = assemble_dense_preconditioned(kind, prob);
  for (double& t : g.values()) t = -t;
  add_to_diagonal(g, 1.0);
  return g;
}

double spectral_radius_estimate(PreconditionerKind kind, const IlsProblem& prob,
                                const SpectralRadiusOptions& opts) {
  if (prob.layout().size() <= kDenseAssemblyCap) {
    return spectral_radius_estimate(LinearOperator::from_dense(iteration_matrix(kind, prob)),
                                    opts);
  }
  const LinearOperator pre = preconditioned_operator(kind, prob);
  const LinearOperator g(pre.n_rows(), pre.n_cols(),
                         [pre](std::span<const double> v, std::span<double> y) {
                           pre.apply(v, y);
                           for (std::size_t i = 0; i < y.size(); ++i) y[i] = v[i] - y[i];
                         });
  return spectral_radius_estimate(g, opts);
}

NullSpace null_space(const DenseMatrix& a) {
  const std::size_t cols = a.n_cols();
  const SymmetricEigen eig = symmetric_eigen(multiply_transpose_left(a, a));
  const double lambda_max = eig.values.empty() ? 0.0 : std::max(eig.values.back(), 0.0);
  const double threshold =
      static_cast<double>(std::max(a.n_rows(), cols)) * kEps * lambda_max;

  NullSpace ns;
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < eig.values.size(); ++k) {
    const double lam = eig.values[k];
    if (lam <= threshold) {
      kept.push_back(k);
    } else if (lam <= 1e4 * threshold) {
      ns.ambiguous = true;
    }
  }
  ns.basis = DenseMatrix(cols, kept.size());
  for (std::size_t c = 0; c < kept.size(); ++c) {
    for (std::size_t i = 0; i < cols; ++i) ns.basis(i, c) = eig.vectors(i, kept[c]);
  }
  return ns;
}

double SpectralReport::max_residual() const noexcept {
  double m = 0.0;
  for (double r : eigenvector_residuals) m = std::max(m, r);
  return m;
}

namespace {

struct CandidateChecker {
  const LinearOperator& op;
  SpectralReport& report;

  /// Returns the residual and records it.
  double check(std::span<const double> v, double mu) {
    Vector av = op.apply(v);
    for (std::size_t i = 0; i < av.size(); ++i) av[i] -= mu * v[i];
    const double res = norm2(av) / norm2(v);
    report.eigenvector_residuals.push_back(res);
    return res;
  }

  void run_family(EigenFamilyCheck& fam, const std::vector<Vector>& candidates, double mu) {
    fam.candidates = candidates.size();
    for (const auto& v : candidates) {
      const double res = check(v, mu);
      fam.max_residual = std::max(fam.max_residual, res);
      if (res <= kEigenvectorTolerance) ++fam.verified;
    }
  }
};

Vector embed(const BlockLayout& l, std::span<const double> d1, std::span<const double> x,
             std::span<const double> d2) {
  Vector v(l.size(), 0.0);
  if (!d1.empty()) std::copy(d1.begin(), d1.end(), v.begin());
  if (!x.empty()) std::copy(x.begin(), x.end(), v.begin() + static_cast<long>(l.x_offset()));
  if (!d2.empty()) std::copy(d2.begin(), d2.end(), v.begin() + static_cast<long>(l.d2_offset()));
  return v;
}

EigenFamilyCheck family(std::string name, double mu) {
  EigenFamilyCheck f;
  f.family = std::move(name);
  f.eigenvalue = mu;
  return f;
}

Vector column(const DenseMatrix& m, std::size_t j) {
  Vector c(m.n_rows());
  for (std::size_t i = 0; i < m.n_rows(); ++i) c[i] = m(i, j);
  return c;
}

}  // namespace

SpectralReport verify_eigenstructure(PreconditionerKind kind, const IlsProblem& prob) {
  if (!is_ibs(kind)) throw ContractViolation("verify_eigenstructure: kind must be IBS1..IBS4");
  require_desk_scale(prob, "verify_eigenstructure");

  SpectralReport rep;
  rep.kind = kind;
  const BlockLayout l = prob.layout();
  const LinearOperator op = preconditioned_operator(kind, prob);
  CandidateChecker checker{op, rep};

  const ConditionReport cond = check_convergence_conditions(prob);
  rep.convergence_conditions_hold = is_ibs24(kind) ? cond.ibs24_converges() : cond.ibs13_converges();

  const std::vector<double> empty;

  // (a) eigenvalue 1.
  {
    EigenFamilyCheck fam = family("(e_i;0;0)", 1.0);
    std::vector<Vector> cands;
    for (std::size_t i = 0; i < l.p; ++i) {
      Vector e(l.p, 0.0);
      e[i] = 1.0;
      cands.push_back(embed(l, e, empty, empty));
    }
    checker.run_family(fam, cands, 1.0);
    rep.unit_eigenvalue_checks.push_back(fam);
  }
  if (is_ibs24(kind)) {
    EigenFamilyCheck fam = family("(0;0;e_j)", 1.0);
    std::vector<Vector> cands;
    for (std::size_t j = 0; j < l.q; ++j) {
      Vector e(l.q, 0.0);
      e[j] = 1.0;
      cands.push_back(embed(l, empty, empty, e));
    }
    checker.run_family(fam, cands, 1.0);
    rep.unit_eigenvalue_checks.push_back(fam);
  } else {
    EigenFamilyCheck fam = family("(0;0;z), z in N(A2^T)", 1.0);
    const NullSpace ns = null_space(prob.a2().to_dense().transposed());
    if (ns.ambiguous) {
      fam.note = "rank decision for A2 is ambiguous; family skipped";
      rep.warnings.push_back("rank-ambiguity: null space of A2^T not used");
    } else {
      std::vector<Vector> cands;
      for (std::size_t c = 0; c < ns.basis.n_cols(); ++c) {
        cands.push_back(embed(l, empty, empty, column(ns.basis, c)));
      }
      checker.run_family(fam, cands, 1.0);
      fam.vacuous = cands.empty();
      if (fam.vacuous) fam.note = "A2^T has a trivial null space";
    }
    rep.unit_eigenvalue_checks.push_back(fam);
  }
  if (kind == PreconditionerKind::ibs3 || kind == PreconditionerKind::ibs4) {
    // (0;y;0) requires y in N(P_hat - P) and N(A2); with P_hat - P = alpha I
    // that intersection is trivial unless alpha = 0.
    EigenFamilyCheck fam = family(kind == PreconditionerKind::ibs3 ? "(0;y;0), y in N(A2)"
                                                          : "(0;y;0), y in N(P_hat-P)∩N(A2)",
                         1.0);
    if (prob.alpha() != 0.0) {
      fam.vacuous = true;
      fam.note = "P_hat - P = alpha I with alpha > 0: only y = 0 qualifies";
    } else {
      const NullSpace ns = null_space(prob.a2().to_dense());
      if (ns.ambiguous) {
        fam.note = "rank decision for A2 is ambiguous; family skipped";
        rep.warnings.push_back("rank-ambiguity: null space of A2 not used");
      } else {
        std::vector<Vector> cands;
        for (std::size_t c = 0; c < ns.basis.n_cols(); ++c) {
          cands.push_back(embed(l, empty, column(ns.basis, c), empty));
        }
        checker.run_family(fam, cands, 1.0);
        fam.vacuous = cands.empty();
      }
    }
    rep.unit_eigenvalue_checks.push_back(fam);
  }
  for (const auto& fam : rep.unit_eigenvalue_checks) rep.unit_vectors_verified += fam.verified;

  // Generalized eigenpairs of (P - A2^T A2, P_hat).
  const DenseMatrix p = dense_gram(prob);
  DenseMatrix phat = p;
  add_to_diagonal(phat, prob.alpha());
  const SymmetricEigen gen = generalized_sym_eigen(combine(1.0, p, -1.0, dense_a2_gram(prob)), phat);
  if (!gen.converged) {
    rep.warnings.push_back("Jacobi sweep cap hit; off-norm " + std::to_string(gen.off_norm));
  }
  rep.interval_eigs = gen.values;

  // (b) non-unit eigenvalues.
  if (is_ibs24(kind)) {
    EigenFamilyCheck fam = family(kind == PreconditionerKind::ibs2 ? "(A1 y/(mu-1); y; A2 y/(mu-1))"
                                                          : "(-A1 y; y; A2 y/(mu-1))",
                         std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < gen.values.size(); ++k) {
      const double mu = gen.values[k];
      if (std::fabs(mu - 1.0) <= 1e-8) continue;
      const Vector y = column(gen.vectors, k);
      Vector top = prob.a1().apply(y);
      Vector bottom = prob.a2().apply(y);
      const double s = 1.0 / (mu - 1.0);
      for (double& t : top) t *= kind == PreconditionerKind::ibs2 ? s : -1.0;
      for (double& t : bottom) t *= s;
      const double res = checker.check(embed(l, top, y, bottom), mu);
      ++fam.candidates;
      fam.max_residual = std::max(fam.max_residual, res);
      if (res <= kEigenvectorTolerance) {
        ++fam.verified;
        auto it = std::find_if(rep.multiplicities.begin(), rep.multiplicities.end(),
                               [&](const EigenvalueMultiplicity& e) {
                                 return std::fabs(e.mu - mu) <= 1e-8 * std::max(1.0, std::fabs(mu));
                               });
        if (it == rep.multiplicities.end()) {
          rep.multiplicities.push_back({mu, 1});
        } else {
          ++it->verified_vectors;
        }
        if (rep.convergence_conditions_hold && !(std::fabs(1.0 - mu) < 1.0)) {
          rep.disk_containment = false;
        }
      }
      if (rep.convergence_conditions_hold && !(mu > 0.0 && mu < 2.0)) rep.interval_containment = false;
    }
    fam.vacuous = fam.candidates == 0;
    rep.nonunit_vectors_verified = fam.verified;
    rep.nonunit_checks.push_back(fam);
  } else {
    EigenFamilyCheck fam = family("(A1 y/(mu-1); y; A2 y/(mu-1)) with (1-mu)(P-mu P_hat)y = A2^T A2 y",
                         std::numeric_limits<double>::quiet_NaN());
    fam.vacuous = true;
    fam.note = "quadratic eigenproblem; candidates not constructed";
    rep.nonunit_checks.push_back(fam);
  }
  return rep;
}

GmresBoundCheck gmres_bound_check(PreconditionerKind kind, const IlsProblem& prob) {
  if (!is_ibs(kind)) throw ContractViolation("gmres_bound_check: kind must be IBS1..IBS4");
  require_desk_scale(prob, "gmres_bound_check");
  const BlockPreconditioner precond(prob, kind, InnerSolverMode::dense());
  const BlockVector rhs = build_rhs(prob);
  const Vector zero(rhs.flat().size(), 0.0);
  FgmresConfig cfg;
  cfg.rel_tolerance = 1e-12;
  cfg.max_iterations = prob.layout().size() + 10;
  const auto result = fgmres_solve(block_operator(prob, BlockRole::full_system),
                                   precond.as_right_preconditioner(), rhs.flat(), zero, cfg);
  GmresBoundCheck out;
  out.iterations = result.report.iterations;
  out.bound = prob.n() + prob.q() + 1;
  out.converged = result.report.converged;
  out.pass = out.converged && out.iterations <= out.bound;
  return out;
}

}  // namespace ils
