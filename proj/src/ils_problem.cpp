#include "ils/ils_problem.hpp"

#include <algorithm>
#include <cmath>

#include "ils/krylov.hpp"

namespace ils {

BlockVector::BlockVector(BlockLayout layout, Vector data)
    : layout_(layout), data_(std::move(data)) {
  require_same_size(data_.size(), layout_.size(), "BlockVector");
}

BlockVector BlockVector::from_parts(std::span<const double> d1, std::span<const double> x,
                                    std::span<const double> d2) {
  BlockVector v(BlockLayout{d1.size(), x.size(), d2.size()});
  std::copy(d1.begin(), d1.end(), v.d1().begin());
  std::copy(x.begin(), x.end(), v.x().begin());
  std::copy(d2.begin(), d2.end(), v.d2().begin());
  return v;
}

IlsProblem::IlsProblem(StoredMatrix a1, StoredMatrix a2, Vector b1, Vector b2, double alpha)
    : a1_(std::move(a1)), a2_(std::move(a2)), b1_(std::move(b1)), b2_(std::move(b2)),
      alpha_(alpha) {
  if (a1_.n_rows() == 0 || a2_.n_rows() == 0) {
    throw DegenerateInput(
        "IlsProblem: p = 0 or q = 0 reduces to an ordinary least squares problem");
  }
  if (a1_.n_cols() != a2_.n_cols()) {
    throw ContractViolation("IlsProblem: A1 and A2 must have the same number of columns");
  }
  if (a1_.n_cols() == 0) throw ContractViolation("IlsProblem: n must be >= 1");
  require_same_size(b1_.size(), a1_.n_rows(), "IlsProblem: b1");
  require_same_size(b2_.size(), a2_.n_rows(), "IlsProblem: b2");
  if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) {
    throw ContractViolation("IlsProblem: alpha must be finite and nonnegative");
  }
}

IlsProblem IlsProblem::with_alpha(double alpha) const {
  return IlsProblem(a1_, a2_, b1_, b2_, alpha);
}

std::string IlsProblem::size_label() const {
  return std::to_string(m()) + "x" + std::to_string(n());
}

double compute_alpha(const StoredMatrix& a1) {
  const double norm = a1.one_norm();
  if (norm == 0.0) throw DegenerateInput("compute_alpha: A1 is the zero matrix");
  return norm * norm;
}

double AlphaPolicy::resolve(const StoredMatrix& a1) const {
  return value ? *value : compute_alpha(a1);
}

IlsProblem partition_problem(const SparseMatrixCsr& a, std::span<const double> b, std::size_t p,
                             std::size_t q, AlphaPolicy policy) {
  const auto m = static_cast<std::size_t>(a.n_rows());
  if (p + q != m) {
    throw ContractViolation("partition_problem: p + q = " + std::to_string(p + q) +
                            " but A has " + std::to_string(m) + " rows");
  }
  require_same_size(b.size(), m, "partition_problem: b");
  if (p == 0 || q == 0) {
    throw DegenerateInput(
        "partition_problem: p = 0 or q = 0 reduces to an ordinary least squares problem");
  }
  StoredMatrix a1 = a.row_block(0, static_cast<Index>(p));
  StoredMatrix a2 = a.row_block(static_cast<Index>(p), static_cast<Index>(m));
  const double alpha = policy.resolve(a1);
  return IlsProblem(std::move(a1), std::move(a2), Vector(b.begin(), b.begin() + p),
                    Vector(b.begin() + p, b.end()), alpha);
}

void apply_block_a(const IlsProblem& prob, std::span<const double> v, std::span<double> out) {
  const BlockLayout l = prob.layout();
  require_same_size(v.size(), l.size(), "apply_block_a: v");
  require_same_size(out.size(), l.size(), "apply_block_a: out");
  const auto d1 = v.subspan(0, l.p);
  const auto x = v.subspan(l.x_offset(), l.n);
  const auto d2 = v.subspan(l.d2_offset(), l.q);
  auto o1 = out.subspan(0, l.p);
  auto ox = out.subspan(l.x_offset(), l.n);
  auto o2 = out.subspan(l.d2_offset(), l.q);

  Vector a1x(l.p);
  prob.a1().apply(x, a1x);
  for (std::size_t i = 0; i < l.p; ++i) o1[i] = d1[i] + a1x[i];
  prob.a1().apply_transpose(a1x, ox);
  Vector a2t(l.n);
  prob.a2().apply_transpose(d2, a2t);
  for (std::size_t i = 0; i < l.n; ++i) ox[i] += a2t[i];
  // o2 = A2 x + d2
  prob.a2().apply(x, o2);
  for (std::size_t i = 0; i < l.q; ++i) o2[i] += d2[i];
}

BlockVector apply_block_a(const IlsProblem& prob, const BlockVector& v) {
  if (v.layout() != prob.layout()) throw ContractViolation("apply_block_a: layout mismatch");
  BlockVector out(prob.layout());
  apply_block_a(prob, v.flat(), out.flat());
  return out;
}

BlockVector build_rhs(const IlsProblem& prob) {
  BlockVector rhs(prob.layout());
  std::copy(prob.b1().begin(), prob.b1().end(), rhs.d1().begin());
  prob.a1().apply_transpose(prob.b1(), rhs.x());
  std::copy(prob.b2().begin(), prob.b2().end(), rhs.d2().begin());
  return rhs;
}

void apply_shifted_gram(const IlsProblem& prob, double shift, std::span<const double> v,
                        std::span<double> y) {
  require_same_size(v.size(), prob.n(), "apply_shifted_gram: v");
  require_same_size(y.size(), prob.n(), "apply_shifted_gram: y");
  Vector a1v(prob.p());
  prob.a1().apply(v, a1v);
  prob.a1().apply_transpose(a1v, y);
  if (shift != 0.0) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = shift * v[i] + y[i];
  }
}

void apply_normal_matrix(const IlsProblem& prob, std::span<const double> v, std::span<double> y) {
  apply_shifted_gram(prob, 0.0, v, y);
  Vector a2v(prob.q());
  prob.a2().apply(v, a2v);
  Vector t(prob.n());
  prob.a2().apply_transpose(a2v, t);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= t[i];
}

LinearOperator block_operator(const IlsProblem& prob, BlockRole role) {
  const IlsProblem* pr = &prob;
  switch (role) {
    case BlockRole::full_system: {
      const std::size_t size = prob.layout().size();
      return {size, size,
              [pr](std::span<const double> v, std::span<double> y) { apply_block_a(*pr, v, y); }};
    }
    case BlockRole::gram:
      return {prob.n(), prob.n(), [pr](std::span<const double> v, std::span<double> y) {
                apply_shifted_gram(*pr, 0.0, v, y);
              }};
    case BlockRole::shifted_gram:
      return {prob.n(), prob.n(), [pr](std::span<const double> v, std::span<double> y) {
                apply_shifted_gram(*pr, pr->alpha(), v, y);
              }};
    case BlockRole::normal_matrix:
      return {prob.n(), prob.n(), [pr](std::span<const double> v, std::span<double> y) {
                apply_normal_matrix(*pr, v, y);
              }};
  }
  throw ContractViolation("block_operator: unknown role");
}

DenseMatrix dense_gram(const IlsProblem& prob) { return prob.a1().gram(); }

DenseMatrix dense_a2_gram(const IlsProblem& prob) { return prob.a2().gram(); }

Vector normal_rhs(const IlsProblem& prob) {
  Vector c = prob.a1().apply_transpose(prob.b1());
  const Vector t = prob.a2().apply_transpose(prob.b2());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= t[i];
  return c;
}

std::string to_string(OracleMode mode) {
  return mode == OracleMode::dense_cholesky ? "dense-cholesky" : "tight-cg";
}

std::string to_string(Definiteness d) {
  switch (d) {
    case Definiteness::positive: return "positive";
    case Definiteness::negative: return "negative";
    case Definiteness::indefinite: return "indefinite";
  }
  return "unknown";
}

OracleMode default_oracle_mode(const IlsProblem& prob) {
  return prob.n() <= kDenseOracleCap ? OracleMode::dense_cholesky : OracleMode::tight_cg;
}

namespace {

OracleSolution dense_oracle(const IlsProblem& prob) {
  DenseMatrix m = combine(1.0, dense_gram(prob), -1.0, dense_a2_gram(prob));
  const Vector c = normal_rhs(prob);
  OracleSolution sol;
  sol.mode = OracleMode::dense_cholesky;

  if (auto pos = dense_cholesky(m); pos.is_spd()) {
    sol.x = cholesky_solve(*pos.factor, c);
    sol.definiteness = Definiteness::positive;
    return sol;
  }
  const DenseMatrix neg = combine(-1.0, m, 0.0, m);
  if (auto ng = dense_cholesky(neg); ng.is_spd()) {
    Vector negc(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) negc[i] = -c[i];
    sol.x = cholesky_solve(*ng.factor, negc);
    sol.definiteness = Definiteness::negative;
    return sol;
  }
  try {
    sol.x = lu_solve(lu_factor(m), c);
  } catch (const DegenerateInput& e) {
    throw OracleFailure(std::string("exact_solution_oracle: normal matrix is singular: ") +
                        e.what());
  }
  sol.definiteness = Definiteness::indefinite;
  return sol;
}

OracleSolution cg_oracle(const IlsProblem& prob) {
  const std::size_t n = prob.n();
  const Vector c = normal_rhs(prob);
  const Vector zero(n, 0.0);
  CgConfig cfg;
  cfg.rel_tolerance = 1e-14;
  cfg.max_iterations = 10 * n;
  const IlsProblem* pr = &prob;

  const LinearOperator pos(n, n, [pr](std::span<const double> v, std::span<double> y) {
    apply_normal_matrix(*pr, v, y);
  });
  const LinearOperator neg(n, n, [pr](std::span<const double> v, std::span<double> y) {
    apply_normal_matrix(*pr, v, y);
    for (double& t : y) t = -t;
  });
  const LinearOperator squared(n, n, [pr, n](std::span<const double> v, std::span<double> y) {
    Vector t(n);
    apply_normal_matrix(*pr, v, t);
    apply_normal_matrix(*pr, t, y);
  });

  Vector negc(c);
  for (double& t : negc) t = -t;
  Vector mc(n);
  apply_normal_matrix(prob, c, mc);

  struct Attempt {
    const LinearOperator* op;
    const Vector* rhs;
  };
  const Attempt attempts[] = {{&pos, &c}, {&neg, &negc}, {&squared, &mc}};
  std::string failures;
  for (const auto& attempt : attempts) {
    try {
      auto result = cg_solve(*attempt.op, *attempt.rhs, zero, cfg);
      if (result.report.converged) {
        OracleSolution sol;
        sol.x = std::move(result.x);
        sol.mode = OracleMode::tight_cg;
        sol.cg_iterations = result.report.iterations;
        return sol;
      }
      failures += "no convergence in " + std::to_string(cfg.max_iterations) + " steps; ";
    } catch (const IndefiniteOperator& e) {
      failures += std::string(e.what()) + "; ";
    }
  }
  throw OracleFailure("exact_solution_oracle: tight CG failed on M, -M and M^2: " + failures);
}

}  // namespace

OracleSolution exact_solution_oracle(const IlsProblem& prob, OracleMode mode) {
  return mode == OracleMode::dense_cholesky ? dense_oracle(prob) : cg_oracle(prob);
}

double relative_error(std::span<const double> x, std::span<const double> exact) {
  const double denom = norm2(exact);
  const Vector diff = subtract(x, exact);
  return denom == 0.0 ? norm2(diff) : norm2(diff) / denom;
}

}  // namespace ils
