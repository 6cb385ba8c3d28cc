#include "ils/preconditioners.hpp"

#include <algorithm>
#include <cctype>

namespace ils {

std::string to_string(PreconditionerKind kind) {
  switch (kind) {
    case PreconditionerKind::ibs1: return "IBS1";
    case PreconditionerKind::ibs2: return "IBS2";
    case PreconditionerKind::ibs3: return "IBS3";
    case PreconditionerKind::ibs4: return "IBS4";
    case PreconditionerKind::bs1: return "BS1";
    case PreconditionerKind::bs2: return "BS2";
    case PreconditionerKind::bs3: return "BS3";
    case PreconditionerKind::but: return "BUT";
    case PreconditionerKind::none: return "None";
  }
  return "?";
}

PreconditionerKind parse_preconditioner_kind(const std::string& name) {
  std::string up = name;
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (auto k : {PreconditionerKind::ibs1, PreconditionerKind::ibs2, PreconditionerKind::ibs3,
                 PreconditionerKind::ibs4, PreconditionerKind::bs1, PreconditionerKind::bs2,
                 PreconditionerKind::bs3, PreconditionerKind::but, PreconditionerKind::none}) {
    std::string candidate = to_string(k);
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (candidate == up) return k;
  }
  throw ContractViolation("unknown preconditioner '" + name + "'");
}

bool uses_shifted_gram(PreconditionerKind kind) noexcept {
  return kind == PreconditionerKind::ibs1 || kind == PreconditionerKind::ibs2 ||
         kind == PreconditionerKind::ibs3 || kind == PreconditionerKind::ibs4;
}

namespace {

// Which of the four application shapes a kind follows.
enum class Shape { diagonal, upper_a2, upper_a1, upper_both, identity };

Shape shape_of(PreconditionerKind kind) {
  switch (kind) {
    case PreconditionerKind::ibs1:
    case PreconditionerKind::bs1: return Shape::diagonal;
    case PreconditionerKind::ibs2:
    case PreconditionerKind::bs2: return Shape::upper_a2;
    case PreconditionerKind::ibs3:
    case PreconditionerKind::bs3: return Shape::upper_a1;
    case PreconditionerKind::ibs4:
    case PreconditionerKind::but: return Shape::upper_both;
    case PreconditionerKind::none: return Shape::identity;
  }
  return Shape::identity;
}

}  // namespace

BlockPreconditioner::BlockPreconditioner(const IlsProblem& prob, PreconditionerKind kind,
                                         InnerSolverMode mode)
    : prob_(&prob),
      kind_(kind),
      mode_(mode),
      shift_(uses_shifted_gram(kind) ? prob.alpha() : 0.0),
      counters_(std::make_unique<Counters>()) {
  if (kind_ == PreconditionerKind::none) return;
  if (mode_.type == InnerSolverMode::Type::dense_cholesky) {
    if (prob.n() > mode_.dense_cap) {
      throw ConfigurationError("dense inner solves requested for n = " +
                               std::to_string(prob.n()) + " above the cap " +
                               std::to_string(mode_.dense_cap));
    }
    DenseMatrix inner = dense_gram(prob);
    add_to_diagonal(inner, shift_);
    auto outcome = dense_cholesky(inner);
    if (!outcome.is_spd()) {
      throw ConfigurationError("dense inner factorization of " +
                               std::string(shift_ > 0.0 ? "P_hat" : "P") +
                               " failed at pivot " + std::to_string(outcome.failed_pivot));
    }
    factor_ = std::move(outcome.factor);
  } else {
    mode_.cg.validate();
    const IlsProblem* pr = prob_;
    const double shift = shift_;
    inner_op_ = LinearOperator(prob.n(), prob.n(),
                               [pr, shift](std::span<const double> v, std::span<double> y) {
                                 apply_shifted_gram(*pr, shift, v, y);
                               });
  }
}

void BlockPreconditioner::inner_solve(std::span<const double> rhs, std::span<double> out) const {
  if (factor_) {
    std::copy(rhs.begin(), rhs.end(), out.begin());
    cholesky_solve_in_place(*factor_, out);
    return;
  }
  const Vector zero(rhs.size(), 0.0);
  auto result = cg_solve(inner_op_, rhs, zero, mode_.cg);
  counters_->inner_iterations += result.report.iterations;
  if (!result.report.converged) ++counters_->inner_nonconverged;
  std::copy(result.x.begin(), result.x.end(), out.begin());
}

void BlockPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const BlockLayout l = prob_->layout();
  require_same_size(r.size(), l.size(), "BlockPreconditioner::apply: r");
  require_same_size(z.size(), l.size(), "BlockPreconditioner::apply: z");
  ++counters_->applications;

  const auto r1 = r.subspan(0, l.p);
  const auto r2 = r.subspan(l.x_offset(), l.n);
  const auto r3 = r.subspan(l.d2_offset(), l.q);
  auto z1 = z.subspan(0, l.p);
  auto z2 = z.subspan(l.x_offset(), l.n);
  auto z3 = z.subspan(l.d2_offset(), l.q);

  const Shape shape = shape_of(kind_);
  if (shape == Shape::identity) {
    std::copy(r.begin(), r.end(), z.begin());
    return;
  }

  std::copy(r3.begin(), r3.end(), z3.begin());

  Vector inner_rhs(r2.begin(), r2.end());
  if (shape == Shape::upper_a2 || shape == Shape::upper_both) {
    Vector a2t(l.n);
    prob_->a2().apply_transpose(z3, a2t);
    for (std::size_t i = 0; i < l.n; ++i) inner_rhs[i] -= a2t[i];
  }
  inner_solve(inner_rhs, z2);

  if (shape == Shape::upper_a1 || shape == Shape::upper_both) {
    Vector a1z(l.p);
    prob_->a1().apply(z2, a1z);
    for (std::size_t i = 0; i < l.p; ++i) z1[i] = r1[i] - a1z[i];
  } else {
    std::copy(r1.begin(), r1.end(), z1.begin());
  }
}

BlockVector BlockPreconditioner::apply(const BlockVector& r) const {
  if (r.layout() != prob_->layout()) {
    throw ContractViolation("BlockPreconditioner::apply: layout mismatch");
  }
  BlockVector z(prob_->layout());
  apply(r.flat(), z.flat());
  return z;
}

RightPreconditioner BlockPreconditioner::as_right_preconditioner() const {
  return [this](std::span<const double> r, std::span<double> z) { apply(r, z); };
}

PreconditionerStats BlockPreconditioner::stats() const noexcept {
  return {counters_->applications.load(), counters_->inner_iterations.load(),
          counters_->inner_nonconverged.load()};
}

void BlockPreconditioner::reset_stats() noexcept {
  counters_->applications = 0;
  counters_->inner_iterations = 0;
  counters_->inner_nonconverged = 0;
}

BlockVector apply_preconditioner(PreconditionerKind kind, const InnerSolverMode& inner,
                                 const IlsProblem& prob, const BlockVector& r) {
  return BlockPreconditioner(prob, kind, inner).apply(r);
}

DenseMatrix assemble_dense_preconditioned(PreconditionerKind kind, const IlsProblem& prob) {
  const std::size_t size = prob.layout().size();
  if (size > kDenseAssemblyCap) {
    throw ConfigurationError("assemble_dense_preconditioned: p + n + q = " +
                             std::to_string(size) + " exceeds " +
                             std::to_string(kDenseAssemblyCap));
  }
  return to_dense(preconditioned_operator(kind, prob));
}

LinearOperator preconditioned_operator(PreconditionerKind kind, const IlsProblem& prob) {
  auto precond = std::make_shared<const BlockPreconditioner>(prob, kind, InnerSolverMode::dense());
  const IlsProblem* pr = &prob;
  const std::size_t size = prob.layout().size();
  return {size, size, [pr, precond, size](std::span<const double> v, std::span<double> y) {
            Vector av(size);
            apply_block_a(*pr, v, av);
            precond->apply(av, y);
          }};
}

}  // namespace ils
