#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "ils/dense_matrix.hpp"
#include "ils/ils_problem.hpp"
#include "ils/krylov.hpp"

namespace ils {

/// IBS1..IBS4 use P_hat = alpha I + P for the inner solves; the baseline
/// BS1..BS3 and BUT splittings use P itself.
enum class PreconditionerKind { ibs1, ibs2, ibs3, ibs4, bs1, bs2, bs3, but, none };

[[nodiscard]] std::string to_string(PreconditionerKind kind);
/// Accepts the names printed by to_string, case-insensitively.
[[nodiscard]] PreconditionerKind parse_preconditioner_kind(const std::string& name);
[[nodiscard]] bool uses_shifted_gram(PreconditionerKind kind) noexcept;

struct InnerSolverMode {
  enum class Type { cg, dense_cholesky };

  Type type = Type::cg;
  CgConfig cg;
  /// Largest n for which the dense factorization is allowed.
  std::size_t dense_cap = 4000;

  static InnerSolverMode with_cg(CgConfig cfg = {}) { return {Type::cg, cfg, 4000}; }
  static InnerSolverMode dense(std::size_t cap = 4000) { return {Type::dense_cholesky, {}, cap}; }
};

struct PreconditionerStats {
  std::size_t applications = 0;
  std::size_t inner_iterations = 0;
  std::size_t inner_nonconverged = 0;
};

/// z = M^{-1} r for one block splitting M of calA.
///
///   IBS1/BS1: z1 = r1;            S z2 = r2;              z3 = r3
///   IBS2/BS2: z1 = r1; z3 = r3;   S z2 = r2 - A2^T z3
///   IBS3/BS3: S z2 = r2;          z1 = r1 - A1 z2;        z3 = r3
///   IBS4/BUT: z3 = r3;            S z2 = r2 - A2^T z3;    z1 = r1 - A1 z2
///
/// with S = P_hat for IBS kinds and S = P for the baselines. Inner solves are
/// either matrix-free CG from a zero start or a precomputed dense Cholesky
/// factor. Inner CG non-convergence is counted, not fatal.
///
/// Holds a reference to `prob`, which must outlive the preconditioner.
/// apply() is safe to call concurrently; the counters are atomic.
class BlockPreconditioner {
public:
  BlockPreconditioner(const IlsProblem& prob, PreconditionerKind kind, InnerSolverMode mode);

  [[nodiscard]] PreconditionerKind kind() const noexcept { return kind_; }
  /// alpha for IBS kinds, 0 for the baselines.
  [[nodiscard]] double inner_shift() const noexcept { return shift_; }

  void apply(std::span<const double> r, std::span<double> z) const;
  [[nodiscard]] BlockVector apply(const BlockVector& r) const;

  [[nodiscard]] RightPreconditioner as_right_preconditioner() const;

  [[nodiscard]] PreconditionerStats stats() const noexcept;
  void reset_stats() noexcept;

private:
  void inner_solve(std::span<const double> rhs, std::span<double> out) const;

  struct Counters {
    std::atomic<std::size_t> applications{0};
    std::atomic<std::size_t> inner_iterations{0};
    std::atomic<std::size_t> inner_nonconverged{0};
  };

  const IlsProblem* prob_;
  PreconditionerKind kind_;
  InnerSolverMode mode_;
  double shift_;
  LinearOperator inner_op_;
  std::optional<CholeskyFactor> factor_;
  std::unique_ptr<Counters> counters_;
};

[[nodiscard]] BlockVector apply_preconditioner(PreconditionerKind kind,
                                               const InnerSolverMode& inner,
                                               const IlsProblem& prob, const BlockVector& r);

/// Largest p + n + q accepted by assemble_dense_preconditioned.
inline constexpr std::size_t kDenseAssemblyCap = 2000;

/// Dense M^{-1} calA, one column per unit vector, with exact (dense Cholesky)
/// inner solves. kind = none yields calA itself.
[[nodiscard]] DenseMatrix assemble_dense_preconditioned(PreconditionerKind kind,
                                                        const IlsProblem& prob);

/// Matrix-free M^{-1} calA with exact inner solves; keeps its own preconditioner.
[[nodiscard]] LinearOperator preconditioned_operator(PreconditionerKind kind,
                                                     const IlsProblem& prob);

}  // namespace ils
