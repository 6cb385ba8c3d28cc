#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "ils/csr_matrix.hpp"
#include "ils/dense_matrix.hpp"
#include "ils/linear_operator.hpp"
#include "ils/vector_ops.hpp"

namespace ils {

/// Sizes of the (d1; x; d2) blocks: p, n and q entries.
struct BlockLayout {
  std::size_t p = 0;
  std::size_t n = 0;
  std::size_t q = 0;

  [[nodiscard]] std::size_t size() const noexcept { return p + n + q; }
  [[nodiscard]] std::size_t x_offset() const noexcept { return p; }
  [[nodiscard]] std::size_t d2_offset() const noexcept { return p + n; }

  bool operator==(const BlockLayout&) const = default;
};

/// One contiguous buffer viewed as (d1; x; d2).
class BlockVector {
public:
  BlockVector() = default;
  explicit BlockVector(BlockLayout layout) : layout_(layout), data_(layout.size(), 0.0) {}
  BlockVector(BlockLayout layout, Vector data);
  static BlockVector from_parts(std::span<const double> d1, std::span<const double> x,
                                std::span<const double> d2);

  [[nodiscard]] const BlockLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] std::span<const double> flat() const noexcept { return data_; }
  [[nodiscard]] std::span<double> flat() noexcept { return data_; }

  [[nodiscard]] std::span<const double> d1() const noexcept { return flat().subspan(0, layout_.p); }
  [[nodiscard]] std::span<const double> x() const noexcept {
    return flat().subspan(layout_.x_offset(), layout_.n);
  }
  [[nodiscard]] std::span<const double> d2() const noexcept {
    return flat().subspan(layout_.d2_offset(), layout_.q);
  }
  [[nodiscard]] std::span<double> d1() noexcept { return flat().subspan(0, layout_.p); }
  [[nodiscard]] std::span<double> x() noexcept {
    return flat().subspan(layout_.x_offset(), layout_.n);
  }
  [[nodiscard]] std::span<double> d2() noexcept {
    return flat().subspan(layout_.d2_offset(), layout_.q);
  }

private:
  BlockLayout layout_;
  Vector data_;
};

/// Partitioned indefinite least squares data: A = (A1; A2), b = (b1; b2) with
/// the +I_p / -I_q signature, and the shift alpha of P_hat = alpha I + A1^T A1.
class IlsProblem {
public:
  IlsProblem(StoredMatrix a1, StoredMatrix a2, Vector b1, Vector b2, double alpha);

  [[nodiscard]] const StoredMatrix& a1() const noexcept { return a1_; }
  [[nodiscard]] const StoredMatrix& a2() const noexcept { return a2_; }
  [[nodiscard]] std::span<const double> b1() const noexcept { return b1_; }
  [[nodiscard]] std::span<const double> b2() const noexcept { return b2_; }
  [[nodiscard]] std::size_t p() const noexcept { return a1_.n_rows(); }
  [[nodiscard]] std::size_t q() const noexcept { return a2_.n_rows(); }
  [[nodiscard]] std::size_t n() const noexcept { return a1_.n_cols(); }
  [[nodiscard]] std::size_t m() const noexcept { return p() + q(); }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] BlockLayout layout() const noexcept { return {p(), n(), q()}; }

  /// Same data with a different shift.
  [[nodiscard]] IlsProblem with_alpha(double alpha) const;

  /// "m x n" label used in reports, e.g. "10340x340".
  [[nodiscard]] std::string size_label() const;

private:
  StoredMatrix a1_;
  StoredMatrix a2_;
  Vector b1_;
  Vector b2_;
  double alpha_;
};

/// alpha = ||A1||_1^2. Throws DegenerateInput for a zero matrix.
[[nodiscard]] double compute_alpha(const StoredMatrix& a1);

/// Either the default alpha = ||A1||_1^2 or an explicit nonnegative value.
struct AlphaPolicy {
  std::optional<double> value;

  static AlphaPolicy one_norm_squared() { return {}; }
  static AlphaPolicy fixed(double alpha) { return {alpha}; }
  [[nodiscard]] double resolve(const StoredMatrix& a1) const;
};

/// A1 = first p rows of A, A2 = last q rows; b split likewise.
[[nodiscard]] IlsProblem partition_problem(const SparseMatrixCsr& a, std::span<const double> b,
                                           std::size_t p, std::size_t q, AlphaPolicy policy);

/// out = calA * v, with calA = [[I, A1, 0], [0, P, A2^T], [0, A2, I]], P never formed.
void apply_block_a(const IlsProblem& prob, std::span<const double> v, std::span<double> out);
[[nodiscard]] BlockVector apply_block_a(const IlsProblem& prob, const BlockVector& v);

/// (b1; A1^T b1; b2)
[[nodiscard]] BlockVector build_rhs(const IlsProblem& prob);

/// y = shift * v + A1^T (A1 v). shift = 0 gives P, shift = alpha gives P_hat.
void apply_shifted_gram(const IlsProblem& prob, double shift, std::span<const double> v,
                        std::span<double> y);
/// y = A1^T (A1 v) - A2^T (A2 v)
void apply_normal_matrix(const IlsProblem& prob, std::span<const double> v, std::span<double> y);

enum class BlockRole {
  full_system,    // calA
  gram,           // P = A1^T A1
  shifted_gram,   // P_hat = alpha I + P
  normal_matrix,  // P - A2^T A2 = A^T H A
};

/// Matrix-free operator for one of the roles. Captures `prob` by reference:
/// the problem must outlive the operator.
[[nodiscard]] LinearOperator block_operator(const IlsProblem& prob, BlockRole role);

/// Dense P = A1^T A1 and A2^T A2 (desk scale).
[[nodiscard]] DenseMatrix dense_gram(const IlsProblem& prob);
[[nodiscard]] DenseMatrix dense_a2_gram(const IlsProblem& prob);
/// A^T H b = A1^T b1 - A2^T b2
[[nodiscard]] Vector normal_rhs(const IlsProblem& prob);

enum class OracleMode { dense_cholesky, tight_cg };

enum class Definiteness { positive, negative, indefinite };

[[nodiscard]] std::string to_string(OracleMode mode);
[[nodiscard]] std::string to_string(Definiteness d);

struct OracleSolution {
  Vector x;
  OracleMode mode = OracleMode::dense_cholesky;
  /// Definiteness of P - A2^T A2, certified by the dense mode only. Anything
  /// but positive means the unique-minimizer assumption of the ILS problem
  /// fails; x still solves the normal equations.
  std::optional<Definiteness> definiteness;
  std::size_t cg_iterations = 0;
};

/// Dense oracle for n up to this size; matrix-free CG above.
inline constexpr std::size_t kDenseOracleCap = 4000;

[[nodiscard]] OracleMode default_oracle_mode(const IlsProblem& prob);

/// Solves the normal equations (A1^T A1 - A2^T A2) x = A1^T b1 - A2^T b2.
///
/// dense_cholesky: Cholesky of M; if that fails, of -M; if that fails too,
/// partial-pivoting LU. tight_cg: CG (rel. tol 1e-14, at most 10 n steps) on
/// M, then -M, then M^2 x = M c, moving on when an attempt breaks down or
/// stalls. Throws OracleFailure when every CG form fails or LU hits a singular
/// pivot.
[[nodiscard]] OracleSolution exact_solution_oracle(const IlsProblem& prob, OracleMode mode);

/// ||x - x*|| / ||x*||
[[nodiscard]] double relative_error(std::span<const double> x, std::span<const double> exact);

}  // namespace ils
