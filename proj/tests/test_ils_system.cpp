#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ils/bench.hpp"
#include "ils/errors.hpp"
#include "ils/ils_problem.hpp"
#include "test_support.hpp"

using namespace ils;
using ils::testing::assemble_block_dense;
using ils::testing::random_vector;

namespace {

IlsProblem scalar_problem() {
  return IlsProblem(DenseMatrix(1, 1, {2.0}), DenseMatrix(1, 1, {1.0}), Vector{3.0}, Vector{0.0},
                    4.0);
}

}  // namespace

TEST(Partition, SplitsRowsAndRhs) {
  const auto prob = partition_problem(SparseMatrixCsr::identity(4), Vector{1, 2, 3, 4}, 2, 2,
                                      AlphaPolicy::one_norm_squared());
  EXPECT_EQ(prob.p(), 2u);
  EXPECT_EQ(prob.q(), 2u);
  EXPECT_EQ(prob.n(), 4u);
  EXPECT_EQ(prob.a1().to_dense()(1, 1), 1.0);
  EXPECT_EQ(prob.a2().to_dense()(0, 2), 1.0);
  EXPECT_EQ(prob.a2().to_dense()(1, 3), 1.0);
  EXPECT_EQ(Vector(prob.b1().begin(), prob.b1().end()), (Vector{1, 2}));
  EXPECT_EQ(Vector(prob.b2().begin(), prob.b2().end()), (Vector{3, 4}));
  EXPECT_EQ(prob.alpha(), 1.0);
  EXPECT_EQ(prob.size_label(), "4x4");
}

TEST(Partition, Errors) {
  const auto a = SparseMatrixCsr::identity(4);
  const Vector b(4, 1.0);
  EXPECT_THROW((void)partition_problem(a, b, 2, 1, AlphaPolicy::one_norm_squared()),
               ContractViolation);
  EXPECT_THROW((void)partition_problem(a, b, 4, 0, AlphaPolicy::one_norm_squared()),
               DegenerateInput);
  EXPECT_THROW((void)partition_problem(a, b, 0, 4, AlphaPolicy::one_norm_squared()),
               DegenerateInput);
  EXPECT_THROW((void)partition_problem(a, Vector(3), 2, 2, AlphaPolicy::one_norm_squared()),
               ContractViolation);
  const auto fixed = partition_problem(a, b, 2, 2, AlphaPolicy::fixed(0.0));
  EXPECT_EQ(fixed.alpha(), 0.0);
}

TEST(ComputeAlpha, Examples) {
  EXPECT_EQ(compute_alpha(SparseMatrixCsr::identity(3)), 1.0);
  EXPECT_EQ(compute_alpha(DenseMatrix(1, 1, {2.0})), 4.0);
  EXPECT_EQ(compute_alpha(SparseMatrixCsr::identity(3).scaled(0.5)), 0.25);
  EXPECT_THROW((void)compute_alpha(SparseMatrixCsr(2, 2, {0, 0, 0}, {}, {})), DegenerateInput);
  std::mt19937_64 rng(1);
  const auto a = ils::testing::random_sparse(10, 6, 0.5, rng);
  EXPECT_NEAR(compute_alpha(normalize_to_unit_one_norm(a)), 1.0, 1e-15);
}

TEST(BlockOperator, ZeroXAnnihilatesA1Terms) {
  std::mt19937_64 rng(2);
  const auto prob = ils::testing::random_sparse_problem(5, 3, 4, rng);
  BlockVector v(prob.layout());
  const auto d1 = random_vector(5, rng);
  const auto d2 = random_vector(3, rng);
  std::copy(d1.begin(), d1.end(), v.d1().begin());
  std::copy(d2.begin(), d2.end(), v.d2().begin());
  const BlockVector out = apply_block_a(prob, v);
  EXPECT_EQ(Vector(out.d1().begin(), out.d1().end()), d1);
  EXPECT_EQ(Vector(out.d2().begin(), out.d2().end()), d2);
  const Vector a2t = prob.a2().apply_transpose(d2);
  EXPECT_LE(ils::testing::max_abs_diff(out.x(), a2t), 1e-15);
}

TEST(BlockOperator, MatchesDenseAssemblyOnRandomInstances) {
  std::mt19937_64 rng(2025);
  std::uniform_int_distribution<std::size_t> dim(1, 30);
  for (int trial = 0; trial < 50; ++trial) {
    const auto prob =
        ils::testing::random_sparse_problem(dim(rng), dim(rng), dim(rng), rng, 0.4);
    const DenseMatrix dense = assemble_block_dense(prob);
    const auto v = random_vector(prob.layout().size(), rng);
    Vector got(v.size());
    apply_block_a(prob, v, got);
    EXPECT_LE(ils::testing::rel_diff(got, matvec(dense, v)), 1e-13) << "trial " << trial;
  }
}

TEST(BlockOperator, RejectsMismatchedVector) {
  const auto prob = scalar_problem();
  Vector out(3);
  EXPECT_THROW(apply_block_a(prob, Vector(4), out), ContractViolation);
  EXPECT_THROW((void)apply_block_a(prob, BlockVector(BlockLayout{1, 1, 2})), ContractViolation);
}

TEST(BlockOperator, ShiftedGramIsShiftPlusGram) {
  std::mt19937_64 rng(3);
  const auto prob = ils::testing::random_sparse_problem(9, 4, 6, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const auto v = random_vector(6, rng);
    Vector pv(6), phv(6);
    apply_shifted_gram(prob, 0.0, v, pv);
    apply_shifted_gram(prob, prob.alpha(), v, phv);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(phv[i], prob.alpha() * v[i] + pv[i]);
  }
  const LinearOperator phat = block_operator(prob, BlockRole::shifted_gram);
  const LinearOperator p = block_operator(prob, BlockRole::gram);
  const auto v = random_vector(6, rng);
  const auto a = phat.apply(v);
  const auto b = p.apply(v);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(a[i], prob.alpha() * v[i] + b[i]);
}

TEST(BlockOperator, NormalMatrixRole) {
  std::mt19937_64 rng(4);
  const auto prob = ils::testing::random_sparse_problem(7, 5, 4, rng);
  const DenseMatrix m = combine(1.0, dense_gram(prob), -1.0, dense_a2_gram(prob));
  const auto v = random_vector(4, rng);
  EXPECT_LE(ils::testing::rel_diff(block_operator(prob, BlockRole::normal_matrix).apply(v),
                                   matvec(m, v)),
            1e-13);
}

TEST(BuildRhs, Examples) {
  const auto zero = IlsProblem(SparseMatrixCsr::identity(2), SparseMatrixCsr::identity(2),
                               Vector{0, 0}, Vector{0, 0}, 1.0);
  const BlockVector z = build_rhs(zero);
  for (double t : z.flat()) EXPECT_EQ(t, 0.0);

  const auto id = IlsProblem(SparseMatrixCsr::identity(2), SparseMatrixCsr::identity(2),
                             Vector{1, 2}, Vector{0, 0}, 1.0);
  const auto r = build_rhs(id);
  EXPECT_EQ(Vector(r.x().begin(), r.x().end()), (Vector{1, 2}));

  std::mt19937_64 rng(5);
  const auto core = ils::testing::random_sparse(12, 5, 0.4, rng);
  const auto prob = generate_augmented_problem(core, 3, 6.0);
  const auto rhs = build_rhs(prob);
  const DenseMatrix d = DenseMatrix::from_sparse(core);
  for (std::size_t j = 0; j < 5; ++j) {
    double col_sum = 0.0;
    for (std::size_t i = 0; i < 12; ++i) col_sum += d(i, j);
    EXPECT_NEAR(rhs.x()[j], col_sum, 1e-14);
  }
}

TEST(Oracle, IdentityA1AndZeroA2GivesB1) {
  const auto prob = IlsProblem(SparseMatrixCsr::identity(3),
                               SparseMatrixCsr::rectangular_identity(2, 3, 0.0), Vector{1, -2, 3},
                               Vector{5, 6}, 1.0);
  for (const auto mode : {OracleMode::dense_cholesky, OracleMode::tight_cg}) {
    const auto sol = exact_solution_oracle(prob, mode);
    EXPECT_LE(ils::testing::max_abs_diff(sol.x, Vector{1, -2, 3}), 1e-14);
  }
}

TEST(Oracle, ScalarNormalEquation) {
  const auto sol = exact_solution_oracle(scalar_problem(), OracleMode::dense_cholesky);
  ASSERT_EQ(sol.x.size(), 1u);
  EXPECT_NEAR(sol.x[0], 2.0, 1e-15);
  ASSERT_TRUE(sol.definiteness);
  EXPECT_EQ(*sol.definiteness, Definiteness::positive);
  EXPECT_NEAR(exact_solution_oracle(scalar_problem(), OracleMode::tight_cg).x[0], 2.0, 1e-13);
}

TEST(Oracle, LiftedSolutionSatisfiesBlockSystem) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    RandomProblemOptions o;
    o.p = 12;
    o.q = 6;
    o.n = 7;
    o.seed = 100 + trial;
    const auto prob = generate_random_problem(o);
    const auto sol = exact_solution_oracle(prob, OracleMode::dense_cholesky);
    const Vector ax1 = prob.a1().apply(sol.x);
    const Vector ax2 = prob.a2().apply(sol.x);
    BlockVector v(prob.layout());
    for (std::size_t i = 0; i < prob.p(); ++i) v.d1()[i] = prob.b1()[i] - ax1[i];
    std::copy(sol.x.begin(), sol.x.end(), v.x().begin());
    for (std::size_t i = 0; i < prob.q(); ++i) v.d2()[i] = prob.b2()[i] - ax2[i];
    const auto rhs = build_rhs(prob);
    EXPECT_LE(ils::testing::rel_diff(apply_block_a(prob, v).flat(), rhs.flat()), 1e-10);
  }
}

TEST(Oracle, IndefiniteNormalMatrixIsReported) {
  RandomProblemOptions o;
  o.p = 10;
  o.q = 8;
  o.n = 6;
  o.theta = 4.0;
  const auto prob = generate_random_problem(o);
  const auto sol = exact_solution_oracle(prob, OracleMode::dense_cholesky);
  ASSERT_TRUE(sol.definiteness);
  EXPECT_NE(*sol.definiteness, Definiteness::positive);
  const DenseMatrix m = combine(1.0, dense_gram(prob), -1.0, dense_a2_gram(prob));
  EXPECT_LE(ils::testing::rel_diff(matvec(m, sol.x), normal_rhs(prob)), 1e-10);
}

TEST(Oracle, DenseAndCgAgreeOnHilbert400) {
  const auto prob = generate_hilbert_problem(400, 0.7);
  const auto dense = exact_solution_oracle(prob, OracleMode::dense_cholesky);
  const auto cg = exact_solution_oracle(prob, OracleMode::tight_cg);
  EXPECT_LE(relative_error(cg.x, dense.x), 1e-6);
}

TEST(Oracle, DefaultModeFollowsCap) {
  EXPECT_EQ(default_oracle_mode(scalar_problem()), OracleMode::dense_cholesky);
  const auto big = IlsProblem(SparseMatrixCsr::identity(4001), SparseMatrixCsr::identity(4001),
                              Vector(4001, 1.0), Vector(4001, 0.0), 1.0);
  EXPECT_EQ(default_oracle_mode(big), OracleMode::tight_cg);
}
