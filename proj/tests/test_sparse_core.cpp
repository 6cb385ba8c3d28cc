#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "ils/csr_matrix.hpp"
#include "ils/dense_matrix.hpp"
#include "ils/errors.hpp"
#include "ils/linear_operator.hpp"
#include "ils/matrix_market.hpp"
#include "test_support.hpp"

using namespace ils;
using ils::testing::random_dense;
using ils::testing::random_sparse;
using ils::testing::random_spd;
using ils::testing::random_vector;

namespace {

SparseMatrixCsr two_by_two() {
  return SparseMatrixCsr::from_triplets(2, 2, {{0, 0, 1}, {0, 1, 2}, {1, 0, 3}, {1, 1, 4}});
}

SparseMatrixCsr parse(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix_market(in);
}

}  // namespace

TEST(Csr, ConstructorRejectsBrokenInvariants) {
  EXPECT_THROW(SparseMatrixCsr(2, 2, {0, 1}, {0}, {1.0}), ContractViolation);
  EXPECT_THROW(SparseMatrixCsr(2, 2, {0, 2, 1}, {0, 1}, {1.0, 1.0}), ContractViolation);
  EXPECT_THROW(SparseMatrixCsr(1, 2, {0, 2}, {1, 0}, {1.0, 1.0}), ContractViolation);
  EXPECT_THROW(SparseMatrixCsr(1, 2, {0, 1}, {2}, {1.0}), BoundsError);
  EXPECT_THROW(SparseMatrixCsr(1, 2, {0, 1}, {0}, {0.0}), ContractViolation);
  EXPECT_NO_THROW(SparseMatrixCsr(1, 2, {0, 2}, {0, 1}, {1.0, 2.0}));
}

TEST(Csr, FromTripletsSumsDuplicatesAndDropsZeros) {
  const auto a = SparseMatrixCsr::from_triplets(
      2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 2, 3.0}, {0, 0, 1.0}, {0, 0, -1.0}});
  EXPECT_EQ(a.nnz(), 2u);
  EXPECT_EQ(a.at(0, 1), 2.0);
  EXPECT_EQ(a.at(1, 2), 4.0);
  EXPECT_EQ(a.at(0, 0), 0.0);
  EXPECT_THROW((void)SparseMatrixCsr::from_triplets(2, 2, {{2, 0, 1.0}}), BoundsError);
}

TEST(Csr, TripletRoundTripPreservesMultiset) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<Index> idx(0, 5);
    std::vector<Triplet> t;
    std::map<std::pair<Index, Index>, double> expected;
    for (int k = 0; k < 30; ++k) {
      const Index i = idx(rng);
      const Index j = idx(rng);
      const double v = static_cast<double>(k % 7) - 3.0;
      t.push_back({i, j, v});
      expected[{i, j}] += v;
    }
    const auto a = SparseMatrixCsr::from_triplets(6, 6, t);
    std::map<std::pair<Index, Index>, double> got;
    for (const auto& e : a.to_triplets()) got[{e.row, e.col}] = e.value;
    std::erase_if(expected, [](const auto& kv) { return kv.second == 0.0; });
    EXPECT_EQ(got, expected);
  }
}

TEST(Csr, SpmvExamples) {
  const Vector x{1, 2, 3};
  EXPECT_EQ(spmv(SparseMatrixCsr::identity(3), x), x);
  const SparseMatrixCsr empty(2, 3, {0, 0, 0}, {}, {});
  EXPECT_EQ(spmv(empty, x), (Vector{0, 0}));
  EXPECT_EQ(spmv(two_by_two(), Vector{1, -1}), (Vector{-1, -1}));
  EXPECT_EQ(spmv_transpose(two_by_two(), Vector{1, -1}), (Vector{-2, -2}));
  EXPECT_EQ(spmv_transpose(SparseMatrixCsr::identity(3), x), x);
  EXPECT_THROW((void)spmv(two_by_two(), x), ContractViolation);
  EXPECT_THROW((void)spmv_transpose(two_by_two(), x), ContractViolation);
}

TEST(Csr, SpmvMatchesDenseTripleLoop) {
  std::mt19937_64 rng(11);
  const auto a = random_sparse(9, 6, 0.4, rng);
  const auto x = random_vector(6, rng);
  const DenseMatrix d = DenseMatrix::from_sparse(a);
  Vector y(9, 0.0);
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 6; ++j) y[i] += d(i, j) * x[j];
  }
  EXPECT_LE(ils::testing::max_abs_diff(spmv(a, x), y), 1e-14);
}

TEST(Csr, AdjointIdentityOnRandomInstances) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(1, 30);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = dim(rng);
    const std::size_t n = dim(rng);
    const auto a = random_sparse(m, n, 0.3, rng);
    const auto x = random_vector(n, rng);
    const auto y = random_vector(m, rng);
    const double lhs = dot(spmv(a, x), y);
    const double rhs = dot(x, spmv_transpose(a, y));
    const double scale = norm2(spmv(a, x)) * norm2(y) + 1e-300;
    EXPECT_LE(std::fabs(lhs - rhs) / scale, 1e-13) << "trial " << trial;
  }
}

TEST(Csr, OneNormAndNormalization) {
  EXPECT_EQ(one_norm(SparseMatrixCsr::identity(5)), 1.0);
  EXPECT_EQ(one_norm(two_by_two()), 6.0);
  const auto two_i = SparseMatrixCsr::identity(2).scaled(2.0);
  const auto n = normalize_to_unit_one_norm(two_i);
  EXPECT_EQ(n.at(0, 0), 1.0);
  EXPECT_EQ(n.at(1, 1), 1.0);
  const auto unchanged = normalize_to_unit_one_norm(SparseMatrixCsr::identity(3));
  EXPECT_EQ(unchanged.at(2, 2), 1.0);
  EXPECT_THROW((void)normalize_to_unit_one_norm(SparseMatrixCsr(2, 2, {0, 0, 0}, {}, {})),
               DegenerateInput);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_sparse(12, 9, 0.5, rng);
    if (a.nnz() == 0) continue;
    EXPECT_NEAR(one_norm(normalize_to_unit_one_norm(a)), 1.0, 1e-15);
  }
}

TEST(Csr, RectangularIdentityPattern) {
  const auto tall = SparseMatrixCsr::rectangular_identity(5, 3, 6.0);
  EXPECT_EQ(tall.nnz(), 3u);
  EXPECT_EQ(tall.at(2, 2), 6.0);
  EXPECT_EQ(tall.at(4, 2), 0.0);
  const auto wide = SparseMatrixCsr::rectangular_identity(2, 4, 1.0);
  EXPECT_EQ(wide.nnz(), 2u);
  EXPECT_EQ(SparseMatrixCsr::rectangular_identity(3, 3, 0.0).nnz(), 0u);
}

TEST(MatrixMarket, CoordinateGeneral) {
  const auto a = parse(
      "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 3.0\n2 1 -1.0\n");
  EXPECT_EQ(a.n_rows(), 2);
  EXPECT_EQ(a.nnz(), 2u);
  EXPECT_EQ(a.at(0, 0), 3.0);
  EXPECT_EQ(a.at(1, 0), -1.0);
}

TEST(MatrixMarket, SymmetricIsMirrored) {
  const auto a = parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1.0\n2 1 5.0\n");
  EXPECT_EQ(a.nnz(), 3u);
  EXPECT_EQ(a.at(0, 0), 1.0);
  EXPECT_EQ(a.at(1, 0), 5.0);
  EXPECT_EQ(a.at(0, 1), 5.0);
}

TEST(MatrixMarket, IntegerAndArrayFormats) {
  const auto a = parse("%%MatrixMarket matrix coordinate integer general\n1 2 2\n1 1 4\n1 2 -2\n");
  EXPECT_EQ(a.at(0, 1), -2.0);
  const auto b = parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
  EXPECT_EQ(b.at(0, 0), 1.0);
  EXPECT_EQ(b.at(1, 0), 2.0);
  EXPECT_EQ(b.at(0, 1), 3.0);
  const auto c = parse("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n");
  EXPECT_EQ(c.at(0, 1), 2.0);
  EXPECT_EQ(c.at(1, 1), 3.0);
}

TEST(MatrixMarket, DuplicatesAreSummed) {
  const auto a = parse("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n1 1 2\n2 2 1\n");
  EXPECT_EQ(a.at(0, 0), 3.0);
}

TEST(MatrixMarket, ErrorsNameTokenAndLine) {
  try {
    (void)parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
    FAIL() << "complex field accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("complex"), std::string::npos);
  }
  try {
    (void)parse("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n");
    FAIL() << "pattern field accepted";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("pattern"), std::string::npos);
  }
  try {
    (void)parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 x 1.0\n");
    FAIL() << "bad entry accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW((void)parse("%%MatrixMarket vector coordinate real general\n"), ParseError);
  EXPECT_THROW((void)parse("%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1\n"),
               ParseError);
  EXPECT_THROW((void)parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"),
               ParseError);
  EXPECT_THROW((void)parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"),
               BoundsError);
  EXPECT_THROW((void)parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1\n"),
               BoundsError);
}

TEST(MatrixMarket, WriteParseRoundTrip) {
  std::mt19937_64 rng(3);
  const auto a = random_sparse(7, 5, 0.4, rng);
  std::stringstream ss;
  write_matrix_market(ss, a);
  const auto b = parse_matrix_market(ss);
  ASSERT_EQ(b.nnz(), a.nnz());
  for (std::size_t k = 0; k < a.nnz(); ++k) EXPECT_EQ(a.values()[k], b.values()[k]);

  std::stringstream vs;
  write_matrix_market_vector(vs, Vector{1.5, -2.0, 0.0});
  const auto v = parse_matrix_market(vs);
  EXPECT_EQ(v.n_rows(), 3);
  EXPECT_EQ(v.n_cols(), 1);
  EXPECT_EQ(v.at(1, 0), -2.0);
}

TEST(MatrixMarket, MissingFileIsIoError) {
  EXPECT_THROW((void)read_matrix_market("/nonexistent/dir/x.mtx"), IoError);
}

TEST(Cholesky, Examples) {
  const auto id = dense_cholesky(DenseMatrix::identity(3));
  ASSERT_TRUE(id.is_spd());
  EXPECT_EQ(id.factor->lower(1, 1), 1.0);

  const DenseMatrix m(2, 2, {4, 2, 2, 2});
  const auto f = dense_cholesky(m);
  ASSERT_TRUE(f.is_spd());
  EXPECT_DOUBLE_EQ(f.factor->lower(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(f.factor->lower(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(f.factor->lower(1, 1), 1.0);
  EXPECT_EQ(f.factor->lower(0, 1), 0.0);
  const auto z = cholesky_solve(*f.factor, Vector{6, 4});
  EXPECT_NEAR(z[0], 1.0, 1e-15);
  EXPECT_NEAR(z[1], 1.0, 1e-15);
  EXPECT_EQ(cholesky_solve(*id.factor, Vector{1, 2, 3}), (Vector{1, 2, 3}));

  const auto bad = dense_cholesky(DenseMatrix(2, 2, {1, 2, 2, 1}));
  EXPECT_FALSE(bad.is_spd());
  EXPECT_EQ(bad.failed_pivot, 1u);
  EXPECT_THROW((void)dense_cholesky(DenseMatrix(2, 2, {1, 2, 0, 1})), ContractViolation);
  EXPECT_THROW((void)cholesky_solve(*f.factor, Vector{1, 2, 3}), ContractViolation);
}

TEST(Cholesky, ReconstructionOnRandomSpd) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial;
    const DenseMatrix m = random_spd(n, rng, 1e-2);
    const auto f = dense_cholesky(m);
    ASSERT_TRUE(f.is_spd());
    const DenseMatrix& l = f.factor->lower;
    for (std::size_t i = 0; i < n; ++i) EXPECT_GT(l(i, i), 0.0);
    const DenseMatrix llt = multiply(l, l.transposed());
    EXPECT_LE(frobenius_norm(combine(1.0, llt, -1.0, m)) / frobenius_norm(m), 1e-12);
  }
}

TEST(Lu, SolvesNonsymmetricSystem) {
  std::mt19937_64 rng(4);
  const DenseMatrix a = random_dense(12, 12, rng);
  const auto x = random_vector(12, rng);
  const auto b = matvec(a, x);
  const auto got = lu_solve(lu_factor(a), b);
  EXPECT_LE(ils::testing::rel_diff(got, x), 1e-10);
  EXPECT_THROW((void)lu_factor(DenseMatrix(2, 2, {1, 2, 2, 4})), DegenerateInput);
}

TEST(LinearOperator, LinearityAndShapes) {
  std::mt19937_64 rng(8);
  const auto a = random_sparse(6, 4, 0.6, rng);
  const auto op = LinearOperator::from_sparse(a);
  const auto u = random_vector(4, rng);
  const auto v = random_vector(4, rng);
  Vector w(4);
  for (std::size_t i = 0; i < 4; ++i) w[i] = 2.0 * u[i] - 3.0 * v[i];
  const auto au = op.apply(u);
  const auto av = op.apply(v);
  const auto aw = op.apply(w);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(aw[i], 2.0 * au[i] - 3.0 * av[i], 1e-13);
  EXPECT_THROW((void)op.apply(Vector(6)), ContractViolation);
  ASSERT_TRUE(op.has_transpose());
  Vector t(4);
  op.apply_transpose(Vector(6, 1.0), t);
  EXPECT_LE(ils::testing::max_abs_diff(t, spmv_transpose(a, Vector(6, 1.0))), 0.0);
}

TEST(StoredMatrix, DenseAndSparseAgree) {
  std::mt19937_64 rng(12);
  const auto a = random_sparse(5, 3, 0.7, rng);
  const StoredMatrix s(a);
  const StoredMatrix d(DenseMatrix::from_sparse(a));
  const auto x = random_vector(3, rng);
  const auto y = random_vector(5, rng);
  EXPECT_LE(ils::testing::max_abs_diff(s.apply(x), d.apply(x)), 1e-15);
  EXPECT_LE(ils::testing::max_abs_diff(s.apply_transpose(y), d.apply_transpose(y)), 1e-15);
  EXPECT_DOUBLE_EQ(s.one_norm(), d.one_norm());
  EXPECT_LE(frobenius_norm(combine(1.0, s.gram(), -1.0, d.gram())), 1e-13);
}
