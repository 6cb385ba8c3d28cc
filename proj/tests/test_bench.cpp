#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ils/bench.hpp"
#include "ils/eigen.hpp"
#include "ils/errors.hpp"
#include "ils/matrix_market.hpp"
#include "test_support.hpp"

using namespace ils;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / ("ils_bench_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

ExperimentSpec parse(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_spec(in);
}

}  // namespace

TEST(Generators, AugmentedProblemShape) {
  std::mt19937_64 rng(61);
  const auto core = normalize_to_unit_one_norm(ils::testing::random_sparse(20, 8, 0.3, rng));
  for (std::size_t q : {1u, 5u, 8u, 30u}) {
    const auto prob = generate_augmented_problem(core, q, 6.0);
    EXPECT_EQ(prob.m(), 20 + q);
    EXPECT_EQ(prob.n(), 8u);
    EXPECT_EQ(prob.a2().stored_entries(), std::min<std::size_t>(q, 8));
    EXPECT_DOUBLE_EQ(prob.alpha(), 1.0);
    for (double b : prob.b1()) EXPECT_EQ(b, 1.0);
    for (double b : prob.b2()) EXPECT_EQ(b, 1.0);
  }
  EXPECT_THROW((void)generate_augmented_problem(core, 0, 6.0), ContractViolation);
  const auto degenerate = generate_augmented_problem(SparseMatrixCsr::identity(2), 2, 0.0);
  EXPECT_EQ(degenerate.a2().stored_entries(), 0u);
}

TEST(Generators, Hilbert) {
  const auto h2 = generate_hilbert_problem(2, 0.7);
  const DenseMatrix a1 = h2.a1().to_dense();
  EXPECT_EQ(a1(0, 0), 1.0);
  EXPECT_EQ(a1(0, 1), 0.5);
  EXPECT_EQ(a1(1, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(h2.alpha(), 2.25);
  EXPECT_FALSE(h2.a1().is_sparse());
  const auto h400 = generate_hilbert_problem(400, 0.7);
  EXPECT_EQ(h400.size_label(), "800x400");
  EXPECT_EQ(h400.a2().to_dense()(5, 5), 0.7);
  EXPECT_THROW((void)generate_hilbert_problem(2001, 0.7), ConfigurationError);
  EXPECT_THROW((void)generate_hilbert_problem(50, 0.7, 10), ConfigurationError);
}

TEST(Generators, RandomProblemHitsRequestedTheta) {
  for (double theta : {0.3, 0.9, 2.0}) {
    RandomProblemOptions o;
    o.p = 12;
    o.q = 7;
    o.n = 6;
    o.theta = theta;
    const auto prob = generate_random_problem(o);
    const auto lp = symmetric_eigen(dense_gram(prob)).values.front();
    const auto la2 = symmetric_eigen(dense_a2_gram(prob)).values.back();
    EXPECT_NEAR(la2 / lp, theta, 1e-10);
  }
  RandomProblemOptions bad;
  bad.p = 3;
  bad.n = 5;
  EXPECT_THROW((void)generate_random_problem(bad), ContractViolation);
  const auto o = random_desk_options(5, 25);
  EXPECT_GT(o.p, o.n);
  EXPECT_LE(o.p, 25u);
  EXPECT_LE(o.q, 25u);
}

TEST(Spec, ParsesAllKeys) {
  const auto spec = parse(R"(# comment
source = hilbert
n = 40
a2_scale = 0.7
preconditioners = IBS2, ibs4 ,BUT
inner.mode = dense
inner.tol = 1e-4
inner.maxit = 50
outer.tol = 1e-9
outer.maxit = 300
outer.restart = 30
runs = 2
seed = 9
oracle = cg
format = json
normalize = false
theta = 0.4
q = 3
p = 7
out = table.json
)");
  EXPECT_EQ(spec.source, ProblemSource::hilbert);
  EXPECT_EQ(spec.n, 40u);
  EXPECT_EQ(spec.preconditioners.size(), 3u);
  EXPECT_EQ(spec.preconditioners[2], PreconditionerKind::but);
  EXPECT_EQ(spec.inner.type, InnerSolverMode::Type::dense_cholesky);
  EXPECT_EQ(spec.inner.cg.rel_tolerance, 1e-4);
  EXPECT_EQ(spec.inner.cg.max_iterations, 50u);
  EXPECT_EQ(spec.outer.rel_tolerance, 1e-9);
  EXPECT_EQ(spec.outer.max_iterations, 300u);
  EXPECT_EQ(spec.outer.restart, std::optional<std::size_t>(30));
  EXPECT_EQ(spec.runs, 2u);
  EXPECT_EQ(spec.seed, 9u);
  EXPECT_EQ(spec.oracle, std::optional<OracleMode>(OracleMode::tight_cg));
  EXPECT_EQ(spec.format, ReportFormat::json);
  EXPECT_FALSE(spec.normalize);
  EXPECT_EQ(spec.out->string(), "table.json");
}

TEST(Spec, DefaultsMatchExperimentSettings) {
  const ExperimentSpec spec;
  EXPECT_EQ(spec.runs, 5u);
  EXPECT_EQ(spec.inner.cg.rel_tolerance, 1e-3);
  EXPECT_EQ(spec.inner.cg.max_iterations, 1000u);
  EXPECT_EQ(spec.outer.rel_tolerance, 1e-8);
  EXPECT_EQ(spec.outer.max_iterations, 2000u);
  EXPECT_FALSE(spec.outer.restart);
}

TEST(Spec, Errors) {
  EXPECT_THROW((void)parse("bogus = 1\n"), ConfigurationError);
  EXPECT_THROW((void)parse("runs = many\n"), ConfigurationError);
  EXPECT_THROW((void)parse("runs = -1\n"), ConfigurationError);
  EXPECT_THROW((void)parse("outer.tol = 1e-8x\n"), ConfigurationError);
  EXPECT_THROW((void)parse("preconditioners = IBS9\n"), ConfigurationError);
  EXPECT_THROW((void)parse("no equals sign\n"), ConfigurationError);
  try {
    (void)parse("runs = 3\n\nsource = nowhere\n");
    FAIL();
  } catch (const ConfigurationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }

  ExperimentSpec missing;
  missing.matrix = "/nonexistent/TOLS340.mtx";
  EXPECT_THROW(validate_experiment_spec(missing), ConfigurationError);
  EXPECT_THROW((void)run_experiment(missing), ConfigurationError);
  ExperimentSpec zero_runs;
  zero_runs.source = ProblemSource::hilbert;
  zero_runs.runs = 0;
  EXPECT_THROW(validate_experiment_spec(zero_runs), ConfigurationError);
}

TEST(Spec, RelativePathsResolveAgainstSpecFile) {
  const auto dir = scratch_dir();
  std::ofstream(dir / "exp.spec") << "matrix = core.mtx\nout = result.csv\n";
  const auto spec = read_experiment_spec(dir / "exp.spec");
  EXPECT_EQ(spec.matrix, dir / "core.mtx");
  EXPECT_EQ(*spec.out, dir / "result.csv");
  fs::remove_all(dir);
}

TEST(RunExperiment, ScalarProblemWithoutPreconditioner) {
  const auto prob = IlsProblem(DenseMatrix(1, 1, {2.0}), DenseMatrix(1, 1, {1.0}), Vector{3.0},
                               Vector{0.0}, 4.0);
  RunSettings s;
  s.preconditioners = {PreconditionerKind::none, PreconditionerKind::ibs2};
  s.runs = 2;
  const auto rows = run_on_problem(prob, s);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 3.0);
    EXPECT_LT(r.res, 1e-8);
    ASSERT_TRUE(r.err);
    EXPECT_LT(*r.err, 1e-8);
    EXPECT_EQ(r.problem, "2x1");
    EXPECT_EQ(r.runs, 2u);
  }
}

TEST(RunExperiment, MatrixMarketSourceEndToEnd) {
  const auto dir = scratch_dir();
  std::mt19937_64 rng(62);
  auto core = ils::testing::random_sparse(30, 10, 0.3, rng);
  // Keep A1 full column rank.
  std::vector<Triplet> t = core.to_triplets();
  for (Index j = 0; j < 10; ++j) t.push_back({j, j, 5.0});
  core = SparseMatrixCsr::from_triplets(30, 10, t);
  write_matrix_market_file(dir / "core.mtx", core);
  std::ofstream(dir / "exp.spec") << "matrix = core.mtx\nq = 4\na2_scale = 0.1\nruns = 1\n"
                                     "preconditioners = IBS1,IBS2,IBS3,IBS4,BS2,BUT\n";
  const auto spec = read_experiment_spec(dir / "exp.spec");
  const auto rows = run_experiment(spec);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.problem, "34x10");
    EXPECT_TRUE(r.converged) << r.preconditioner << ": " << r.diagnostic;
    EXPECT_LT(r.res, 1e-8);
    ASSERT_TRUE(r.err);
    EXPECT_LT(*r.err, 1e-6);
  }
  fs::remove_all(dir);
}

TEST(RunExperiment, DeterministicWithDenseInnerSolves) {
  ExperimentSpec spec;
  spec.source = ProblemSource::random;
  spec.p = 14;
  spec.q = 9;
  spec.n = 7;
  spec.seed = 3;
  spec.runs = 1;
  spec.inner = InnerSolverMode::dense();
  const auto a = run_experiment(spec);
  const auto b = run_experiment(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].iterations, b[i].iterations);
    EXPECT_EQ(a[i].res, b[i].res);
    EXPECT_EQ(a[i].err, b[i].err);
  }
}

TEST(RunExperiment, NonConvergenceRowIsFaithful) {
  RunSettings s;
  s.preconditioners = {PreconditionerKind::bs2};
  s.runs = 1;
  s.outer.max_iterations = 2;
  s.outer.rel_tolerance = 1e-14;
  const auto rows = run_on_problem(generate_hilbert_problem(30, 0.7), s);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].converged);
  EXPECT_FALSE(rows[0].diagnostic.empty());
  std::ostringstream csv;
  write_report_csv(csv, rows);
  std::istringstream in(csv.str());
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  const auto cells = split_csv_line(line);
  ASSERT_EQ(cells.size(), 7u);
  EXPECT_EQ(cells[2], "");
  EXPECT_EQ(cells[4], "");
  EXPECT_EQ(cells[5], "");
  EXPECT_EQ(cells[6], "false");
}

TEST(Report, CsvFormatting) {
  TableRow row;
  row.problem = "10340x340";
  row.preconditioner = "IBS2";
  row.iterations = 31;
  row.cpu_seconds = 0.25;
  row.res = 9.89e-10;
  row.err = 1.26e-13;
  row.converged = true;
  std::ostringstream out;
  write_report_csv(out, {row});
  EXPECT_EQ(out.str(),
            "problem,preconditioner,IT,CPU,RES,ERR,converged\n"
            "10340x340,IBS2,31,0.2500,9.89e-10,1.26e-13,true\n");
  EXPECT_EQ(format_scientific(9.89e-10), "9.89e-10");
}

TEST(Report, CsvAndJsonAgree) {
  ExperimentSpec spec;
  spec.source = ProblemSource::random;
  spec.p = 12;
  spec.q = 5;
  spec.n = 6;
  spec.runs = 1;
  const auto rows = run_experiment(spec);
  const auto dir = scratch_dir();
  report_write(rows, ReportFormat::csv, dir / "t.csv");
  report_write(rows, ReportFormat::json, dir / "t.json");
  nlohmann::json j;
  std::ifstream(dir / "t.json") >> j;
  std::ifstream csv(dir / "t.csv");
  std::string line;
  std::getline(csv, line);
  ASSERT_EQ(j.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_TRUE(std::getline(csv, line));
    const auto cells = split_csv_line(line);
    ASSERT_EQ(cells.size(), 7u);
    EXPECT_EQ(cells[0], j[i]["problem"].get<std::string>());
    EXPECT_EQ(cells[1], j[i]["preconditioner"].get<std::string>());
    EXPECT_EQ(std::stod(cells[2]), j[i]["IT"].get<double>());
    const double res = j[i]["RES"].get<double>();
    EXPECT_NEAR(std::stod(cells[4]), res, 0.006 * res);
    const double err = j[i]["ERR"].get<double>();
    EXPECT_NEAR(std::stod(cells[5]), err, 0.006 * err);
    EXPECT_EQ(cells[6] == "true", j[i]["converged"].get<bool>());
  }
  EXPECT_THROW(report_write({}, ReportFormat::csv, dir / "empty.csv"), ContractViolation);
  EXPECT_THROW(report_write(rows, ReportFormat::csv, "/nonexistent/dir/t.csv"), IoError);
  fs::remove_all(dir);
}
