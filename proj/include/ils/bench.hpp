#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ils/csr_matrix.hpp"
#include "ils/ils_problem.hpp"
#include "ils/krylov.hpp"
#include "ils/preconditioners.hpp"

namespace ils {

/// A1 = core, A2 = scale * I_{q x n} (entries (i,i) for i < min(q, n)),
/// b1 and b2 all ones, alpha = ||A1||_1^2.
[[nodiscard]] IlsProblem generate_augmented_problem(const SparseMatrixCsr& core, std::size_t q,
                                                    double scale);

inline constexpr std::size_t kHilbertCap = 2000;

/// A1 = H_n stored dense with H[i][j] = 1 / (i + j + 1), A2 = a2_scale * I_n,
/// b1 = b2 = ones, alpha = ||H_n||_1^2.
[[nodiscard]] IlsProblem generate_hilbert_problem(std::size_t n, double a2_scale,
                                                  std::size_t cap = kHilbertCap);

struct RandomProblemOptions {
  std::size_t p = 8;
  std::size_t q = 4;
  std::size_t n = 5;
  std::uint64_t seed = 1;
  /// lambda_max(A2^T A2) = theta * lambda_min(P); theta < 1 keeps
  /// P - A2^T A2 SPD, theta > 1 makes it indefinite.
  double theta = 0.5;
  /// Explicit shift; default alpha = ||A1||_1^2.
  std::optional<double> alpha;
};

/// Dense Gaussian A1 (p x n, requires p >= n) and A2 (q x n) rescaled to the
/// requested theta, Gaussian b. Deterministic for a given seed.
[[nodiscard]] IlsProblem generate_random_problem(const RandomProblemOptions& opts);

/// Draws p, q, n <= max_dim with p >= n + 1 from `seed`.
[[nodiscard]] RandomProblemOptions random_desk_options(std::uint64_t seed,
                                                       std::size_t max_dim = 25);

enum class ProblemSource { matrix_market, hilbert, random };
enum class ReportFormat { csv, json };

[[nodiscard]] std::string to_string(ProblemSource s);
[[nodiscard]] std::string to_string(ReportFormat f);

/// Flat key = value experiment description. Keys: source, matrix, q, p, n,
/// a2_scale, normalize, theta, seed, preconditioners, inner.mode, inner.tol,
/// inner.maxit, outer.tol, outer.maxit, outer.restart, runs, oracle, out,
/// format. '#' starts a comment.
struct ExperimentSpec {
  ProblemSource source = ProblemSource::matrix_market;
  std::filesystem::path matrix;
  std::size_t p = 8;
  std::size_t q = 1;
  std::size_t n = 5;
  double a2_scale = 6.0;
  bool normalize = true;
  double theta = 0.5;
  std::uint64_t seed = 1;
  std::vector<PreconditionerKind> preconditioners{PreconditionerKind::ibs1,
                                                  PreconditionerKind::ibs2,
                                                  PreconditionerKind::ibs3,
                                                  PreconditionerKind::ibs4};
  InnerSolverMode inner = InnerSolverMode::with_cg();
  FgmresConfig outer;
  std::size_t runs = 5;
  std::optional<OracleMode> oracle;  // default_oracle_mode when unset
  std::optional<std::filesystem::path> out;
  ReportFormat format = ReportFormat::csv;
};

/// Applies one key = value entry. Unknown keys and malformed values throw
/// ConfigurationError.
void apply_spec_entry(ExperimentSpec& spec, const std::string& key, const std::string& value);

/// Relative matrix and out paths are resolved against `base_dir`.
[[nodiscard]] ExperimentSpec parse_experiment_spec(std::istream& in,
                                                   const std::filesystem::path& base_dir = {});
[[nodiscard]] ExperimentSpec read_experiment_spec(const std::filesystem::path& path);

/// runs >= 1, configs valid, matrix file present. Throws ConfigurationError.
void validate_experiment_spec(const ExperimentSpec& spec);

[[nodiscard]] IlsProblem build_problem(const ExperimentSpec& spec);

struct TableRow {
  std::string problem;  // "m x n" label
  std::string preconditioner;
  double iterations = 0.0;  // mean over runs
  double cpu_seconds = 0.0;  // mean over runs
  double res = 0.0;          // final true RES of the last run
  std::optional<double> err;
  bool converged = false;
  std::size_t runs = 0;
  std::size_t inner_iterations = 0;  // last run
  std::string diagnostic;
};

struct RunSettings {
  std::vector<PreconditionerKind> preconditioners;
  InnerSolverMode inner = InnerSolverMode::with_cg();
  FgmresConfig outer;
  std::size_t runs = 5;
  std::optional<OracleMode> oracle;
  bool compute_err = true;
};

/// One row per preconditioner: `runs` FGMRES solves from x0 = 0, mean IT and
/// CPU, RES of the last run, ERR against the oracle (computed once).
/// Numerical failures become rows with converged = false and a diagnostic.
[[nodiscard]] std::vector<TableRow> run_on_problem(const IlsProblem& prob,
                                                   const RunSettings& settings);

[[nodiscard]] std::vector<TableRow> run_experiment(const ExperimentSpec& spec);

/// Columns problem, preconditioner, IT, CPU, RES, ERR, converged. RES/ERR use
/// three significant digits; unconverged rows leave IT, RES and ERR empty.
void write_report_csv(std::ostream& out, const std::vector<TableRow>& rows);
[[nodiscard]] nlohmann::json report_to_json(const std::vector<TableRow>& rows);
/// Throws ContractViolation for empty rows, IoError when `path` is unwritable.
void report_write(const std::vector<TableRow>& rows, ReportFormat format,
                  const std::filesystem::path& path);

/// "%.2e"
[[nodiscard]] std::string format_scientific(double v);

}  // namespace ils
