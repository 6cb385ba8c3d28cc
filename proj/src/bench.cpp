#include "ils/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "ils/eigen.hpp"
#include "ils/matrix_market.hpp"

namespace ils {

IlsProblem generate_augmented_problem(const SparseMatrixCsr& core, std::size_t q, double scale) {
  if (q < 1) throw ContractViolation("generate_augmented_problem: q must be >= 1");
  SparseMatrixCsr a2 = SparseMatrixCsr::rectangular_identity(static_cast<Index>(q), static_cast<Index>(core.n_cols()), scale);
  const double alpha = compute_alpha(core);
  Vector b1(core.n_rows(), 1.0);
  Vector b2(q, 1.0);
  return IlsProblem(core, std::move(a2), std::move(b1), std::move(b2), alpha);
}

IlsProblem generate_hilbert_problem(std::size_t n, double a2_scale, std::size_t cap) {
  if (n < 1) throw ContractViolation("generate_hilbert_problem: n must be >= 1");
  if (n > cap) {
    throw ConfigurationError("generate_hilbert_problem: n = " + std::to_string(n) +
                             " exceeds the dense cap " + std::to_string(cap));
  }
  DenseMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) h(i, j) = 1.0 / static_cast<double>(i + j + 1);
  }
  StoredMatrix a1(std::move(h));
  const double alpha = compute_alpha(a1);
  return IlsProblem(std::move(a1), SparseMatrixCsr::rectangular_identity(static_cast<Index>(n), static_cast<Index>(n), a2_scale),
                    Vector(n, 1.0), Vector(n, 1.0), alpha);
}

IlsProblem generate_random_problem(const RandomProblemOptions& opts) {
  const auto [p, q, n] = std::tuple{opts.p, opts.q, opts.n};
  if (p < n || n < 1 || q < 1) {
    throw ContractViolation("generate_random_problem: need p >= n >= 1 and q >= 1");
  }
  if (!(opts.theta >= 0.0)) throw ContractViolation("generate_random_problem: theta < 0");
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  DenseMatrix a1(p, n);
  DenseMatrix a2(q, n);
  for (double& t : a1.values()) t = normal(rng);
  for (double& t : a2.values()) t = normal(rng);
  Vector b1(p);
  Vector b2(q);
  for (double& t : b1) t = normal(rng);
  for (double& t : b2) t = normal(rng);

  const double lmin_p = symmetric_eigen(gram(a1)).values.front();
  const double lmax_a2 = symmetric_eigen(gram(a2)).values.back();
  if (!(lmin_p > 0.0)) throw DegenerateInput("generate_random_problem: A1 is rank deficient");
  if (lmax_a2 > 0.0) {
    const double s = std::sqrt(opts.theta * lmin_p / lmax_a2);
    for (double& t : a2.values()) t *= s;
  }
  StoredMatrix sa1(std::move(a1));
  const double alpha = opts.alpha ? *opts.alpha : compute_alpha(sa1);
  return IlsProblem(std::move(sa1), StoredMatrix(std::move(a2)), std::move(b1), std::move(b2),
                    alpha);
}

RandomProblemOptions random_desk_options(std::uint64_t seed, std::size_t max_dim) {
  if (max_dim < 2) throw ContractViolation("random_desk_options: max_dim must be >= 2");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  RandomProblemOptions o;
  o.n = pick(1, max_dim - 1);
  o.p = pick(o.n + 1, max_dim);
  o.q = pick(1, max_dim);
  o.seed = seed;
  return o;
}

std::string to_string(ProblemSource s) {
  switch (s) {
    case ProblemSource::matrix_market: return "matrix-market";
    case ProblemSource::hilbert: return "hilbert";
    case ProblemSource::random: return "random";
  }
  return "?";
}

std::string to_string(ReportFormat f) { return f == ReportFormat::csv ? "csv" : "json"; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v)) {
    throw ConfigurationError(key + ": expected a real number, got \"" + value + "\"");
  }
  return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
  if (value.empty() || !std::all_of(value.begin(), value.end(),
                                    [](unsigned char c) { return std::isdigit(c); })) {
    throw ConfigurationError(key + ": expected a nonnegative integer, got \"" + value + "\"");
  }
  try {
    return std::stoull(value);
  } catch (const std::exception&) {
    throw ConfigurationError(key + ": value out of range \"" + value + "\"");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = lower(value);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigurationError(key + ": expected true or false, got \"" + value + "\"");
}

}  // namespace

void apply_spec_entry(ExperimentSpec& spec, const std::string& key_in, const std::string& value) {
  const std::string key = lower(trim(key_in));
  const std::string v = trim(value);
  if (key == "source") {
    const std::string s = lower(v);
    if (s == "matrix-market" || s == "mtx") {
      spec.source = ProblemSource::matrix_market;
    } else if (s == "hilbert") {
      spec.source = ProblemSource::hilbert;
    } else if (s == "random") {
      spec.source = ProblemSource::random;
    } else {
      throw ConfigurationError("source: unknown problem source \"" + v + "\"");
    }
  } else if (key == "matrix") {
    spec.matrix = v;
  } else if (key == "p") {
    spec.p = parse_count(key, v);
  } else if (key == "q") {
    spec.q = parse_count(key, v);
  } else if (key == "n") {
    spec.n = parse_count(key, v);
  } else if (key == "a2_scale") {
    spec.a2_scale = parse_double(key, v);
  } else if (key == "normalize") {
    spec.normalize = parse_bool(key, v);
  } else if (key == "theta") {
    spec.theta = parse_double(key, v);
  } else if (key == "seed") {
    spec.seed = parse_count(key, v);
  } else if (key == "preconditioners") {
    std::vector<PreconditionerKind> kinds;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        kinds.push_back(parse_preconditioner_kind(item));
      } catch (const Error& e) {
        throw ConfigurationError(std::string("preconditioners: ") + e.what());
      }
    }
    if (kinds.empty()) throw ConfigurationError("preconditioners: empty list");
    spec.preconditioners = std::move(kinds);
  } else if (key == "inner.mode") {
    const std::string s = lower(v);
    if (s == "cg") {
      spec.inner.type = InnerSolverMode::Type::cg;
    } else if (s == "dense" || s == "dense-cholesky") {
      spec.inner.type = InnerSolverMode::Type::dense_cholesky;
    } else {
      throw ConfigurationError("inner.mode: expected cg or dense, got \"" + v + "\"");
    }
  } else if (key == "inner.tol") {
    spec.inner.cg.rel_tolerance = parse_double(key, v);
  } else if (key == "inner.maxit") {
    spec.inner.cg.max_iterations = parse_count(key, v);
  } else if (key == "outer.tol") {
    spec.outer.rel_tolerance = parse_double(key, v);
  } else if (key == "outer.maxit") {
    spec.outer.max_iterations = parse_count(key, v);
  } else if (key == "outer.restart") {
    const std::string s = lower(v);
    if (s == "none" || s == "unbounded") {
      spec.outer.restart.reset();
    } else {
      spec.outer.restart = parse_count(key, v);
    }
  } else if (key == "runs") {
    spec.runs = parse_count(key, v);
  } else if (key == "oracle") {
    const std::string s = lower(v);
    if (s == "auto") {
      spec.oracle.reset();
    } else if (s == "dense" || s == "dense-cholesky") {
      spec.oracle = OracleMode::dense_cholesky;
    } else if (s == "cg" || s == "tight-cg") {
      spec.oracle = OracleMode::tight_cg;
    } else {
      throw ConfigurationError("oracle: expected auto, dense or cg, got \"" + v + "\"");
    }
  } else if (key == "out") {
    spec.out = v;
  } else if (key == "format") {
    const std::string s = lower(v);
    if (s == "csv") {
      spec.format = ReportFormat::csv;
    } else if (s == "json") {
      spec.format = ReportFormat::json;
    } else {
      throw ConfigurationError("format: expected csv or json, got \"" + v + "\"");
    }
  } else {
    throw ConfigurationError("unknown key \"" + key + "\"");
  }
}

ExperimentSpec parse_experiment_spec(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigurationError("line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_spec_entry(spec, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigurationError& e) {
      throw ConfigurationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!base_dir.empty()) {
    if (!spec.matrix.empty() && spec.matrix.is_relative()) spec.matrix = base_dir / spec.matrix;
    if (spec.out && spec.out->is_relative()) spec.out = base_dir / *spec.out;
  }
  return spec;
}

ExperimentSpec read_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open spec file " + path.string());
  return parse_experiment_spec(in, path.parent_path());
}

void validate_experiment_spec(const ExperimentSpec& spec) {
  if (spec.runs < 1) throw ConfigurationError("runs must be >= 1");
  if (spec.preconditioners.empty()) throw ConfigurationError("no preconditioners listed");
  try {
    spec.outer.validate();
    spec.inner.cg.validate();
  } catch (const ContractViolation& e) {
    throw ConfigurationError(e.what());
  }
  switch (spec.source) {
    case ProblemSource::matrix_market:
      if (spec.matrix.empty()) throw ConfigurationError("matrix: path required");
      if (!std::filesystem::is_regular_file(spec.matrix)) {
        throw ConfigurationError("matrix: file not found: " + spec.matrix.string());
      }
      if (spec.q < 1) throw ConfigurationError("q must be >= 1");
      break;
    case ProblemSource::hilbert:
      if (spec.n < 1 || spec.n > kHilbertCap) {
        throw ConfigurationError("n must lie in [1, " + std::to_string(kHilbertCap) + "]");
      }
      break;
    case ProblemSource::random:
      if (spec.n < 1 || spec.p < spec.n || spec.q < 1) {
        throw ConfigurationError("random source needs p >= n >= 1 and q >= 1");
      }
      break;
  }
}

IlsProblem build_problem(const ExperimentSpec& spec) {
  switch (spec.source) {
    case ProblemSource::matrix_market: {
      SparseMatrixCsr core = read_matrix_market(spec.matrix);
      if (spec.normalize) core = normalize_to_unit_one_norm(core);
      return generate_augmented_problem(core, spec.q, spec.a2_scale);
    }
    case ProblemSource::hilbert:
      return generate_hilbert_problem(spec.n, spec.a2_scale);
    case ProblemSource::random: {
      RandomProblemOptions o;
      o.p = spec.p;
      o.q = spec.q;
      o.n = spec.n;
      o.seed = spec.seed;
      o.theta = spec.theta;
      return generate_random_problem(o);
    }
  }
  throw ContractViolation("build_problem: unknown source");
}

std::vector<TableRow> run_on_problem(const IlsProblem& prob, const RunSettings& settings) {
  if (settings.runs < 1) throw ContractViolation("run_on_problem: runs must be >= 1");
  const BlockVector rhs = build_rhs(prob);
  const Vector x0(rhs.flat().size(), 0.0);
  const LinearOperator op = block_operator(prob, BlockRole::full_system);

  std::optional<Vector> exact;
  std::string oracle_note;
  auto oracle = [&]() -> const std::optional<Vector>& {
    if (!exact && oracle_note.empty()) {
      try {
        const OracleMode mode = settings.oracle.value_or(default_oracle_mode(prob));
        OracleSolution sol = exact_solution_oracle(prob, mode);
        exact = std::move(sol.x);
        if (sol.definiteness && *sol.definiteness != Definiteness::positive) {
          oracle_note = "oracle: normal matrix is " + to_string(*sol.definiteness);
        }
      } catch (const Error& e) {
        oracle_note = std::string("oracle failed: ") + e.what();
      }
    }
    return exact;
  };

  std::vector<TableRow> rows;
  for (const PreconditionerKind kind : settings.preconditioners) {
    TableRow row;
    row.problem = prob.size_label();
    row.preconditioner = to_string(kind);
    try {
      BlockPreconditioner precond(prob, kind, settings.inner);
      RightPreconditioner right;
      if (kind != PreconditionerKind::none) right = precond.as_right_preconditioner();
      SolveResult last;
      double it_sum = 0.0;
      double cpu_sum = 0.0;
      for (std::size_t run = 0; run < settings.runs; ++run) {
        precond.reset_stats();
        last = fgmres_solve(op, right, rhs.flat(), x0, settings.outer);
        it_sum += static_cast<double>(last.report.iterations);
        cpu_sum += last.report.wall_seconds;
      }
      const auto runs = static_cast<double>(settings.runs);
      row.runs = settings.runs;
      row.iterations = it_sum / runs;
      row.cpu_seconds = cpu_sum / runs;
      row.res = last.report.final_res;
      row.converged = last.report.converged;
      row.inner_iterations = precond.stats().inner_iterations;
      std::string diag;
      for (const auto& d : last.report.diagnostics) diag += (diag.empty() ? "" : "; ") + d;
      if (precond.stats().inner_nonconverged > 0) {
        diag += (diag.empty() ? "" : "; ") + std::to_string(precond.stats().inner_nonconverged) +
                " inner solves hit the iteration cap";
      }
      if (!row.converged && diag.empty()) {
        diag = "no convergence within " + std::to_string(settings.outer.max_iterations) +
               " iterations";
      }
      row.diagnostic = diag;
      if (settings.compute_err) {
        const Vector x(last.x.begin() + static_cast<long>(prob.layout().x_offset()),
                       last.x.begin() + static_cast<long>(prob.layout().d2_offset()));
        if (const auto& xs = oracle()) row.err = relative_error(x, *xs);
        if (!oracle_note.empty()) {
          row.diagnostic += (row.diagnostic.empty() ? "" : "; ") + oracle_note;
        }
      }
    } catch (const NumericalFailure& e) {
      row.converged = false;
      row.diagnostic = std::string("numerical failure: ") + e.what();
    } catch (const IndefiniteOperator& e) {
      row.converged = false;
      row.diagnostic = std::string("inner solver breakdown: ") + e.what();
    } catch (const ConfigurationError& e) {
      row.converged = false;
      row.diagnostic = std::string("configuration: ") + e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TableRow> run_experiment(const ExperimentSpec& spec) {
  validate_experiment_spec(spec);
  const IlsProblem prob = build_problem(spec);
  RunSettings s;
  s.preconditioners = spec.preconditioners;
  s.inner = spec.inner;
  s.outer = spec.outer;
  s.runs = spec.runs;
  s.oracle = spec.oracle;
  return run_on_problem(prob, s);
}

std::string format_scientific(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

namespace {

std::string format_iterations(double it) {
  char buf[32];
  if (it == std::floor(it)) {
    std::snprintf(buf, sizeof buf, "%.0f", it);
  } else {
    std::snprintf(buf, sizeof buf, "%.1f", it);
  }
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_report_csv(std::ostream& out, const std::vector<TableRow>& rows) {
  out << "problem,preconditioner,IT,CPU,RES,ERR,converged\n";
  for (const auto& r : rows) {
    char cpu[32];
    std::snprintf(cpu, sizeof cpu, "%.4f", r.cpu_seconds);
    out << csv_field(r.problem) << ',' << csv_field(r.preconditioner) << ',';
    if (r.converged) {
      out << format_iterations(r.iterations) << ',' << cpu << ',' << format_scientific(r.res)
          << ',' << (r.err ? format_scientific(*r.err) : "");
    } else {
      out << ',' << cpu << ",,";
    }
    out << ',' << (r.converged ? "true" : "false") << '\n';
  }
}

nlohmann::json report_to_json(const std::vector<TableRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["problem"] = r.problem;
    j["preconditioner"] = r.preconditioner;
    j["IT"] = r.iterations;
    j["CPU"] = r.cpu_seconds;
    j["RES"] = r.res;
    j["ERR"] = r.err ? nlohmann::json(*r.err) : nlohmann::json(nullptr);
    j["converged"] = r.converged;
    j["runs"] = r.runs;
    j["inner_iterations"] = r.inner_iterations;
    j["diagnostic"] = r.diagnostic;
    arr.push_back(std::move(j));
  }
  return arr;
}

void report_write(const std::vector<TableRow>& rows, ReportFormat format,
                  const std::filesystem::path& path) {
  if (rows.empty()) throw ContractViolation("report_write: no rows");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report " + path.string());
  if (format == ReportFormat::csv) {
    write_report_csv(out, rows);
  } else {
    out << report_to_json(rows).dump(2) << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace ils
