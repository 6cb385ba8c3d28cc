// ilsbench: solve, benchmark and analyze preconditioned ILS block systems.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ils/analysis.hpp"
#include "ils/bench.hpp"
#include "ils/errors.hpp"
#include "ils/matrix_market.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;

using nlohmann::json;

/// Problem-selection flags shared by every subcommand, stored as spec entries.
struct ProblemFlags {
  std::vector<std::string> entries;
  std::string spec_file;

  void add(CLI::App* app) {
    app->add_option("--spec", spec_file, "key = value experiment file");
    auto entry = [this](const std::string& key) {
      return [this, key](const std::string& v) { entries.push_back(key + "=" + v); };
    };
    app->add_option_function<std::string>("--source", entry("source"),
                                          "matrix-market | hilbert | random");
    app->add_option_function<std::string>("--matrix", entry("matrix"), "Matrix Market file for A1");
    app->add_option_function<std::string>("--p", entry("p"), "rows of A1 (random)");
    app->add_option_function<std::string>("--q", entry("q"), "rows of A2");
    app->add_option_function<std::string>("--n", entry("n"), "columns (hilbert, random)");
    app->add_option_function<std::string>("--a2-scale", entry("a2_scale"), "A2 = s * I");
    app->add_option_function<std::string>("--normalize", entry("normalize"), "true | false");
    app->add_option_function<std::string>("--theta", entry("theta"),
                                          "lambda_max(A2^T A2) / lambda_min(P) (random)");
    app->add_option_function<std::string>("--seed", entry("seed"), "random seed");
    app->add_option_function<std::vector<std::string>>(
        "--set",
        [this](const std::vector<std::string>& vs) {
          entries.insert(entries.end(), vs.begin(), vs.end());
        },
        "raw key=value entries, e.g. inner.tol=1e-6");
  }

  ils::ExperimentSpec build() const {
    ils::ExperimentSpec spec =
        spec_file.empty() ? ils::ExperimentSpec{} : ils::read_experiment_spec(spec_file);
    for (const auto& e : entries) {
      const auto eq = e.find('=');
      if (eq == std::string::npos) throw ils::ConfigurationError("expected key=value: " + e);
      ils::apply_spec_entry(spec, e.substr(0, eq), e.substr(eq + 1));
    }
    return spec;
  }
};

json report_json(const ils::SolveReport& r) {
  json j;
  j["iterations"] = r.iterations;
  j["wall_seconds"] = r.wall_seconds;
  j["final_res"] = r.final_res;
  j["converged"] = r.converged;
  j["cycles"] = r.cycles;
  j["res_history"] = r.res_history;
  j["err"] = r.err ? json(*r.err) : json(nullptr);
  j["diagnostics"] = r.diagnostics;
  return j;
}

int cmd_solve(const ProblemFlags& flags, const std::string& precond_name, bool history) {
  ils::ExperimentSpec spec = flags.build();
  spec.preconditioners = {ils::parse_preconditioner_kind(precond_name)};
  ils::validate_experiment_spec(spec);
  const ils::IlsProblem prob = ils::build_problem(spec);

  ils::BlockPreconditioner precond(prob, spec.preconditioners.front(), spec.inner);
  ils::RightPreconditioner right;
  if (spec.preconditioners.front() != ils::PreconditionerKind::none) {
    right = precond.as_right_preconditioner();
  }
  const ils::BlockVector rhs = ils::build_rhs(prob);
  const ils::Vector x0(rhs.flat().size(), 0.0);
  ils::SolveResult res = ils::fgmres_solve(ils::block_operator(prob, ils::BlockRole::full_system),
                                           right, rhs.flat(), x0, spec.outer);
  const auto l = prob.layout();
  const std::span<const double> x(res.x.data() + l.x_offset(), l.n);
  std::string oracle_note;
  try {
    const auto sol = ils::exact_solution_oracle(
        prob, spec.oracle.value_or(ils::default_oracle_mode(prob)));
    res.report.err = ils::relative_error(x, sol.x);
    if (sol.definiteness) oracle_note = ils::to_string(*sol.definiteness);
  } catch (const ils::OracleFailure& e) {
    oracle_note = e.what();
  }

  json j;
  j["problem"] = prob.size_label();
  j["alpha"] = prob.alpha();
  j["preconditioner"] = ils::to_string(spec.preconditioners.front());
  j["report"] = report_json(res.report);
  if (!history) j["report"].erase("res_history");
  j["inner_iterations"] = precond.stats().inner_iterations;
  j["inner_nonconverged"] = precond.stats().inner_nonconverged;
  if (!oracle_note.empty()) j["oracle"] = oracle_note;
  std::cout << j.dump(2) << '\n';
  return res.report.converged ? 0 : kExitSolver;
}

void print_table(const std::vector<ils::TableRow>& rows) {
  std::printf("%-14s %-6s %8s %10s %10s %10s %s\n", "problem", "prec", "IT", "CPU", "RES", "ERR",
              "conv");
  for (const auto& r : rows) {
    std::printf("%-14s %-6s %8.1f %10.4f %10s %10s %s%s%s\n", r.problem.c_str(),
                r.preconditioner.c_str(), r.iterations, r.cpu_seconds,
                ils::format_scientific(r.res).c_str(),
                r.err ? ils::format_scientific(*r.err).c_str() : "-",
                r.converged ? "yes" : "no (\xe2\x80\xa0)", r.diagnostic.empty() ? "" : "  ",
                r.diagnostic.c_str());
  }
}

int cmd_bench(const ProblemFlags& flags, const std::string& out, const std::string& format) {
  ils::ExperimentSpec spec = flags.build();
  if (!out.empty()) spec.out = out;
  if (!format.empty()) ils::apply_spec_entry(spec, "format", format);
  ils::validate_experiment_spec(spec);
  const auto rows = ils::run_experiment(spec);
  print_table(rows);
  if (spec.out) ils::report_write(rows, spec.format, *spec.out);
  for (const auto& r : rows) {
    if (r.diagnostic.rfind("numerical failure", 0) == 0) return kExitSolver;
  }
  return 0;
}

json family_json(const ils::EigenFamilyCheck& f) {
  json j;
  j["family"] = f.family;
  j["eigenvalue"] = std::isnan(f.eigenvalue) ? json(nullptr) : json(f.eigenvalue);
  j["candidates"] = f.candidates;
  j["verified"] = f.verified;
  j["max_residual"] = f.max_residual;
  j["vacuous"] = f.vacuous;
  if (!f.note.empty()) j["note"] = f.note;
  return j;
}

int cmd_analyze(const ProblemFlags& flags, double tol, std::size_t maxit) {
  ils::ExperimentSpec spec = flags.build();
  ils::validate_experiment_spec(spec);
  const ils::IlsProblem prob = ils::build_problem(spec);
  const auto cond = ils::check_convergence_conditions(prob);

  json j;
  j["problem"] = prob.size_label();
  j["alpha"] = prob.alpha();
  j["conditions"] = {{"normal_spd", cond.normal_spd},
                     {"phat_minus_a2_spd", cond.phat_minus_a2_spd},
                     {"ibs13_matrix_spd", cond.ibs13_matrix_spd},
                     {"ibs24_matrix_spd", cond.ibs24_matrix_spd},
                     {"phat_minus_p_spsd", cond.phat_minus_p_spsd},
                     {"kappa_p", cond.kappa_p},
                     {"kappa_phat", cond.kappa_phat}};
  bool solver_failure = false;
  for (const auto kind : {ils::PreconditionerKind::ibs1, ils::PreconditionerKind::ibs2,
                          ils::PreconditionerKind::ibs3, ils::PreconditionerKind::ibs4}) {
    json k;
    try {
      k["spectral_radius"] = ils::spectral_radius_estimate(kind, prob);
    } catch (const ils::EstimateUnreliable& e) {
      k["spectral_radius"] = nullptr;
      k["spectral_radius_note"] = e.what();
    }
    const auto rep = ils::verify_eigenstructure(kind, prob);
    json fams = json::array();
    for (const auto& f : rep.unit_eigenvalue_checks) fams.push_back(family_json(f));
    for (const auto& f : rep.nonunit_checks) fams.push_back(family_json(f));
    k["eigen_families"] = fams;
    k["max_eigen_residual"] = rep.max_residual();
    k["disk_containment"] = rep.disk_containment;
    k["interval_containment"] = rep.interval_containment;
    k["warnings"] = rep.warnings;
    json mult = json::array();
    for (const auto& m : rep.multiplicities) {
      mult.push_back({{"mu", m.mu}, {"verified_vectors", m.verified_vectors}});
    }
    k["multiplicities"] = mult;
    if (kind == ils::PreconditionerKind::ibs1) j["interval_eigs"] = rep.interval_eigs;

    const auto bound = ils::gmres_bound_check(kind, prob);
    k["gmres_bound"] = {{"iterations", bound.iterations},
                        {"bound", bound.bound},
                        {"pass", bound.pass}};
    try {
      const auto [x, sr] =
          ils::stationary_solve(kind, prob, ils::BlockVector(prob.layout()), tol, maxit);
      k["stationary"] = {{"iterations", sr.iterations},
                         {"final_res", sr.final_res},
                         {"converged", sr.converged}};
    } catch (const ils::DivergenceDetected& e) {
      k["stationary"] = {{"diverged", true}, {"message", e.what()}};
      solver_failure = true;
    }
    j[ils::to_string(kind)] = k;
  }
  std::cout << j.dump(2) << '\n';
  return solver_failure ? kExitSolver : 0;
}

int cmd_generate(const ProblemFlags& flags, const std::string& prefix) {
  ils::ExperimentSpec spec = flags.build();
  ils::validate_experiment_spec(spec);
  const ils::IlsProblem prob = ils::build_problem(spec);
  const std::string base = prefix.empty() ? "problem" : prefix;
  ils::write_matrix_market_file(base + "_A1.mtx", prob.a1().to_sparse());
  ils::write_matrix_market_file(base + "_A2.mtx", prob.a2().to_sparse());
  ils::write_matrix_market_vector_file(base + "_b1.mtx", prob.b1());
  ils::write_matrix_market_vector_file(base + "_b2.mtx", prob.b2());
  json meta = {{"p", prob.p()}, {"q", prob.q()}, {"n", prob.n()}, {"alpha", prob.alpha()}};
  std::ofstream(base + "_meta.json") << meta.dump(2) << '\n';
  std::cout << meta.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preconditioned FGMRES for indefinite least squares block systems"};
  app.require_subcommand(1);

  ProblemFlags solve_flags, bench_flags, analyze_flags, generate_flags;
  std::string precond = "IBS2";
  bool history = false;
  auto* solve = app.add_subcommand("solve", "solve one problem with one preconditioner");
  solve_flags.add(solve);
  solve->add_option("--preconditioner,-P", precond, "IBS1..IBS4, BS1..BS3, BUT, None");
  solve->add_flag("--history", history, "include the residual history");

  std::string out, format;
  auto* bench = app.add_subcommand("bench", "run an experiment and write a CSV/JSON table");
  bench_flags.add(bench);
  bench->add_option("--out,-o", out, "report path");
  bench->add_option("--format", format, "csv | json");

  double tol = 1e-8;
  std::size_t maxit = 100000;
  auto* analyze = app.add_subcommand("analyze", "desk-scale spectral and stationary diagnostics");
  analyze_flags.add(analyze);
  analyze->add_option("--tol", tol, "stationary iteration tolerance");
  analyze->add_option("--maxit", maxit, "stationary iteration cap");

  std::string prefix;
  auto* generate = app.add_subcommand("generate", "write a generated problem as Matrix Market");
  generate_flags.add(generate);
  generate->add_option("--prefix", prefix, "output file prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_flags, precond, history);
    if (bench->parsed()) return cmd_bench(bench_flags, out, format);
    if (analyze->parsed()) return cmd_analyze(analyze_flags, tol, maxit);
    if (generate->parsed()) return cmd_generate(generate_flags, prefix);
  } catch (const ils::ConfigurationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ils::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ils::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ils::ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ils::DegenerateInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ils::Error& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
  return 0;
}
