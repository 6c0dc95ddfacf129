#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "entrobridge/oracle.hpp"
#include "entrobridge/problem_io.hpp"

namespace eb = entrobridge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitBudget = 2;
constexpr int kExitInvalid = 3;

eb::Gauge parse_gauge(const std::string& name) {
  if (name == "pair_recenter") return eb::Gauge::pair_recenter;
  if (name == "projection_p" || name == "projection_P") return eb::Gauge::projection_P;
  if (name == "none") return eb::Gauge::none;
  throw eb::ProblemError("unknown gauge '" + name +
                         "' (expected pair_recenter, projection_p or none)");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw eb::ProblemError("cannot open output file: " + path);
  return out;
}

struct SolveFlags {
  std::string input;
  double eps = 0.0;
  bool eps_set = false;
  double tol = 0.0;
  bool tol_set = false;
  std::size_t max_iter = 0;
  bool max_iter_set = false;
  std::string gauge;
  std::string trace_out;
  std::string report_out;
  bool full_coupling = false;
};

int run_solve(const SolveFlags& flags) {
  eb::ParsedProblem parsed = eb::load_problem_file(flags.input);

  eb::SolverConfig config;
  config.epsilon = parsed.epsilon;
  if (flags.eps_set) {
    if (flags.eps != parsed.epsilon)
      std::cerr << "warning: --eps " << flags.eps << " overrides epsilon " << parsed.epsilon
                << " from the problem file\n";
    config.epsilon = flags.eps;
  }
  if (flags.tol_set) config.tol_marginal = flags.tol;
  if (flags.max_iter_set) config.max_iter = flags.max_iter;
  if (!flags.gauge.empty()) config.gauge = parse_gauge(flags.gauge);

  eb::Problem problem = eb::build_problem(std::move(parsed.measures), std::move(parsed.cost),
                                          config, std::move(parsed.references));
  eb::SolveReport report = problem.n_marginals() == 2 ? eb::sinkhorn_2m(problem)
                                                      : eb::sinkhorn_mm(problem);

  if (!flags.trace_out.empty()) {
    auto out = open_out(flags.trace_out);
    eb::write_trace_csv(out, report.trace);
  }
  nlohmann::json j = eb::report_to_json(report, problem, flags.full_coupling);
  if (!flags.report_out.empty())
    open_out(flags.report_out) << j.dump(2) << '\n';
  else
    std::cout << j.dump(2) << '\n';

  if (!report.converged) {
    std::cerr << "not converged after " << report.iterations << " sweeps\n";
    return kExitBudget;
  }
  return kExitOk;
}

int run_sweep(const std::string& input, const std::string& eps_list, bool cold_check,
              const std::string& out_path) {
  eb::ParsedProblem parsed = eb::load_problem_file(input);
  std::vector<double> epsilons;
  std::stringstream ss(eps_list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      epsilons.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw eb::ProblemError("--eps-list: cannot parse '" + tok + "' as a number");
    }
  }

  eb::SolverConfig config;
  config.epsilon = parsed.epsilon;
  eb::Problem problem = eb::build_problem(std::move(parsed.measures), std::move(parsed.cost),
                                          config, std::move(parsed.references));
  eb::SweepResult sweep = eb::epsilon_sweep(problem, epsilons, cold_check);

  if (!out_path.empty()) {
    auto out = open_out(out_path);
    eb::write_sweep_csv(out, sweep);
  } else {
    eb::write_sweep_csv(std::cout, sweep);
  }
  for (bool ok : sweep.converged)
    if (!ok) {
      std::cerr << "one or more solves in the sweep hit the iteration budget\n";
      return kExitBudget;
    }
  return kExitOk;
}

int run_validate(const std::string& input) {
  eb::ParsedProblem parsed = eb::load_problem_file(input);
  if (!parsed.potentials)
    throw eb::ProblemError("validate: file has no 'potentials' section");
  double tol = parsed.tolerance.value_or(1e-8);

  eb::SolverConfig config;
  config.epsilon = parsed.epsilon;
  eb::Problem problem = eb::build_problem(std::move(parsed.measures), std::move(parsed.cost),
                                          config, std::move(parsed.references));
  eb::OptimalityReport report = eb::check_complementarity(*parsed.potentials, problem, tol);

  std::cout << "dual: " << report.dual_value << '\n'
            << "primal: " << report.primal_value << '\n'
            << "gap: " << report.gap << '\n'
            << "schrodinger_residual_linf: " << report.schrodinger_residual_linf << '\n'
            << "fixed_point_residual_linf: " << report.fixed_point_residual_linf << '\n';
  std::cout << "marginal_residual_l1:";
  for (double r : report.marginal_residual_l1) std::cout << ' ' << r;
  std::cout << '\n' << "tolerance: " << tol << '\n';

  if (!report.within(tol)) {
    std::cerr << "validation failed at tolerance " << tol << '\n';
    return kExitInvalid;
  }
  std::cout << "valid\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropic optimal transport / Schrodinger bridge solver"};
  app.require_subcommand(1);

  SolveFlags sf;
  auto* solve = app.add_subcommand("solve", "Solve a problem file and emit a report");
  solve->add_option("input", sf.input, "problem JSON file")->required();
  auto* eps_opt = solve->add_option("--eps", sf.eps, "override epsilon from the file");
  auto* tol_opt = solve->add_option("--tol", sf.tol, "marginal residual tolerance");
  auto* mi_opt = solve->add_option("--max-iter", sf.max_iter, "sweep budget");
  solve->add_option("--gauge", sf.gauge, "pair_recenter | projection_p | none");
  solve->add_option("--trace-out", sf.trace_out, "write iteration trace CSV here");
  solve->add_option("--report-out", sf.report_out, "write report JSON here (default stdout)");
  solve->add_flag("--full-coupling", sf.full_coupling,
                  "include the coupling even when it has more than 100000 entries");

  std::string sweep_input;
  std::string eps_list;
  bool cold_check = false;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Epsilon sweep against the exact oracle");
  sweep->add_option("input", sweep_input, "problem JSON file")->required();
  sweep->add_option("--eps-list", eps_list, "comma-separated descending epsilons")->required();
  sweep->add_flag("--cold-check", cold_check, "re-solve each epsilon from scratch and compare");
  sweep->add_option("--out", sweep_out, "write sweep CSV here (default stdout)");

  std::string validate_input;
  auto* validate = app.add_subcommand("validate", "Check a potentials bundle for optimality");
  validate->add_option("input", validate_input, "bundle JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      sf.eps_set = eps_opt->count() > 0;
      sf.tol_set = tol_opt->count() > 0;
      sf.max_iter_set = mi_opt->count() > 0;
      return run_solve(sf);
    }
    if (sweep->parsed()) return run_sweep(sweep_input, eps_list, cold_check, sweep_out);
    if (validate->parsed()) return run_validate(validate_input);
  } catch (const eb::ProblemError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
