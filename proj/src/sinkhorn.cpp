#include "entrobridge/sinkhorn.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace entrobridge {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double max_residual(const std::vector<double>& resids) {
  double m = 0.0;
  for (double r : resids) m = std::max(m, r);
  return m;
}

SolveReport solve_impl(const Problem& problem, std::vector<Potential> init = {}) {
  const SolverConfig& config = problem.config();
  std::size_t n = problem.n_marginals();
  double eps = config.epsilon;
  Gauge gauge = config.effective_gauge(n);
  if (gauge == Gauge::pair_recenter && n != 2)
    throw ProblemError("pair_recenter gauge requires exactly 2 marginals");

  std::vector<Potential> us;
  if (init.empty()) {
    us.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      us.emplace_back(i, std::vector<double>(problem.measure(i).size(), 0.0));
  } else {
    if (init.size() != n) throw ShapeMismatchError("initial potential count mismatch");
    for (std::size_t i = 0; i < n; ++i)
      if (init[i].marginal_index != i || init[i].size() != problem.measure(i).size())
        throw ShapeMismatchError("initial potential shape mismatch");
    us = std::move(init);
  }

  // v before u for the classical two-marginal iteration; ascending otherwise.
  std::vector<std::size_t> order;
  if (n == 2)
    order = {1, 0};
  else {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
  }

  auto start = Clock::now();
  std::vector<IterationRecord> trace;

  auto make_record = [&](std::size_t iter, std::vector<double> gauge_constants,
                         const Coupling& gamma, double dual) {
    IterationRecord rec;
    rec.iter = iter;
    rec.dual = dual;
    rec.primal = primal_value(gamma, problem.cost(), problem.measures(), eps);
    rec.gap = rec.primal - (rec.dual + eps);
    rec.marginal_residual_l1 = max_residual(marginal_residuals(gamma, problem.measures()));
    rec.gauge_constants = std::move(gauge_constants);
    rec.wall_ms = elapsed_ms(start);
    return rec;
  };

  double prev_dual = dual_value_mm(us, problem);
  trace.push_back(make_record(0, std::vector<double>(n, 1.0),
                              coupling_from_potentials(us, problem), prev_dual));

  bool converged = false;
  std::size_t sweeps = 0;
  while (sweeps < config.max_iter) {
    ++sweeps;
    double lambda_u_prev = 0.0;
    if (gauge == Gauge::pair_recenter)
      lambda_u_prev = lambda_u(us[0], problem.measure(0), eps);

    for (std::size_t i : order) {
      std::vector<Potential> others;
      others.reserve(n - 1);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others.push_back(us[j]);
      us[i] = mm_transform(others, problem.cost(), problem.measures(), i, eps);
    }

    std::vector<double> gauge_constants(n, 1.0);
    switch (gauge) {
      case Gauge::pair_recenter: {
        double a = (lambda_u(us[1], problem.measure(1), eps) - lambda_u_prev) / 2.0;
        for (double& x : us[0].values) x += a;
        for (double& x : us[1].values) x -= a;
        gauge_constants[0] = std::exp(a / eps);
        gauge_constants[1] = std::exp(-a / eps);
        break;
      }
      case Gauge::projection_P: {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          double li = lambda_u(us[i], problem.measure(i), eps);
          gauge_constants[i] = std::exp(-li / eps);
          total += li;
        }
        gauge_constants[n - 1] = std::exp(total / eps);
        us = project_gauge(us, problem.measures(), eps);
        break;
      }
      case Gauge::none:
        break;
    }

    Coupling gamma = coupling_from_potentials(us, problem);
    double resid = max_residual(marginal_residuals(gamma, problem.measures()));
    double dual = dual_value_mm(us, problem);
    double increment = dual - prev_dual;
    prev_dual = dual;
    converged = resid <= config.tol_marginal &&
                std::abs(increment) <= config.tol_dual_increment;

    bool record = converged || sweeps == config.max_iter ||
                  (config.record_trace_every > 0 && sweeps % config.record_trace_every == 0);
    if (record) trace.push_back(make_record(sweeps, std::move(gauge_constants), gamma, dual));
    if (converged) break;
  }

  Coupling gamma = coupling_from_potentials(us, problem);
  OptimalityReport optimality = check_complementarity(us, problem, config.tol_marginal);
  return SolveReport{converged,  sweeps, std::move(us), std::move(gamma),
                     optimality, std::move(trace), eps};
}

}  // namespace

std::vector<double> SolveReport::scaling(std::size_t i) const {
  const Potential& u = potentials.at(i);
  std::vector<double> a(u.size());
  for (std::size_t x = 0; x < u.size(); ++x) a[x] = std::exp(u[x] / epsilon);
  return a;
}

SolveReport sinkhorn_2m(const Problem& problem) {
  if (problem.n_marginals() != 2)
    throw ShapeMismatchError("sinkhorn_2m requires a 2-marginal problem");
  return solve_impl(problem);
}

SolveReport sinkhorn_2m(const Problem& problem, std::vector<Potential> init) {
  if (problem.n_marginals() != 2)
    throw ShapeMismatchError("sinkhorn_2m requires a 2-marginal problem");
  return solve_impl(problem, std::move(init));
}

SolveReport sinkhorn_mm(const Problem& problem) { return solve_impl(problem); }

}  // namespace entrobridge
