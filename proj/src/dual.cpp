#include "entrobridge/dual.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace entrobridge {

namespace {

double log_base_mass(const std::vector<DiscreteMeasure>& measures,
                     const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (std::size_t i = 0; i < measures.size(); ++i) s += measures[i].log_weight(idx[i]);
  return s;
}

void check_shape(const std::vector<std::size_t>& shape,
                 const std::vector<DiscreteMeasure>& measures) {
  if (shape.size() != measures.size())
    throw ShapeMismatchError("tensor rank does not match marginal count");
  for (std::size_t i = 0; i < shape.size(); ++i)
    if (shape[i] != measures[i].size())
      throw ShapeMismatchError("tensor axis " + std::to_string(i) +
                               " does not match marginal size");
}

}  // namespace

bool OptimalityReport::within(double tol) const {
  if (std::abs(gap) > tol) return false;
  if (schrodinger_residual_linf > tol || fixed_point_residual_linf > tol) return false;
  for (double r : marginal_residual_l1)
    if (r > tol) return false;
  return true;
}

double kl_divergence(const Coupling& gamma, const DenseTensor& log_kernel_density,
                     const std::vector<DiscreteMeasure>& base) {
  check_shape(gamma.shape(), base);
  if (log_kernel_density.shape() != gamma.shape())
    throw ShapeMismatchError("kernel/coupling shape mismatch");
  double total = 0.0;
  std::vector<std::size_t> idx(gamma.shape().size(), 0);
  for (std::size_t flat = 0; flat < gamma.mass().size(); ++flat) {
    double g = gamma[flat];
    if (g > 0.0) {
      gamma.mass().unflatten(flat, idx);
      total += g * (std::log(g) - log_base_mass(base, idx) - log_kernel_density[flat]);
    }
  }
  return total;
}

double primal_value(const Coupling& gamma, const CostTensor& cost,
                    const std::vector<DiscreteMeasure>& measures, double epsilon) {
  check_shape(gamma.shape(), measures);
  if (cost.shape() != gamma.shape()) throw ShapeMismatchError("cost/coupling shape mismatch");

  // Split form: transport cost plus scaled relative entropy.
  double transport = 0.0;
  double entropy = 0.0;
  std::vector<std::size_t> idx(gamma.shape().size(), 0);
  for (std::size_t flat = 0; flat < gamma.mass().size(); ++flat) {
    double g = gamma[flat];
    transport += cost[flat] * g;
    if (g > 0.0) {
      gamma.mass().unflatten(flat, idx);
      entropy += g * (std::log(g) - log_base_mass(measures, idx));
    }
  }
  double split = transport + epsilon * entropy;

  double kl_form = epsilon * kl_divergence(gamma, gibbs_log_kernel(cost, epsilon), measures);
  if (std::abs(split - kl_form) > 1e-10 * std::max(1.0, std::abs(split)))
    throw ProblemError("primal evaluation mismatch between KL and cost-plus-entropy forms");
  return split;
}

double dual_value(const Potential& u, const Potential& v, const Problem& problem) {
  if (problem.n_marginals() != 2)
    throw ShapeMismatchError("dual_value requires a 2-marginal problem");
  const DiscreteMeasure& rho1 = problem.measure(0);
  const DiscreteMeasure& rho2 = problem.measure(1);
  if (u.marginal_index != 0 || v.marginal_index != 1 || u.size() != rho1.size() ||
      v.size() != rho2.size())
    throw ShapeMismatchError("dual_value: potential shape mismatch");
  double eps = problem.epsilon();

  double linear = 0.0;
  {
    double s = 0.0;
    for (std::size_t x = 0; x < rho1.size(); ++x) s += u[x] * rho1.weight(x);
    linear += s;
  }
  {
    double s = 0.0;
    for (std::size_t y = 0; y < rho2.size(); ++y) s += v[y] * rho2.weight(y);
    linear += s;
  }

  LogSumExpAccumulator acc;
  const CostTensor& cost = problem.cost();
  std::size_t m = rho2.size();
  for (std::size_t x = 0; x < rho1.size(); ++x)
    for (std::size_t y = 0; y < m; ++y) {
      double su = u[x];
      su += v[y];
      double slw = rho1.log_weight(x);
      slw += rho2.log_weight(y);
      acc.add((su - cost[x * m + y]) / eps + slw);
    }
  return linear - eps * std::exp(acc.result());
}

double dual_value_mm(const std::vector<Potential>& us, const Problem& problem) {
  std::size_t n = problem.n_marginals();
  if (us.size() != n) throw ShapeMismatchError("dual_value_mm: potential count mismatch");
  double eps = problem.epsilon();

  double linear = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const DiscreteMeasure& rho = problem.measure(i);
    if (us[i].marginal_index != i || us[i].size() != rho.size())
      throw ShapeMismatchError("dual_value_mm: potential shape mismatch");
    double s = 0.0;
    for (std::size_t x = 0; x < rho.size(); ++x) s += us[i][x] * rho.weight(x);
    linear += s;
  }

  LogSumExpAccumulator acc;
  const CostTensor& cost = problem.cost();
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t flat = 0; flat < cost.values().size(); ++flat) {
    cost.values().unflatten(flat, idx);
    double su = 0.0;
    double slw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      su += us[i][idx[i]];
      slw += problem.measure(i).log_weight(idx[i]);
    }
    acc.add((su - cost[flat]) / eps + slw);
  }
  return linear - eps * std::exp(acc.result());
}

Coupling coupling_from_potentials(const std::vector<Potential>& us, const Problem& problem) {
  std::size_t n = problem.n_marginals();
  if (us.size() != n)
    throw ShapeMismatchError("coupling_from_potentials: potential count mismatch");
  double eps = problem.epsilon();
  const CostTensor& cost = problem.cost();
  DenseTensor mass(cost.shape());
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t flat = 0; flat < mass.size(); ++flat) {
    mass.unflatten(flat, idx);
    double su = 0.0;
    double slw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      su += us[i][idx[i]];
      slw += problem.measure(i).log_weight(idx[i]);
    }
    mass[flat] = std::exp((su - cost[flat]) / eps + slw);
  }
  return Coupling(std::move(mass));
}

double schrodinger_residual(const std::vector<Potential>& us, const Problem& problem) {
  std::size_t n = problem.n_marginals();
  double eps = problem.epsilon();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Potential> others;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(us[j]);
    Potential hat = mm_transform(others, problem.cost(), problem.measures(), i, eps);
    for (std::size_t x = 0; x < hat.size(); ++x)
      worst = std::max(worst, std::abs(std::exp((us[i][x] - hat[x]) / eps) - 1.0));
  }
  return worst;
}

std::vector<double> marginal_residuals(const Coupling& gamma,
                                       const std::vector<DiscreteMeasure>& measures) {
  check_shape(gamma.shape(), measures);
  std::size_t n = measures.size();
  std::vector<std::vector<double>> sums(n);
  for (std::size_t i = 0; i < n; ++i) sums[i].assign(measures[i].size(), 0.0);
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t flat = 0; flat < gamma.mass().size(); ++flat) {
    gamma.mass().unflatten(flat, idx);
    for (std::size_t i = 0; i < n; ++i) sums[i][idx[i]] += gamma[flat];
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t x = 0; x < sums[i].size(); ++x)
      out[i] += std::abs(sums[i][x] - measures[i].weight(x));
  return out;
}

OptimalityReport check_complementarity(const std::vector<Potential>& us, const Problem& problem,
                                       double tol) {
  (void)tol;
  std::size_t n = problem.n_marginals();
  double eps = problem.epsilon();
  OptimalityReport report;
  report.dual_value = dual_value_mm(us, problem);

  Coupling gamma = coupling_from_potentials(us, problem);
  report.primal_value = primal_value(gamma, problem.cost(), problem.measures(), eps);
  report.gap = report.primal_value - (report.dual_value + eps);
  report.marginal_residual_l1 = marginal_residuals(gamma, problem.measures());

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Potential> others;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(us[j]);
    Potential hat = mm_transform(others, problem.cost(), problem.measures(), i, eps);
    for (std::size_t x = 0; x < hat.size(); ++x) {
      double diff = us[i][x] - hat[x];
      report.fixed_point_residual_linf =
          std::max(report.fixed_point_residual_linf, std::abs(diff));
      report.schrodinger_residual_linf =
          std::max(report.schrodinger_residual_linf, std::abs(std::exp(diff / eps) - 1.0));
    }
  }
  return report;
}

KlDecomposition kl_decomposition(const Coupling& gamma,
                                 const std::vector<DiscreteMeasure>& references) {
  check_shape(gamma.shape(), references);
  std::size_t n = references.size();

  std::vector<std::vector<double>> marg(n);
  for (std::size_t i = 0; i < n; ++i) marg[i].assign(gamma.shape()[i], 0.0);
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t flat = 0; flat < gamma.mass().size(); ++flat) {
    gamma.mass().unflatten(flat, idx);
    for (std::size_t i = 0; i < n; ++i) marg[i][idx[i]] += gamma[flat];
  }

  KlDecomposition out;
  for (std::size_t flat = 0; flat < gamma.mass().size(); ++flat) {
    double g = gamma[flat];
    if (g <= 0.0) continue;
    gamma.mass().unflatten(flat, idx);
    double log_ref = 0.0;
    double log_marg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      log_ref += references[i].log_weight(idx[i]);
      log_marg += std::log(marg[i][idx[i]]);
    }
    out.kl_reference_product += g * (std::log(g) - log_ref);
    out.kl_marginal_product += g * (std::log(g) - log_marg);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t x = 0; x < marg[i].size(); ++x)
      if (marg[i][x] > 0.0)
        out.kl_marginals_sum +=
            marg[i][x] * (std::log(marg[i][x]) - references[i].log_weight(x));
  return out;
}

}  // namespace entrobridge
