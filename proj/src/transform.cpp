#include "entrobridge/transform.hpp"

#include <cmath>
#include <string>

#include "entrobridge/parallel.hpp"

namespace entrobridge {

double lambda_u(const Potential& u, const DiscreteMeasure& rho, double epsilon) {
  if (u.size() != rho.size())
    throw ShapeMismatchError("potential length does not match measure size");
  LogSumExpAccumulator acc;
  for (std::size_t x = 0; x < rho.size(); ++x) acc.add(u[x] / epsilon + rho.log_weight(x));
  return epsilon * acc.result();
}

Potential c_transform(const Potential& u, const CostTensor& cost, const DiscreteMeasure& source,
                      double epsilon) {
  if (cost.rank() != 2) throw ShapeMismatchError("c_transform requires a 2-marginal cost");
  std::size_t s = u.marginal_index;
  if (s > 1) throw ShapeMismatchError("c_transform: marginal index out of range");
  std::size_t t = 1 - s;
  if (source.size() != cost.shape()[s] || u.size() != cost.shape()[s])
    throw ShapeMismatchError("c_transform: potential/measure length does not match cost axis " +
                             std::to_string(s));

  std::size_t n_src = cost.shape()[s];
  std::size_t n_tgt = cost.shape()[t];
  std::size_t stride_s = cost.values().strides()[s];
  std::size_t stride_t = cost.values().strides()[t];

  std::vector<double> out(n_tgt);
  parallel_for(n_tgt, [&](std::size_t y) {
    LogSumExpAccumulator acc;
    for (std::size_t x = 0; x < n_src; ++x) {
      double c = cost[x * stride_s + y * stride_t];
      acc.add((u[x] - c) / epsilon + source.log_weight(x));
    }
    out[y] = -epsilon * acc.result();
  });
  return Potential(t, std::move(out));
}

Potential mm_transform(const std::vector<Potential>& others, const CostTensor& cost,
                       const std::vector<DiscreteMeasure>& measures, std::size_t i,
                       double epsilon) {
  std::size_t n = measures.size();
  if (i >= n) throw ShapeMismatchError("mm_transform: marginal index out of range");
  if (cost.rank() != n) throw ShapeMismatchError("mm_transform: cost rank/measure mismatch");
  if (others.size() != n - 1)
    throw ShapeMismatchError("mm_transform: expected " + std::to_string(n - 1) + " potentials");

  std::vector<const Potential*> by_index(n, nullptr);
  for (const Potential& p : others) {
    if (p.marginal_index >= n || p.marginal_index == i || by_index[p.marginal_index])
      throw ShapeMismatchError("mm_transform: bad potential set for target marginal " +
                               std::to_string(i));
    if (p.size() != measures[p.marginal_index].size())
      throw ShapeMismatchError("mm_transform: potential length mismatch on marginal " +
                               std::to_string(p.marginal_index));
    by_index[p.marginal_index] = &p;
  }

  const auto& shape = cost.shape();
  const auto& strides = cost.values().strides();
  std::vector<std::size_t> other_axes;
  std::vector<std::size_t> other_shape;
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) {
      other_axes.push_back(j);
      other_shape.push_back(shape[j]);
    }

  std::vector<double> out(shape[i]);
  parallel_for(shape[i], [&](std::size_t xi) {
    LogSumExpAccumulator acc;
    std::vector<std::size_t> idx(other_axes.size(), 0);
    // Row-major sweep over the product of the remaining atom sets.
    while (true) {
      std::size_t flat = xi * strides[i];
      double su = 0.0;
      double slw = 0.0;
      for (std::size_t k = 0; k < other_axes.size(); ++k) {
        std::size_t j = other_axes[k];
        flat += idx[k] * strides[j];
        su += (*by_index[j])[idx[k]];
        slw += measures[j].log_weight(idx[k]);
      }
      acc.add((su - cost[flat]) / epsilon + slw);
      if (!next_index(idx, other_shape)) break;
    }
    out[xi] = -epsilon * acc.result();
  });
  return Potential(i, std::move(out));
}

std::pair<Potential, Potential> recenter_pair(const Potential& u, const Potential& v,
                                              const Problem& problem) {
  if (problem.n_marginals() != 2)
    throw ShapeMismatchError("recenter_pair requires a 2-marginal problem");
  if (u.marginal_index != 0 || v.marginal_index != 1)
    throw ShapeMismatchError("recenter_pair expects (u on marginal 0, v on marginal 1)");
  double eps = problem.epsilon();
  Potential u_star = c_transform(v, problem.cost(), problem.measure(1), eps);
  Potential v_star = c_transform(u_star, problem.cost(), problem.measure(0), eps);
  double shift = (lambda_u(u_star, problem.measure(0), eps) -
                  lambda_u(v, problem.measure(1), eps)) /
                 2.0;
  for (double& x : u_star.values) x -= shift;
  for (double& x : v_star.values) x += shift;
  return {std::move(u_star), std::move(v_star)};
}

std::vector<Potential> project_gauge(const std::vector<Potential>& us,
                                     const std::vector<DiscreteMeasure>& measures,
                                     double epsilon) {
  std::size_t n = measures.size();
  if (us.size() != n || n < 2) throw ShapeMismatchError("project_gauge: potential count mismatch");
  std::vector<Potential> out = us;
  double total = 0.0;  // accumulated in ascending marginal order
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (us[i].marginal_index != i) throw ShapeMismatchError("project_gauge: potentials out of order");
    double li = lambda_u(us[i], measures[i], epsilon);
    for (double& x : out[i].values) x -= li;
    total += li;
  }
  for (double& x : out[n - 1].values) x += total;
  return out;
}

Potential conjugate_with_reference(const Potential& v, const Problem& problem) {
  if (problem.n_marginals() != 2)
    throw ShapeMismatchError("conjugate_with_reference requires a 2-marginal problem");
  if (!problem.has_references())
    throw SupportError("conjugate_with_reference: problem has no reference measures");
  std::size_t s = v.marginal_index;
  if (s > 1) throw ShapeMismatchError("conjugate_with_reference: marginal index out of range");
  std::size_t t = 1 - s;
  double eps = problem.epsilon();

  const DiscreteMeasure& rho_s = problem.measure(s);
  const DiscreteMeasure& rho_t = problem.measure(t);
  const DiscreteMeasure& m_s = problem.references()[s];
  const DiscreteMeasure& m_t = problem.references()[t];

  auto log_density = [](const DiscreteMeasure& rho, const DiscreteMeasure& m, std::size_t x) {
    auto j = m.find_atom(rho.atom(x).id);
    if (!j)
      throw SupportError("reference measure is missing atom id " +
                         std::to_string(rho.atom(x).id));
    return std::log(rho.weight(x)) - std::log(m.weight(*j));
  };

  Potential shifted = v;
  for (std::size_t y = 0; y < shifted.size(); ++y)
    shifted[y] -= eps * log_density(rho_s, m_s, y);
  Potential out = c_transform(shifted, problem.cost(), rho_s, eps);
  for (std::size_t x = 0; x < out.size(); ++x) out[x] += eps * log_density(rho_t, m_t, x);
  return out;
}

}  // namespace entrobridge
