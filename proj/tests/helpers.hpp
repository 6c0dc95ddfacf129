#pragma once

#include <random>
#include <vector>

#include "entrobridge/oracle.hpp"

namespace ebt {

using namespace entrobridge;

inline std::vector<Atom> make_atoms(std::size_t n, int id0 = 0) {
  std::vector<Atom> atoms(n);
  for (std::size_t i = 0; i < n; ++i) atoms[i].id = id0 + static_cast<int>(i);
  return atoms;
}

inline DiscreteMeasure uniform_measure(std::size_t n, int id0 = 0) {
  return DiscreteMeasure(make_atoms(n, id0), std::vector<double>(n, 1.0));
}

inline DiscreteMeasure grid_measure(std::size_t n, double x0, double dx, int id0 = 0) {
  std::vector<Atom> atoms = make_atoms(n, id0);
  for (std::size_t i = 0; i < n; ++i) atoms[i].coords = {x0 + dx * static_cast<double>(i)};
  return DiscreteMeasure(std::move(atoms), std::vector<double>(n, 1.0));
}

inline DiscreteMeasure random_measure(std::mt19937& rng, std::size_t n, int id0 = 0) {
  std::uniform_real_distribution<double> w(0.5, 1.5);
  std::vector<double> weights(n);
  for (double& x : weights) x = w(rng);
  return DiscreteMeasure(make_atoms(n, id0), std::move(weights));
}

inline CostTensor random_cost(std::mt19937& rng, const std::vector<std::size_t>& shape,
                              double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> c(lo, hi);
  DenseTensor t(shape);
  for (std::size_t e = 0; e < t.size(); ++e) t[e] = c(rng);
  return CostTensor(std::move(t));
}

inline CostTensor constant_cost(const std::vector<std::size_t>& shape, double value) {
  DenseTensor t(shape, value);
  return CostTensor(std::move(t));
}

inline CostTensor matrix_cost(std::size_t n, std::size_t m, std::vector<double> flat) {
  DenseTensor t({n, m});
  t.data() = std::move(flat);
  return CostTensor(std::move(t));
}

inline Potential random_potential(std::mt19937& rng, std::size_t marginal, std::size_t n,
                                  double amp = 1.0) {
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return Potential(marginal, std::move(v));
}

// Random point in the transport polytope (N = 2): start at the product
// coupling and apply mass-preserving 2x2 rotations.
inline Coupling random_feasible_coupling(std::mt19937& rng, const DiscreteMeasure& rho1,
                                         const DiscreteMeasure& rho2, std::size_t rounds = 64) {
  std::size_t n = rho1.size();
  std::size_t m = rho2.size();
  DenseTensor g({n, m});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) g[i * m + j] = rho1.weight(i) * rho2.weight(j);
  if (n > 1 && m > 1) {
    std::uniform_int_distribution<std::size_t> pi(0, n - 1);
    std::uniform_int_distribution<std::size_t> pj(0, m - 1);
    std::uniform_real_distribution<double> frac(0.0, 0.9);
    for (std::size_t r = 0; r < rounds; ++r) {
      std::size_t i1 = pi(rng), i2 = pi(rng), j1 = pj(rng), j2 = pj(rng);
      if (i1 == i2 || j1 == j2) continue;
      double delta = frac(rng) * std::min(g[i1 * m + j2], g[i2 * m + j1]);
      g[i1 * m + j1] += delta;
      g[i2 * m + j2] += delta;
      g[i1 * m + j2] -= delta;
      g[i2 * m + j1] -= delta;
    }
  }
  return Coupling(std::move(g));
}

inline SolverConfig tight_config(double epsilon, double tol = 1e-11) {
  SolverConfig c;
  c.epsilon = epsilon;
  c.tol_marginal = tol;
  return c;
}

// The closed-form instance used throughout: uniform 2x2 marginals with
// cost [[0,1],[1,0]]. At epsilon = 1 the optimum is gamma_11 = 1/(2(1+1/e)),
// value log(2/(1+1/e)), potentials u = v = value/2.
inline Problem symmetric_2x2(double epsilon = 1.0, double tol = 1e-11) {
  return build_problem({uniform_measure(2), uniform_measure(2)},
                       matrix_cost(2, 2, {0, 1, 1, 0}), tight_config(epsilon, tol));
}

inline double sym22_value() { return std::log(2.0 / (1.0 + std::exp(-1.0))); }
inline double sym22_gamma11() { return 1.0 / (2.0 * (1.0 + std::exp(-1.0))); }

}  // namespace ebt
