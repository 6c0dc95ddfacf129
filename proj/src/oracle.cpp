#include "entrobridge/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace entrobridge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Coupling make_coupling(const std::vector<std::size_t>& shape, const std::vector<double>& flat) {
  DenseTensor t(shape);
  t.data() = flat;
  return Coupling(std::move(t));
}

double transport_cost(const std::vector<double>& gamma, const CostTensor& cost) {
  double s = 0.0;
  for (std::size_t e = 0; e < gamma.size(); ++e) s += cost[e] * gamma[e];
  return s;
}

// true if a is lexicographically smaller than b (row-major entry order)
bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t e = 0; e < a.size(); ++e) {
    if (a[e] != b[e]) return a[e] < b[e];
  }
  return false;
}

void consider(double value, std::vector<double>&& gamma, double& best_value,
              std::vector<double>& best_gamma) {
  if (best_gamma.empty()) {
    best_value = value;
    best_gamma = std::move(gamma);
    return;
  }
  double tie = 1e-12 * (1.0 + std::abs(best_value));
  if (value < best_value - tie) {
    best_value = value;
    best_gamma = std::move(gamma);
  } else if (value <= best_value + tie && lex_less(gamma, best_gamma)) {
    best_gamma = std::move(gamma);
  }
}

bool is_uniform(const DiscreteMeasure& rho) {
  double w = 1.0 / static_cast<double>(rho.size());
  for (std::size_t x = 0; x < rho.size(); ++x)
    if (std::abs(rho.weight(x) - w) > 1e-12) return false;
  return true;
}

OracleSolution permutation_search(const Problem& problem) {
  std::size_t n = problem.measure(0).size();
  const CostTensor& cost = problem.cost();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double w = 1.0 / static_cast<double>(n);

  double best_value = kInf;
  std::vector<double> best_gamma;
  do {
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) value += w * cost[i * n + perm[i]];
    double tie = 1e-12 * (1.0 + std::abs(best_value));
    if (value > best_value + tie) continue;
    std::vector<double> gamma(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) gamma[i * n + perm[i]] = w;
    consider(value, std::move(gamma), best_value, best_gamma);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return OracleSolution{best_value, make_coupling(cost.shape(), best_gamma)};
}

// Enumerate vertices of the transport polytope as basic feasible solutions of
// the marginal constraint system.
OracleSolution vertex_search(const Problem& problem) {
  std::size_t n = problem.measure(0).size();
  std::size_t m = problem.measure(1).size();
  std::size_t cols = n * m;
  std::size_t rows = n + m - 1;  // last column-sum constraint is redundant

  std::vector<std::vector<double>> A(rows, std::vector<double>(cols, 0.0));
  std::vector<double> b(rows, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) A[i][i * m + j] = 1.0;
    b[i] = problem.measure(0).weight(i);
  }
  for (std::size_t j = 0; j + 1 < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) A[n + j][i * m + j] = 1.0;
    b[n + j] = problem.measure(1).weight(j);
  }

  double best_value = kInf;
  std::vector<double> best_gamma;

  std::vector<std::size_t> pick(rows);
  std::iota(pick.begin(), pick.end(), 0);
  std::vector<bool> mask(cols, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(rows), true);
  // iterate over all column subsets of size `rows` via the sorted-mask trick
  std::sort(mask.begin(), mask.end());
  do {
    std::vector<std::size_t> basis;
    for (std::size_t c = 0; c < cols; ++c)
      if (mask[c]) basis.push_back(c);

    // solve A[:, basis] x = b by Gaussian elimination with partial pivoting
    std::vector<std::vector<double>> M(rows, std::vector<double>(rows + 1, 0.0));
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < rows; ++k) M[r][k] = A[r][basis[k]];
      M[r][rows] = b[r];
    }
    bool singular = false;
    for (std::size_t col = 0; col < rows && !singular; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < rows; ++r)
        if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
      if (std::abs(M[piv][col]) < 1e-9) {
        singular = true;
        break;
      }
      std::swap(M[piv], M[col]);
      for (std::size_t r = col + 1; r < rows; ++r) {
        double f = M[r][col] / M[col][col];
        if (f == 0.0) continue;
        for (std::size_t k = col; k <= rows; ++k) M[r][k] -= f * M[col][k];
      }
    }
    if (singular) continue;
    std::vector<double> x(rows, 0.0);
    for (std::size_t r = rows; r-- > 0;) {
      double s = M[r][rows];
      for (std::size_t k = r + 1; k < rows; ++k) s -= M[r][k] * x[k];
      x[r] = s / M[r][r];
    }
    bool feasible = true;
    for (double v : x)
      if (v < -1e-9) {
        feasible = false;
        break;
      }
    if (!feasible) continue;

    std::vector<double> gamma(cols, 0.0);
    for (std::size_t k = 0; k < rows; ++k) gamma[basis[k]] = std::max(x[k], 0.0);
    consider(transport_cost(gamma, problem.cost()), std::move(gamma), best_value, best_gamma);
  } while (std::next_permutation(mask.begin(), mask.end()));

  if (!std::isfinite(best_value))
    throw OracleLimitError("vertex enumeration found no feasible basis");
  return OracleSolution{best_value, make_coupling(problem.cost().shape(), best_gamma)};
}

// ---- entropic oracles: explicit parametrization of the polytope ----

struct Polytope {
  std::vector<std::size_t> shape;
  std::vector<double> base;                // product coupling
  std::vector<double> log_base;
  std::vector<std::vector<double>> dirs;   // null-space basis of the marginal map
};

Polytope build_polytope(const Problem& problem) {
  Polytope p;
  p.shape = problem.cost().shape();
  std::size_t n_marg = p.shape.size();
  std::size_t total = problem.cost().values().size();

  p.base.resize(total);
  p.log_base.resize(total);
  std::vector<std::size_t> idx(n_marg, 0);
  for (std::size_t e = 0; e < total; ++e) {
    problem.cost().values().unflatten(e, idx);
    double lb = 0.0;
    for (std::size_t i = 0; i < n_marg; ++i) lb += problem.measure(i).log_weight(idx[i]);
    p.log_base[e] = lb;
    p.base[e] = std::exp(lb);
  }

  // marginal constraint matrix: one row per (marginal, atom)
  std::size_t rows = 0;
  for (std::size_t i = 0; i < n_marg; ++i) rows += p.shape[i];
  std::vector<std::vector<double>> A(rows, std::vector<double>(total, 0.0));
  {
    std::size_t r = 0;
    for (std::size_t i = 0; i < n_marg; ++i)
      for (std::size_t x = 0; x < p.shape[i]; ++x, ++r)
        for (std::size_t e = 0; e < total; ++e) {
          problem.cost().values().unflatten(e, idx);
          if (idx[i] == x) A[r][e] = 1.0;
        }
  }

  // reduced row echelon form
  std::vector<std::size_t> pivot_cols;
  std::size_t r = 0;
  for (std::size_t c = 0; c < total && r < rows; ++c) {
    std::size_t piv = r;
    for (std::size_t k = r + 1; k < rows; ++k)
      if (std::abs(A[k][c]) > std::abs(A[piv][c])) piv = k;
    if (std::abs(A[piv][c]) < 1e-9) continue;
    std::swap(A[piv], A[r]);
    double d = A[r][c];
    for (std::size_t e = c; e < total; ++e) A[r][e] /= d;
    for (std::size_t k = 0; k < rows; ++k) {
      if (k == r || A[k][c] == 0.0) continue;
      double f = A[k][c];
      for (std::size_t e = c; e < total; ++e) A[k][e] -= f * A[r][e];
    }
    pivot_cols.push_back(c);
    ++r;
  }

  std::vector<bool> is_pivot(total, false);
  for (std::size_t c : pivot_cols) is_pivot[c] = true;
  for (std::size_t f = 0; f < total; ++f) {
    if (is_pivot[f]) continue;
    std::vector<double> dir(total, 0.0);
    dir[f] = 1.0;
    for (std::size_t k = 0; k < pivot_cols.size(); ++k) dir[pivot_cols[k]] = -A[k][f];
    p.dirs.push_back(std::move(dir));
  }
  return p;
}

double entropic_objective(const std::vector<double>& gamma, const CostTensor& cost,
                          const std::vector<double>& log_base, double epsilon) {
  double transport = 0.0;
  double entropy = 0.0;
  for (std::size_t e = 0; e < gamma.size(); ++e) {
    double g = gamma[e];
    if (g < 0.0) return kInf;
    transport += cost[e] * g;
    if (g > 0.0) entropy += g * (std::log(g) - log_base[e]);
  }
  return transport + epsilon * entropy;
}

// feasible step range along `dir` from `gamma` (keeps all entries >= 0)
std::pair<double, double> step_range(const std::vector<double>& gamma,
                                     const std::vector<double>& dir) {
  double lo = -kInf;
  double hi = kInf;
  for (std::size_t e = 0; e < gamma.size(); ++e) {
    double d = dir[e];
    if (d > 1e-14)
      lo = std::max(lo, -gamma[e] / d);
    else if (d < -1e-14)
      hi = std::min(hi, gamma[e] / (-d));
  }
  return {lo, hi};
}

template <typename F>
double golden_section(const F& f, double lo, double hi) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int iter = 0; iter < 200 && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++iter) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

// Cyclic line minimization with safeguarded Newton steps. Along a feasible
// direction d the objective has derivative g(t) = sum_e d_e*(c_e +
// eps*log(gamma_e/base_e)) (the linear terms of the KL cancel because every
// marginal sum of d is zero), which blows up to -inf/+inf at the segment ends,
// so a root always lies strictly inside.
void newton_descent(std::vector<double>& gamma, const Polytope& p, const CostTensor& cost,
                    double epsilon) {
  auto grad = [&](const std::vector<double>& dir, double t) {
    double g = 0.0;
    for (std::size_t e = 0; e < gamma.size(); ++e) {
      if (dir[e] == 0.0) continue;
      g += dir[e] * (cost[e] + epsilon * (std::log(gamma[e] + t * dir[e]) - p.log_base[e]));
    }
    return g;
  };
  auto hess = [&](const std::vector<double>& dir, double t) {
    double h = 0.0;
    for (std::size_t e = 0; e < gamma.size(); ++e) {
      if (dir[e] == 0.0) continue;
      h += epsilon * dir[e] * dir[e] / (gamma[e] + t * dir[e]);
    }
    return h;
  };

  for (std::size_t cycle = 0; cycle < 20000; ++cycle) {
    double max_grad = 0.0;
    for (const auto& dir : p.dirs) {
      auto [lo, hi] = step_range(gamma, dir);
      if (!(hi - lo > 1e-14)) continue;
      double g0 = grad(dir, 0.0);
      max_grad = std::max(max_grad, std::abs(g0));
      if (std::abs(g0) < 1e-14) continue;

      // bracketed Newton from t = 0
      double blo = lo, bhi = hi;
      (g0 > 0.0 ? bhi : blo) = 0.0;
      double t = 0.0;
      for (int it = 0; it < 100; ++it) {
        double g = grad(dir, t);
        if (std::abs(g) < 1e-14) break;
        (g > 0.0 ? bhi : blo) = t;
        double step = -g / hess(dir, t);
        double next = t + step;
        if (!(next > blo && next < bhi)) next = 0.5 * (blo + bhi);
        if (std::abs(next - t) < 1e-17) break;
        t = next;
      }
      if (t == 0.0) continue;
      for (std::size_t e = 0; e < gamma.size(); ++e)
        if (dir[e] != 0.0) gamma[e] = std::max(gamma[e] + t * dir[e], 1e-300);
    }
    if (max_grad < 1e-12) break;
  }
}

// cyclic exact line minimization over the polytope's free directions
void coordinate_descent(std::vector<double>& gamma, const Polytope& p, const CostTensor& cost,
                        double epsilon) {
  std::vector<double> trial(gamma.size());
  auto line = [&](const std::vector<double>& dir, double t) {
    for (std::size_t e = 0; e < gamma.size(); ++e)
      trial[e] = std::max(gamma[e] + t * dir[e], 0.0);
    return entropic_objective(trial, cost, p.log_base, epsilon);
  };
  // A loose stop suffices: the caller polishes with newton_descent, which
  // needs only a strictly interior starting point.
  for (std::size_t cycle = 0; cycle < 200; ++cycle) {
    double max_move = 0.0;
    for (const auto& dir : p.dirs) {
      auto [lo, hi] = step_range(gamma, dir);
      if (!(hi - lo > 1e-14)) continue;
      double t = golden_section([&](double s) { return line(dir, s); }, lo, hi);
      if (t == 0.0) continue;
      for (std::size_t e = 0; e < gamma.size(); ++e)
        gamma[e] = std::max(gamma[e] + t * dir[e], 0.0);
      max_move = std::max(max_move, std::abs(t));
    }
    if (max_move < 1e-10) break;
  }
}

}  // namespace

OracleSolution brute_force_ot(const Problem& problem) {
  if (problem.n_marginals() != 2)
    throw OracleLimitError("brute_force_ot handles 2-marginal problems only");
  std::size_t n = problem.measure(0).size();
  std::size_t m = problem.measure(1).size();
  if (n == m && n <= 10 && is_uniform(problem.measure(0)) && is_uniform(problem.measure(1)))
    return permutation_search(problem);
  if (n * m <= 12) return vertex_search(problem);
  throw OracleLimitError("instance too large for exhaustive search (" + std::to_string(n) +
                         "x" + std::to_string(m) + ")");
}

OracleSolution brute_force_entropic(const Problem& problem, std::size_t grid_resolution) {
  Polytope p = build_polytope(problem);
  if (p.dirs.size() > 4)
    throw OracleLimitError("transport polytope dimension " + std::to_string(p.dirs.size()) +
                           " exceeds grid-search limit 4");
  if (grid_resolution < 2) throw OracleLimitError("grid_resolution must be at least 2");
  double eps = problem.epsilon();
  const CostTensor& cost = problem.cost();

  std::size_t dim = p.dirs.size();
  std::vector<double> best = p.base;
  if (dim > 0) {
    std::vector<std::pair<double, double>> box(dim);
    for (std::size_t k = 0; k < dim; ++k) box[k] = step_range(p.base, p.dirs[k]);

    double best_val = entropic_objective(p.base, cost, p.log_base, eps);
    std::vector<std::size_t> grid_shape(dim, grid_resolution);
    std::vector<std::size_t> idx(dim, 0);
    std::vector<double> trial(p.base.size());
    while (true) {
      trial = p.base;
      for (std::size_t k = 0; k < dim; ++k) {
        double t = box[k].first + (box[k].second - box[k].first) *
                                      static_cast<double>(idx[k]) /
                                      static_cast<double>(grid_resolution - 1);
        for (std::size_t e = 0; e < trial.size(); ++e) trial[e] += t * p.dirs[k][e];
      }
      double val = entropic_objective(trial, cost, p.log_base, eps);
      if (val < best_val) {
        best_val = val;
        best = trial;
      }
      if (!next_index(idx, grid_shape)) break;
    }
  }

  coordinate_descent(best, p, cost, eps);
  newton_descent(best, p, cost, eps);
  return OracleSolution{entropic_objective(best, cost, p.log_base, eps),
                        make_coupling(p.shape, best)};
}

OracleSolution entropic_coordinate_descent(const Problem& problem) {
  Polytope p = build_polytope(problem);
  std::vector<double> gamma = p.base;
  newton_descent(gamma, p, problem.cost(), problem.epsilon());
  return OracleSolution{
      entropic_objective(gamma, problem.cost(), p.log_base, problem.epsilon()),
      make_coupling(p.shape, gamma)};
}

SweepResult epsilon_sweep(const Problem& problem, std::vector<double> epsilons,
                          bool cold_check) {
  if (epsilons.empty()) throw OracleLimitError("epsilon_sweep needs at least one epsilon");
  for (std::size_t k = 0; k + 1 < epsilons.size(); ++k)
    if (!(epsilons[k] > epsilons[k + 1]))
      throw OracleLimitError("epsilon_sweep: epsilons must be strictly descending");

  SweepResult out;
  out.epsilons = epsilons;
  out.exact_value = brute_force_ot(problem).value;

  double envelope_log = std::log(static_cast<double>(
      std::min(problem.measure(0).size(), problem.measure(1).size())));

  std::vector<Potential> warm;
  for (double eps : epsilons) {
    SolverConfig config = problem.config();
    config.epsilon = eps;
    if (cold_check) {
      // the warm/cold value comparison is at 1e-9; both solves must land well
      // inside that
      config.tol_marginal = std::min(config.tol_marginal, 1e-12);
      config.tol_dual_increment = std::min(config.tol_dual_increment, 1e-14);
    }
    Problem instance(problem.measures(), problem.cost(), config, problem.references());
    SolveReport report = warm.empty() ? sinkhorn_2m(instance)
                                      : sinkhorn_2m(instance, warm);
    warm = report.potentials;

    double value = report.optimality.primal_value;
    out.entropic_values.push_back(value);
    out.gaps.push_back(value - out.exact_value);
    out.iterations.push_back(report.iterations);
    out.converged.push_back(report.converged);
    if (report.converged) {
      if (value < out.exact_value - 1e-9)
        throw OracleLimitError("entropic value fell below the exact optimum");
      if (value - out.exact_value > eps * envelope_log + 1e-6)
        throw OracleLimitError("entropic value escaped the mutual-information envelope");
      if (cold_check) {
        SolveReport cold = sinkhorn_2m(instance);
        if (cold.converged &&
            std::abs(cold.optimality.primal_value - value) > 1e-9)
          throw OracleLimitError("warm/cold start mismatch in epsilon sweep");
      }
    }
  }
  return out;
}

}  // namespace entrobridge
