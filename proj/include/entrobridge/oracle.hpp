#pragma once

#include <vector>

#include "entrobridge/sinkhorn.hpp"

namespace entrobridge {

struct SweepResult {
  std::vector<double> epsilons;  // descending
  std::vector<double> entropic_values;
  double exact_value = 0.0;
  std::vector<double> gaps;  // entropic - exact
  std::vector<std::size_t> iterations;
  std::vector<bool> converged;
};

struct OracleSolution {
  double value = 0.0;
  Coupling argmin;
};

// Exact unregularized minimum of the transport cost over the polytope, by
// exhaustive enumeration. Two regimes: permutation enumeration for uniform
// equal-size marginals (n <= 10), and basic-feasible-solution enumeration for
// anything with at most 12 entries. Ties break to the lexicographically
// smallest coupling (row-major). Deliberately shares no machinery with the
// solver.
OracleSolution brute_force_ot(const Problem& problem);

// Direct minimization of the entropic objective over the polytope's free
// coordinates: exhaustive grid (grid_resolution points per dimension) followed
// by cyclic golden-section refinement. Requires polytope dimension <= 4.
OracleSolution brute_force_entropic(const Problem& problem, std::size_t grid_resolution);

// Grid-free variant for higher-dimensional polytopes: coordinate descent with
// safeguarded-Newton line searches from the product coupling. The objective is
// strictly convex, so the descent reaches the unique minimum.
OracleSolution entropic_coordinate_descent(const Problem& problem);

// Solves at each epsilon (descending, warm-started) and compares with
// brute_force_ot. Converged entries are checked against the envelope
// 0 <= OT_eps - W <= eps * log(min atom count). With cold_check, each epsilon
// is re-solved from scratch and must land within 1e-9 of the warm result.
SweepResult epsilon_sweep(const Problem& problem, std::vector<double> epsilons,
                          bool cold_check = false);

}  // namespace entrobridge
