#pragma once

#include <vector>

#include "entrobridge/dual.hpp"

namespace entrobridge {

struct IterationRecord {
  std::size_t iter = 0;
  double dual = 0.0;
  double primal = 0.0;
  double gap = 0.0;
  double marginal_residual_l1 = 0.0;    // max over marginals
  std::vector<double> gauge_constants;  // multiplicative shifts applied this sweep, product 1
  double wall_ms = 0.0;
};

struct SolveReport {
  bool converged = false;
  std::size_t iterations = 0;  // completed sweeps
  std::vector<Potential> potentials;
  Coupling coupling;
  OptimalityReport optimality;
  std::vector<IterationRecord> trace;
  double epsilon = 0.0;

  // The scaling vector a_i = exp(u_i / eps) of the multiplicative
  // parametrization.
  std::vector<double> scaling(std::size_t i) const;
};

// Alternating dual maximization in the log domain, u^0 = 0. The 2-marginal
// sweep updates v then u; for N >= 3 the sweep runs in ascending marginal
// order. The configured gauge is applied once per sweep. Convergence requires
// both the max L1 marginal residual and the dual increment to drop below their
// tolerances; exhausting max_iter returns a report flagged non-converged
// rather than throwing.
SolveReport sinkhorn_2m(const Problem& problem);

// Warm-started variant (used by the epsilon sweep); `init` replaces u^0 = 0.
SolveReport sinkhorn_2m(const Problem& problem, std::vector<Potential> init);

// N-marginal IPFP. For N = 2 this runs the exact same iteration as
// sinkhorn_2m (identical floating-point trace).
SolveReport sinkhorn_mm(const Problem& problem);

std::vector<double> marginal_residuals(const Coupling& gamma,
                                       const std::vector<DiscreteMeasure>& measures);

}  // namespace entrobridge
