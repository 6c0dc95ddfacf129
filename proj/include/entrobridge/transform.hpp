#pragma once

#include <utility>
#include <vector>

#include "entrobridge/core.hpp"
#include "entrobridge/logsumexp.hpp"

namespace entrobridge {

// lambda_u = eps * log sum_x rho(x) exp(u(x)/eps).
double lambda_u(const Potential& u, const DiscreteMeasure& rho, double epsilon);

// Two-marginal entropic transform: for every target atom y,
//   out(y) = -eps * log sum_x rho(x) exp((u(x) - c(x,y))/eps).
// The opposite direction is the same operation with u living on marginal 1.
Potential c_transform(const Potential& u, const CostTensor& cost, const DiscreteMeasure& source,
                      double epsilon);

// N-marginal entropic transform onto marginal i. `others` holds the N-1
// potentials for every marginal j != i (any order; identified by index).
Potential mm_transform(const std::vector<Potential>& others, const CostTensor& cost,
                       const std::vector<DiscreteMeasure>& measures, std::size_t i,
                       double epsilon);

// Replaces (u, v) by a dual-nondecreasing pair with sup norms <= 1.5 * ||c||_inf:
//   u* = v_hat - a*,  v* = (v_hat)_hat + a*,  a* = (lambda_{v_hat} - lambda_v) / 2,
// where v_hat denotes the transform of v.
std::pair<Potential, Potential> recenter_pair(const Potential& u, const Potential& v,
                                              const Problem& problem);

// Translation-gauge projection: subtracts lambda_{u_i} from each of the first
// N-1 potentials and adds their total to the last one. Pointwise sums and the
// dual value are unchanged.
std::vector<Potential> project_gauge(const std::vector<Potential>& us,
                                     const std::vector<DiscreteMeasure>& measures,
                                     double epsilon);

// Transform for the Schroedinger problem with reference measures m1, m2:
//   out = eps*log(rho_t/m_t) + c_transform(v - eps*log(rho_s/m_s))
// with s the marginal v lives on and t the other one. Discrete densities are
// weight ratios matched by atom id.
Potential conjugate_with_reference(const Potential& v, const Problem& problem);

}  // namespace entrobridge
