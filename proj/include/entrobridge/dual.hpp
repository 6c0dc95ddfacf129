#pragma once

#include <vector>

#include "entrobridge/core.hpp"
#include "entrobridge/transform.hpp"

namespace entrobridge {

struct OptimalityReport {
  double dual_value = 0.0;
  double primal_value = 0.0;
  double gap = 0.0;  // primal - (dual + eps), >= 0 by weak duality
  double schrodinger_residual_linf = 0.0;
  double fixed_point_residual_linf = 0.0;
  std::vector<double> marginal_residual_l1;

  bool within(double tol) const;
};

// KL(gamma | k * base) where both gamma and the kernel are read as densities
// against the product of `base`; 0*log 0 = 0.
double kl_divergence(const Coupling& gamma, const DenseTensor& log_kernel_density,
                     const std::vector<DiscreteMeasure>& base);

// Entropic transport objective of an arbitrary nonnegative array:
// integral of c dgamma + eps*KL(gamma | product of measures). Evaluated both in
// this split form and as eps*KL(gamma | Gibbs kernel); the two must agree
// within 1e-10.
double primal_value(const Coupling& gamma, const CostTensor& cost,
                    const std::vector<DiscreteMeasure>& measures, double epsilon);

// Entropy-Kantorovich dual functional (2-marginal).
double dual_value(const Potential& u, const Potential& v, const Problem& problem);

// N-marginal dual functional; coincides with dual_value when N = 2.
double dual_value_mm(const std::vector<Potential>& us, const Problem& problem);

// gamma = exp((sum_i u_i - c)/eps) * product of marginals. Not normalized; the
// total mass equals 1 exactly at a dual fixed point.
Coupling coupling_from_potentials(const std::vector<Potential>& us, const Problem& problem);

// Sup norm of |exp((u_i - transform of the others)/eps) - 1| over all marginals.
double schrodinger_residual(const std::vector<Potential>& us, const Problem& problem);

OptimalityReport check_complementarity(const std::vector<Potential>& us, const Problem& problem,
                                       double tol);

struct ReferenceReduction {
  double schrodinger_value = 0.0;   // direct solve against the reference product base
  double entropic_ot_value = 0.0;   // solve against the marginal product base
  double kl_correction = 0.0;       // eps * sum_i KL(rho_i | m_i)
};

// Solves both problems and checks schrodinger_value = entropic_ot_value +
// kl_correction within tol.
ReferenceReduction reference_reduction(const Problem& problem, double tol = 1e-9);

struct KlDecomposition {
  double kl_reference_product = 0.0;  // KL(gamma | m1 x ... x mN)
  double kl_marginal_product = 0.0;   // KL(gamma | rho1 x ... x rhoN), rho_i = gamma's marginals
  double kl_marginals_sum = 0.0;      // sum_i KL(rho_i | m_i)
};

// Three-term decomposition for an arbitrary coupling against reference
// measures; the first entry equals the sum of the other two.
KlDecomposition kl_decomposition(const Coupling& gamma,
                                 const std::vector<DiscreteMeasure>& references);

}  // namespace entrobridge
