#include "entrobridge/core.hpp"

#include <cmath>
#include <iostream>
#include <set>

namespace entrobridge {

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms, std::vector<double> weights,
                                 ZeroWeightPolicy policy) {
  if (atoms.size() != weights.size())
    throw ShapeMismatchError("measure has " + std::to_string(atoms.size()) + " atoms but " +
                             std::to_string(weights.size()) + " weights");
  if (atoms.empty()) throw ProblemError("measure must have at least one atom");

  std::set<int> ids;
  for (const Atom& a : atoms)
    if (!ids.insert(a.id).second)
      throw ProblemError("duplicate atom id " + std::to_string(a.id));

  for (std::size_t i = 0; i < weights.size(); ++i) {
    double w = weights[i];
    if (!std::isfinite(w) || w < 0.0)
      throw NonPositiveWeightError(
          "negative or non-finite weight " + std::to_string(w) + " at atom id " +
              std::to_string(atoms[i].id),
          atoms[i].id);
    if (w == 0.0) {
      if (policy == ZeroWeightPolicy::reject)
        throw NonPositiveWeightError("zero weight at atom id " + std::to_string(atoms[i].id),
                                     atoms[i].id);
      continue;
    }
    atoms_.push_back(atoms[i]);
    weights_.push_back(w);
  }
  if (policy == ZeroWeightPolicy::strip && atoms_.size() != atoms.size())
    std::cerr << "warning: stripped " << (atoms.size() - atoms_.size())
              << " zero-weight atom(s)\n";
  if (weights_.empty()) throw ProblemError("measure has no positive-weight atoms");

  double total = 0.0;
  for (double w : weights_) total += w;
  for (double& w : weights_) w /= total;
  // One more pass so the stored weights sum to 1 within 1e-12.
  total = 0.0;
  for (double w : weights_) total += w;
  if (std::abs(total - 1.0) > 1e-12)
    for (double& w : weights_) w /= total;

  log_weights_.reserve(weights_.size());
  for (double w : weights_) log_weights_.push_back(std::log(w));
}

std::optional<std::size_t> DiscreteMeasure::find_atom(int id) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i].id == id) return i;
  return std::nullopt;
}

CostTensor::CostTensor(DenseTensor values, std::size_t entry_cap) : values_(std::move(values)) {
  if (values_.rank() < 2) throw ShapeMismatchError("cost tensor must have rank >= 2");
  if (values_.size() > entry_cap)
    throw ProblemError("cost tensor has " + std::to_string(values_.size()) +
                       " entries, exceeding the cap of " + std::to_string(entry_cap));
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double c = values_[i];
    if (!std::isfinite(c))
      throw NonFiniteCostError("non-finite cost entry at flat index " + std::to_string(i));
    sup_norm_ = std::max(sup_norm_, std::abs(c));
  }
}

Potential::Potential(std::size_t marginal_index_, std::vector<double> values_)
    : marginal_index(marginal_index_), values(std::move(values_)) {
  for (double v : values)
    if (!std::isfinite(v)) throw ProblemError("non-finite potential entry");
}

Coupling::Coupling(DenseTensor mass) : mass_(std::move(mass)) {
  for (std::size_t i = 0; i < mass_.size(); ++i) {
    if (!(mass_[i] >= 0.0)) throw ProblemError("negative coupling entry");
    total_mass_ += mass_[i];
  }
}

void SolverConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw InvalidEpsilonError("epsilon must be positive and finite, got " +
                              std::to_string(epsilon));
  if (max_iter == 0) throw ProblemError("max_iter must be positive");
  if (!(tol_marginal > 0.0)) throw ProblemError("tol_marginal must be positive");
  if (!(tol_dual_increment > 0.0)) throw ProblemError("tol_dual_increment must be positive");
  if (record_trace_every == 0) throw ProblemError("record_trace_every must be positive");
}

Gauge SolverConfig::effective_gauge(std::size_t n_marginals) const {
  if (gauge) return *gauge;
  return n_marginals == 2 ? Gauge::pair_recenter : Gauge::projection_P;
}

Problem::Problem(std::vector<DiscreteMeasure> measures, CostTensor cost, SolverConfig config,
                 std::vector<DiscreteMeasure> references)
    : measures_(std::move(measures)),
      cost_(std::move(cost)),
      config_(config),
      references_(std::move(references)) {
  config_.validate();
  if (measures_.size() < 2) throw ShapeMismatchError("a problem needs at least 2 marginals");
  if (cost_.rank() != measures_.size())
    throw ShapeMismatchError("cost rank " + std::to_string(cost_.rank()) +
                             " does not match " + std::to_string(measures_.size()) +
                             " marginals");
  for (std::size_t i = 0; i < measures_.size(); ++i)
    if (cost_.shape()[i] != measures_[i].size())
      throw ShapeMismatchError("cost axis " + std::to_string(i) + " has length " +
                               std::to_string(cost_.shape()[i]) + " but marginal has " +
                               std::to_string(measures_[i].size()) + " atoms");
  if (!references_.empty()) {
    if (references_.size() != measures_.size())
      throw ShapeMismatchError("reference measure count does not match marginal count");
    for (std::size_t i = 0; i < measures_.size(); ++i)
      for (const Atom& a : measures_[i].atoms())
        if (!references_[i].find_atom(a.id))
          throw SupportError("reference measure " + std::to_string(i) +
                             " is missing atom id " + std::to_string(a.id));
  }
}

Problem build_problem(std::vector<DiscreteMeasure> measures, CostTensor cost,
                      SolverConfig config, std::vector<DiscreteMeasure> references) {
  return Problem(std::move(measures), std::move(cost), config, std::move(references));
}

DenseTensor gibbs_log_kernel(const CostTensor& cost, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidEpsilonError("epsilon must be positive");
  DenseTensor out(cost.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -cost[i] / epsilon;
  return out;
}

}  // namespace entrobridge
