#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "entrobridge/tensor.hpp"

namespace entrobridge {

struct ProblemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatchError : ProblemError {
  using ProblemError::ProblemError;
};

struct NonFiniteCostError : ProblemError {
  using ProblemError::ProblemError;
};

struct NonPositiveWeightError : ProblemError {
  NonPositiveWeightError(const std::string& msg, int atom_id_)
      : ProblemError(msg), atom_id(atom_id_) {}
  int atom_id;
};

struct InvalidEpsilonError : ProblemError {
  using ProblemError::ProblemError;
};

struct SupportError : ProblemError {
  using ProblemError::ProblemError;
};

struct OracleLimitError : ProblemError {
  using ProblemError::ProblemError;
};

struct Atom {
  int id = 0;
  std::vector<double> coords;  // optional, may be empty
};

// A finitely supported probability measure. Weights are strictly positive and
// renormalized to sum to 1 at construction.
class DiscreteMeasure {
 public:
  enum class ZeroWeightPolicy { reject, strip };

  DiscreteMeasure(std::vector<Atom> atoms, std::vector<double> weights,
                  ZeroWeightPolicy policy = ZeroWeightPolicy::reject);

  std::size_t size() const { return weights_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& atom(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  double log_weight(std::size_t i) const { return log_weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& log_weights() const { return log_weights_; }

  // Index of the atom with the given id, if present.
  std::optional<std::size_t> find_atom(int id) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
};

// Dense cost tensor over the product of the marginals' atom sets. Entries must
// be finite; the sup norm is cached at construction.
class CostTensor {
 public:
  static constexpr std::size_t kDefaultEntryCap = 10'000'000;

  explicit CostTensor(DenseTensor values, std::size_t entry_cap = kDefaultEntryCap);

  std::size_t rank() const { return values_.rank(); }
  const std::vector<std::size_t>& shape() const { return values_.shape(); }
  const DenseTensor& values() const { return values_; }
  double operator[](std::size_t flat) const { return values_[flat]; }
  double sup_norm() const { return sup_norm_; }

 private:
  DenseTensor values_;
  double sup_norm_ = 0.0;
};

// A dual potential: one real value per atom of a single marginal.
struct Potential {
  std::size_t marginal_index = 0;
  std::vector<double> values;

  Potential() = default;
  Potential(std::size_t marginal_index_, std::vector<double> values_);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

// A nonnegative mass array over the product atom set. Total mass is not forced
// to 1 here: couplings built from non-optimal potentials carry their actual
// mass, which equals 1 exactly at a dual fixed point.
class Coupling {
 public:
  explicit Coupling(DenseTensor mass);

  const std::vector<std::size_t>& shape() const { return mass_.shape(); }
  const DenseTensor& mass() const { return mass_; }
  double operator[](std::size_t flat) const { return mass_[flat]; }
  double total_mass() const { return total_mass_; }

 private:
  DenseTensor mass_;
  double total_mass_ = 0.0;
};

enum class Gauge { pair_recenter, projection_P, none };

struct SolverConfig {
  double epsilon = 1.0;
  std::size_t max_iter = 100'000;
  double tol_marginal = 1e-9;        // L1 marginal residual
  double tol_dual_increment = 1e-12;
  std::optional<Gauge> gauge;        // unset: pair_recenter for N=2, projection_P for N>=3
  std::size_t record_trace_every = 1;

  void validate() const;
  Gauge effective_gauge(std::size_t n_marginals) const;
};

// A validated, immutable problem instance.
class Problem {
 public:
  Problem(std::vector<DiscreteMeasure> measures, CostTensor cost, SolverConfig config,
          std::vector<DiscreteMeasure> references = {});

  std::size_t n_marginals() const { return measures_.size(); }
  const std::vector<DiscreteMeasure>& measures() const { return measures_; }
  const DiscreteMeasure& measure(std::size_t i) const { return measures_[i]; }
  const CostTensor& cost() const { return cost_; }
  const SolverConfig& config() const { return config_; }
  double epsilon() const { return config_.epsilon; }
  bool has_references() const { return !references_.empty(); }
  const std::vector<DiscreteMeasure>& references() const { return references_; }

 private:
  std::vector<DiscreteMeasure> measures_;
  CostTensor cost_;
  SolverConfig config_;
  std::vector<DiscreteMeasure> references_;
};

Problem build_problem(std::vector<DiscreteMeasure> measures, CostTensor cost,
                      SolverConfig config, std::vector<DiscreteMeasure> references = {});

// Entrywise -c/epsilon. The Gibbs kernel itself is never materialized; all
// downstream computation stays in the log domain.
DenseTensor gibbs_log_kernel(const CostTensor& cost, double epsilon);

}  // namespace entrobridge
