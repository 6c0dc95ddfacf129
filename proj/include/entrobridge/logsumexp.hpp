#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace entrobridge {

// Streaming log-sum-exp with max-subtraction and Kahan-compensated summation.
// Terms must be added in ascending atom id order for bit-reproducible runs.
class LogSumExpAccumulator {
 public:
  void add(double term) {
    if (std::isnan(term)) throw std::invalid_argument("NaN term in log-sum-exp");
    ++count_;
    if (term == -std::numeric_limits<double>::infinity()) return;  // zero mass
    if (term <= max_) {
      kahan_add(std::exp(term - max_));
      return;
    }
    if (max_ == -std::numeric_limits<double>::infinity()) {
      max_ = term;
      sum_ = 1.0;
      comp_ = 0.0;
      return;
    }
    // New running maximum: rescale the compensated pair, then add the unit term.
    double rescale = std::exp(max_ - term);
    sum_ *= rescale;
    comp_ *= rescale;
    max_ = term;
    kahan_add(1.0);
  }

  bool empty() const { return count_ == 0; }

  double result() const {
    if (count_ == 0) throw std::invalid_argument("log-sum-exp of empty input");
    if (max_ == -std::numeric_limits<double>::infinity()) return max_;
    return max_ + std::log(sum_ - comp_);
  }

 private:
  void kahan_add(double x) {
    double y = x - comp_;
    double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }

  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  double comp_ = 0.0;
  std::size_t count_ = 0;
};

// log sum_i exp(terms[i]), summed in index order with max-subtraction.
double log_sum_exp(std::span<const double> terms);

// log sum_i exp(values[i] + log_weights[i]).
double log_sum_exp_weighted(std::span<const double> values, std::span<const double> log_weights);

}  // namespace entrobridge
