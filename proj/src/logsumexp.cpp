#include "entrobridge/logsumexp.hpp"

namespace entrobridge {

double log_sum_exp(std::span<const double> terms) {
  if (terms.empty()) throw std::invalid_argument("log-sum-exp of empty input");
  LogSumExpAccumulator acc;
  for (double t : terms) acc.add(t);
  return acc.result();
}

double log_sum_exp_weighted(std::span<const double> values,
                            std::span<const double> log_weights) {
  if (values.size() != log_weights.size())
    throw std::invalid_argument("log_sum_exp_weighted: length mismatch");
  if (values.empty()) throw std::invalid_argument("log-sum-exp of empty input");
  LogSumExpAccumulator acc;
  for (std::size_t i = 0; i < values.size(); ++i) acc.add(values[i] + log_weights[i]);
  return acc.result();
}

}  // namespace entrobridge
