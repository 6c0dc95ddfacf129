#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "entrobridge/oracle.hpp"
#include "entrobridge/sinkhorn.hpp"

namespace entrobridge {

// A problem file, optionally carrying candidate potentials and a validation
// tolerance (the `validate` bundle format). Reports embed the same layout
// under a "problem" key, so a solve report is itself a valid bundle.
struct ParsedProblem {
  std::vector<DiscreteMeasure> measures;
  CostTensor cost;
  double epsilon = 1.0;
  std::vector<DiscreteMeasure> references;
  std::optional<std::vector<Potential>> potentials;
  std::optional<double> tolerance;
};

ParsedProblem parse_problem_json(const nlohmann::json& j);
ParsedProblem load_problem_file(const std::string& path);

nlohmann::json problem_to_json(const Problem& problem);

// Report: solver outcome plus an embedded copy of the problem. The coupling is
// dropped when it has more than 100000 entries unless full_coupling is set.
nlohmann::json report_to_json(const SolveReport& report, const Problem& problem,
                              bool full_coupling);

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace);
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

}  // namespace entrobridge
