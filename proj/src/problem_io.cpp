#include "entrobridge/problem_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace entrobridge {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ProblemError("problem file: field '" + field + "': " + what);
}

double get_real(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

std::vector<double> get_real_list(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k)
    out.push_back(get_real(j[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

DiscreteMeasure parse_measure(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("atoms") || !j.contains("weights"))
    fail(field, "expected an object with 'atoms' and 'weights'");
  const json& ja = j["atoms"];
  if (!ja.is_array() || ja.empty()) fail(field + ".atoms", "expected a non-empty array");
  std::vector<Atom> atoms;
  atoms.reserve(ja.size());
  for (std::size_t k = 0; k < ja.size(); ++k) {
    const json& a = ja[k];
    std::string af = field + ".atoms[" + std::to_string(k) + "]";
    if (!a.is_object() || !a.contains("id") || !a["id"].is_number_integer())
      fail(af, "expected an object with integer 'id'");
    Atom atom;
    atom.id = a["id"].get<int>();
    if (a.contains("coords")) atom.coords = get_real_list(a["coords"], af + ".coords");
    atoms.push_back(std::move(atom));
  }
  std::vector<double> weights = get_real_list(j["weights"], field + ".weights");
  // zero-weight atoms are stripped (with a warning) on the file path
  for (std::size_t k = 0; k < weights.size(); ++k)
    if (weights[k] == 0.0)
      std::fprintf(stderr, "warning: %s: dropping zero-weight atom id %d\n", field.c_str(),
                   atoms[k].id);
  return DiscreteMeasure(std::move(atoms), std::move(weights),
                         DiscreteMeasure::ZeroWeightPolicy::strip);
}

void read_nested_matrix(const json& j, const std::vector<std::size_t>& shape, std::size_t axis,
                        std::vector<double>& out, const std::string& field) {
  if (axis == shape.size()) {
    out.push_back(get_real(j, field));
    return;
  }
  if (!j.is_array() || j.size() != shape[axis])
    fail(field, "expected an array of length " + std::to_string(shape[axis]));
  for (std::size_t k = 0; k < j.size(); ++k)
    read_nested_matrix(j[k], shape, axis + 1, out, field + "[" + std::to_string(k) + "]");
}

const std::vector<double>& coords_of(const DiscreteMeasure& rho, std::size_t x,
                                     std::size_t marginal) {
  const std::vector<double>& c = rho.atom(x).coords;
  if (c.empty())
    fail("cost.generator", "atom id " + std::to_string(rho.atom(x).id) + " of measure " +
                               std::to_string(marginal) + " has no coords");
  return c;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail("cost.generator", "atoms have mismatched coord dimensions");
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

CostTensor generate_cost(const std::string& name, double scale,
                         const std::vector<DiscreteMeasure>& measures) {
  std::vector<std::size_t> shape;
  for (const auto& rho : measures) shape.push_back(rho.size());
  DenseTensor values(shape);
  std::size_t n = measures.size();
  std::vector<std::size_t> idx(n, 0);

  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    values.unflatten(flat, idx);
    double c = 0.0;
    if (name == "sqeuclidean" || name == "euclidean") {
      if (n != 2) fail("cost.generator", "'" + name + "' requires exactly 2 marginals");
      c = sq_dist(coords_of(measures[0], idx[0], 0), coords_of(measures[1], idx[1], 1));
      if (name == "euclidean") c = std::sqrt(c);
    } else if (name == "pairwise_sqeuclidean_sum") {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          c += 0.5 * sq_dist(coords_of(measures[i], idx[i], i), coords_of(measures[j], idx[j], j));
    } else {
      fail("cost.generator", "unknown generator '" + name + "'");
    }
    values[flat] = scale * c;
  }
  return CostTensor(std::move(values));
}

std::vector<Potential> parse_potentials(const json& j,
                                        const std::vector<DiscreteMeasure>& measures) {
  if (!j.is_array() || j.size() != measures.size())
    fail("potentials", "expected one array per marginal");
  std::vector<Potential> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::vector<double> values = get_real_list(j[i], "potentials[" + std::to_string(i) + "]");
    if (values.size() != measures[i].size())
      fail("potentials[" + std::to_string(i) + "]",
           "length does not match measure size " + std::to_string(measures[i].size()));
    out.emplace_back(i, std::move(values));
  }
  return out;
}

json measure_to_json(const DiscreteMeasure& rho) {
  json atoms = json::array();
  json weights = json::array();
  for (std::size_t x = 0; x < rho.size(); ++x) {
    json a;
    a["id"] = rho.atom(x).id;
    if (!rho.atom(x).coords.empty()) a["coords"] = rho.atom(x).coords;
    atoms.push_back(std::move(a));
    weights.push_back(rho.weight(x));
  }
  return json{{"atoms", std::move(atoms)}, {"weights", std::move(weights)}};
}

json cost_to_nested(const DenseTensor& values, std::size_t axis, std::size_t offset) {
  json out = json::array();
  std::size_t stride = values.strides()[axis];
  for (std::size_t k = 0; k < values.shape()[axis]; ++k) {
    std::size_t at = offset + k * stride;
    if (axis + 1 == values.rank())
      out.push_back(values[at]);
    else
      out.push_back(cost_to_nested(values, axis + 1, at));
  }
  return out;
}

void put_row(std::ostream& out, std::initializer_list<double> reals) {
  char buf[32];
  bool first = false;
  (void)first;
  std::size_t k = 0;
  for (double v : reals) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << (k++ ? "," : "") << buf;
  }
}

}  // namespace

ParsedProblem parse_problem_json(const json& root) {
  const json& j = root.contains("problem") ? root["problem"] : root;
  if (!j.is_object()) fail("problem", "expected an object");
  if (!j.contains("version") || !j["version"].is_number_integer())
    fail("version", "missing or non-integer");
  if (j["version"].get<int>() != 1) fail("version", "unsupported version");

  if (!j.contains("measures") || !j["measures"].is_array() || j["measures"].size() < 2)
    fail("measures", "expected an array of at least 2 measures");
  std::vector<DiscreteMeasure> measures;
  for (std::size_t i = 0; i < j["measures"].size(); ++i)
    measures.push_back(parse_measure(j["measures"][i], "measures[" + std::to_string(i) + "]"));

  if (!j.contains("epsilon")) fail("epsilon", "missing");
  double epsilon = get_real(j["epsilon"], "epsilon");

  if (!j.contains("cost") || !j["cost"].is_object())
    fail("cost", "expected an object with 'matrix' or 'generator'");
  const json& jc = j["cost"];
  std::vector<std::size_t> shape;
  for (const auto& rho : measures) shape.push_back(rho.size());

  std::optional<CostTensor> cost;
  if (jc.contains("matrix")) {
    std::vector<double> flat;
    read_nested_matrix(jc["matrix"], shape, 0, flat, "cost.matrix");
    DenseTensor t(shape);
    t.data() = std::move(flat);
    cost.emplace(std::move(t));
  } else if (jc.contains("generator")) {
    if (!jc["generator"].is_string()) fail("cost.generator", "expected a string");
    double scale = jc.contains("scale") ? get_real(jc["scale"], "cost.scale") : 1.0;
    cost.emplace(generate_cost(jc["generator"].get<std::string>(), scale, measures));
  } else {
    fail("cost", "needs either 'matrix' or 'generator'");
  }

  std::vector<DiscreteMeasure> references;
  if (j.contains("references")) {
    const json& jr = j["references"];
    if (!jr.is_array() || jr.size() != measures.size())
      fail("references", "expected one measure per marginal");
    for (std::size_t i = 0; i < jr.size(); ++i)
      references.push_back(parse_measure(jr[i], "references[" + std::to_string(i) + "]"));
  }

  ParsedProblem out{std::move(measures), std::move(*cost), epsilon, std::move(references),
                    std::nullopt, std::nullopt};
  // bundle extras may sit next to the problem or at the top level
  const json& extras = root.contains("problem") ? root : j;
  if (extras.contains("potentials"))
    out.potentials = parse_potentials(extras["potentials"], out.measures);
  if (extras.contains("tolerance"))
    out.tolerance = get_real(extras["tolerance"], "tolerance");
  return out;
}

ParsedProblem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemError("cannot open problem file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ProblemError("problem file is not valid JSON: " + std::string(e.what()));
  }
  return parse_problem_json(j);
}

json problem_to_json(const Problem& problem) {
  json j;
  j["version"] = 1;
  j["epsilon"] = problem.epsilon();
  json measures = json::array();
  for (const auto& rho : problem.measures()) measures.push_back(measure_to_json(rho));
  j["measures"] = std::move(measures);
  j["cost"] = json{{"matrix", cost_to_nested(problem.cost().values(), 0, 0)}};
  if (problem.has_references()) {
    json refs = json::array();
    for (const auto& m : problem.references()) refs.push_back(measure_to_json(m));
    j["references"] = std::move(refs);
  }
  return j;
}

json report_to_json(const SolveReport& report, const Problem& problem, bool full_coupling) {
  json j;
  j["version"] = 1;
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["epsilon"] = report.epsilon;
  j["dual"] = report.optimality.dual_value;
  j["primal"] = report.optimality.primal_value;
  j["gap"] = report.optimality.gap;
  j["schrodinger_residual_linf"] = report.optimality.schrodinger_residual_linf;
  j["fixed_point_residual_linf"] = report.optimality.fixed_point_residual_linf;
  j["marginal_residual_l1"] = report.optimality.marginal_residual_l1;

  json pots = json::array();
  for (const auto& u : report.potentials) pots.push_back(u.values);
  j["potentials"] = std::move(pots);
  j["tolerance"] = problem.config().tol_marginal;

  if (full_coupling || report.coupling.mass().size() <= 100000) {
    j["coupling"] = json{{"shape", report.coupling.shape()},
                         {"mass", report.coupling.mass().data()}};
  }
  j["problem"] = problem_to_json(problem);
  return j;
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
  out << "iter,dual,primal,gap,marginal_residual_l1,wall_ms\n";
  for (const auto& rec : trace) {
    out << rec.iter << ',';
    put_row(out, {rec.dual, rec.primal, rec.gap, rec.marginal_residual_l1, rec.wall_ms});
    out << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "epsilon,entropic_value,exact_value,gap,iters,converged\n";
  for (std::size_t k = 0; k < sweep.epsilons.size(); ++k) {
    put_row(out, {sweep.epsilons[k], sweep.entropic_values[k], sweep.exact_value,
                  sweep.gaps[k]});
    out << ',' << sweep.iterations[k] << ',' << (sweep.converged[k] ? 1 : 0) << '\n';
  }
}

}  // namespace entrobridge
