#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "entrobridge/sinkhorn.hpp"
#include "helpers.hpp"

using namespace entrobridge;
using ebt::constant_cost;
using ebt::matrix_cost;
using ebt::random_cost;
using ebt::random_measure;
using ebt::uniform_measure;

namespace {

void check_trace_invariants(const SolveReport& report, const Problem& p) {
  // dual nondecreasing across records
  for (std::size_t k = 1; k < report.trace.size(); ++k)
    CHECK(report.trace[k].dual >= report.trace[k - 1].dual - 1e-12);
  // recorded gauge constants multiply to 1
  for (const auto& rec : report.trace) {
    double prod = 1.0;
    for (double l : rec.gauge_constants) prod *= l;
    CHECK(prod == doctest::Approx(1.0).epsilon(1e-12));
  }
  // gap consistency within each record
  for (const auto& rec : report.trace)
    CHECK(rec.gap == doctest::Approx(rec.primal - (rec.dual + p.epsilon())).epsilon(1e-12));
}

}  // namespace

TEST_CASE("zero cost converges in one sweep to zero potentials") {
  std::mt19937 rng(41);
  std::vector<DiscreteMeasure> ms{random_measure(rng, 3), random_measure(rng, 5)};
  Problem p = build_problem(ms, constant_cost({3, 5}, 0.0), ebt::tight_config(0.7));
  SolveReport r = sinkhorn_2m(p);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  for (const auto& u : r.potentials)
    for (double x : u.values) CHECK(std::abs(x) <= 1e-13);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(r.coupling[i * 5 + j] ==
            doctest::Approx(ms[0].weight(i) * ms[1].weight(j)).epsilon(1e-13));
  check_trace_invariants(r, p);
}

TEST_CASE("single-atom marginals force the point coupling") {
  Problem p = build_problem({uniform_measure(1), uniform_measure(1)},
                            matrix_cost(1, 1, {0.7}), ebt::tight_config(2.0));
  SolveReport r = sinkhorn_2m(p);
  CHECK(r.converged);
  CHECK(r.coupling[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.optimality.primal_value == doctest::Approx(0.7).epsilon(1e-13));
  // gauge-fixed potentials still sum to the cost at the lone pair
  CHECK(r.potentials[0][0] + r.potentials[1][0] == doctest::Approx(0.7).epsilon(1e-13));
}

TEST_CASE("symmetric 2x2 closed form") {
  Problem p = ebt::symmetric_2x2();
  SolveReport r = sinkhorn_2m(p);
  CHECK(r.converged);
  CHECK(r.coupling[0] == doctest::Approx(ebt::sym22_gamma11()).epsilon(1e-10));
  CHECK(r.optimality.primal_value == doctest::Approx(ebt::sym22_value()).epsilon(1e-10));
  CHECK(std::abs(r.optimality.gap) <= 1e-10);
  CHECK(r.optimality.schrodinger_residual_linf <= 1e-10);

  // transport + entropy split of the optimal value
  double transport = 0.0;
  for (std::size_t e = 0; e < 4; ++e) transport += p.cost()[e] * r.coupling[e];
  double g11 = ebt::sym22_gamma11();
  CHECK(transport == doctest::Approx(1.0 - 2.0 * g11).epsilon(1e-9));
  CHECK(r.optimality.primal_value - transport ==
        doctest::Approx(ebt::sym22_value() - (1.0 - 2.0 * g11)).epsilon(1e-9));
  check_trace_invariants(r, p);
}

TEST_CASE("gauge keeps two-marginal potentials within 1.5 sup-norm of the cost") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> sz(2, 8);
    std::size_t n = sz(rng), m = sz(rng);
    std::vector<DiscreteMeasure> ms{random_measure(rng, n), random_measure(rng, m)};
    std::uniform_real_distribution<double> epsd(0.2, 2.0);
    SolverConfig cfg = ebt::tight_config(epsd(rng), 1e-10);
    cfg.max_iter = 20000;
    Problem p = build_problem(ms, random_cost(rng, {n, m}, -1.0, 1.0), cfg);
    SolveReport r = sinkhorn_2m(p);
    CHECK(r.converged);
    double bound = 1.5 * p.cost().sup_norm() + 1e-9;
    for (const auto& u : r.potentials)
      for (double x : u.values) CHECK(std::abs(x) <= bound);
    check_trace_invariants(r, p);
  }
}

TEST_CASE("max_iter exhaustion returns a flagged report") {
  std::mt19937 rng(43);
  std::vector<DiscreteMeasure> ms{random_measure(rng, 6), random_measure(rng, 6)};
  SolverConfig cfg = ebt::tight_config(0.05);
  cfg.max_iter = 1;
  Problem p = build_problem(ms, random_cost(rng, {6, 6}), cfg);
  SolveReport r = sinkhorn_2m(p);
  CHECK(!r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.trace.size() == 2);  // initial record plus the single sweep
  CHECK(r.trace.back().iter == 1);
}

TEST_CASE("N=3 single atoms converge in one sweep") {
  std::vector<DiscreteMeasure> ms{uniform_measure(1), uniform_measure(1), uniform_measure(1)};
  DenseTensor c({1, 1, 1});
  c[0] = 1.9;
  Problem p = build_problem(ms, CostTensor(std::move(c)), ebt::tight_config(0.4));
  SolveReport r = sinkhorn_mm(p);
  CHECK(r.converged);
  // the fixed point is reached after one sweep; the stagnation criterion needs
  // one more confirming sweep
  CHECK(r.iterations <= 2);
  CHECK(r.trace[1].marginal_residual_l1 == 0.0);
  CHECK(r.optimality.primal_value == doctest::Approx(1.9).epsilon(1e-13));
}

TEST_CASE("N=3 zero cost gives the product coupling and zero centered potentials") {
  std::mt19937 rng(44);
  std::vector<DiscreteMeasure> ms{random_measure(rng, 2), random_measure(rng, 3),
                                  random_measure(rng, 2)};
  Problem p = build_problem(ms, constant_cost({2, 3, 2}, 0.0), ebt::tight_config(0.9));
  SolveReport r = sinkhorn_mm(p);
  CHECK(r.converged);
  CHECK(r.optimality.dual_value == doctest::Approx(-0.9).epsilon(1e-12));
  std::vector<std::size_t> idx(3, 0);
  for (std::size_t e = 0; e < r.coupling.mass().size(); ++e) {
    r.coupling.mass().unflatten(e, idx);
    double want = ms[0].weight(idx[0]) * ms[1].weight(idx[1]) * ms[2].weight(idx[2]);
    CHECK(r.coupling[e] == doctest::Approx(want).epsilon(1e-12));
  }
  // the projection gauge zeroes the first N-1 potentials here
  for (std::size_t i = 0; i + 1 < 3; ++i)
    for (double x : r.potentials[i].values) CHECK(std::abs(x) <= 1e-12);
  check_trace_invariants(r, p);
}

TEST_CASE("N=3 pairwise squared cost matches the descent oracle") {
  // three marginals on a line, half the squared distance summed over pairs
  std::vector<DiscreteMeasure> ms{ebt::grid_measure(3, 0.0, 1.0),
                                  ebt::grid_measure(3, 0.25, 1.0),
                                  ebt::grid_measure(3, -0.5, 1.0)};
  DenseTensor c({3, 3, 3});
  std::vector<std::size_t> idx(3, 0);
  for (std::size_t e = 0; e < c.size(); ++e) {
    c.unflatten(e, idx);
    double x0 = ms[0].atom(idx[0]).coords[0];
    double x1 = ms[1].atom(idx[1]).coords[0];
    double x2 = ms[2].atom(idx[2]).coords[0];
    c[e] = 0.5 * ((x0 - x1) * (x0 - x1) + (x0 - x2) * (x0 - x2) + (x1 - x2) * (x1 - x2));
  }
  SolverConfig cfg = ebt::tight_config(0.5, 1e-10);
  cfg.max_iter = 5000;
  Problem p = build_problem(ms, CostTensor(std::move(c)), cfg);
  SolveReport r = sinkhorn_mm(p);
  CHECK(r.converged);
  CHECK(r.iterations <= 5000);
  for (double res : r.optimality.marginal_residual_l1) CHECK(res <= 1e-9);
  double bound = 3.0 * p.cost().sup_norm() + 1e-9;
  for (const auto& u : r.potentials)
    for (double x : u.values) CHECK(std::abs(x) <= bound);
  check_trace_invariants(r, p);

  OracleSolution oracle = entropic_coordinate_descent(p);
  for (std::size_t e = 0; e < r.coupling.mass().size(); ++e)
    CHECK(std::abs(r.coupling[e] - oracle.argmin[e]) <= 1e-6);
  CHECK(std::abs(r.optimality.primal_value - oracle.value) <= 1e-7);
}

TEST_CASE("sinkhorn_mm at N=2 matches sinkhorn_2m record for record") {
  std::mt19937 rng(45);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<DiscreteMeasure> ms{random_measure(rng, 4), random_measure(rng, 5)};
    Problem p = build_problem(ms, random_cost(rng, {4, 5}), ebt::tight_config(0.3));
    SolveReport a = sinkhorn_2m(p);
    SolveReport b = sinkhorn_mm(p);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
      CHECK(a.trace[k].dual == b.trace[k].dual);
      CHECK(a.trace[k].primal == b.trace[k].primal);
      CHECK(a.trace[k].marginal_residual_l1 == b.trace[k].marginal_residual_l1);
    }
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t x = 0; x < a.potentials[i].size(); ++x)
        CHECK(a.potentials[i][x] == b.potentials[i][x]);
  }
}

TEST_CASE("stagnant sweeps imply complementarity") {
  std::mt19937 rng(46);
  std::vector<DiscreteMeasure> ms{random_measure(rng, 5), random_measure(rng, 4)};
  SolverConfig cfg = ebt::tight_config(1.0, 1e-13);
  cfg.tol_dual_increment = 1e-15;
  cfg.max_iter = 50000;
  Problem p = build_problem(ms, random_cost(rng, {5, 4}), cfg);
  SolveReport r = sinkhorn_2m(p);
  CHECK(r.converged);
  CHECK(r.optimality.within(1e-10));
}

TEST_CASE("scaling accessor is the exponential of the potential") {
  Problem p = ebt::symmetric_2x2();
  SolveReport r = sinkhorn_2m(p);
  auto a = r.scaling(0);
  for (std::size_t x = 0; x < 2; ++x)
    CHECK(a[x] == std::exp(r.potentials[0][x] / p.epsilon()));
}

TEST_CASE("trace thinning still records the final sweep") {
  std::mt19937 rng(47);
  std::vector<DiscreteMeasure> ms{random_measure(rng, 6), random_measure(rng, 6)};
  SolverConfig cfg = ebt::tight_config(0.15, 1e-10);
  cfg.record_trace_every = 50;
  cfg.max_iter = 50000;
  Problem p = build_problem(ms, random_cost(rng, {6, 6}), cfg);
  SolveReport r = sinkhorn_2m(p);
  CHECK(r.converged);
  CHECK(r.trace.back().iter == r.iterations);
  CHECK(r.trace.size() < r.iterations + 1);
}

TEST_CASE("gauge none leaves the iterates raw but still converges") {
  std::mt19937 rng(48);
  std::vector<DiscreteMeasure> ms{random_measure(rng, 3), random_measure(rng, 3)};
  SolverConfig cfg = ebt::tight_config(0.6);
  cfg.gauge = Gauge::none;
  Problem p = build_problem(ms, random_cost(rng, {3, 3}), cfg);
  SolveReport r = sinkhorn_2m(p);
  CHECK(r.converged);
  for (const auto& rec : r.trace)
    for (double l : rec.gauge_constants) CHECK(l == 1.0);
}

TEST_CASE("pair_recenter gauge rejects N=3") {
  std::vector<DiscreteMeasure> ms{uniform_measure(2), uniform_measure(2), uniform_measure(2)};
  SolverConfig cfg = ebt::tight_config(1.0);
  cfg.gauge = Gauge::pair_recenter;
  Problem p = build_problem(ms, constant_cost({2, 2, 2}, 0.0), cfg);
  CHECK_THROWS_AS(sinkhorn_mm(p), ProblemError);
}
