#include <doctest.h>

#include "jcc/greedy.hpp"
#include "jcc/oracle.hpp"
#include "support.hpp"

using namespace jcc;
using namespace jcc::testing;

TEST_CASE("delta grid is log spaced from delta_min to 1") {
  const auto g = delta_grid(4);
  REQUIRE(g.size() == 4);
  CHECK(g.front() == doctest::Approx(kDeltaMin));
  CHECK(g.back() == 1.0);
  CHECK(g[1] == doctest::Approx(1e-2));
  CHECK(g[2] == doctest::Approx(1e-1));
  CHECK_THROWS_AS(delta_grid(1), Error);
}

TEST_CASE("cache plan counts") {
  CHECK(count_cache_plans(chain()) == 3);
  CHECK(enumerate_cache_plans(chain()).size() == 3);
  CHECK(count_cache_plans(reference_tree(2)) == 256);
  CHECK(enumerate_cache_plans(star(2)).size() == 9);

  // every plan distinct and binary with at most one copy per leaf
  const TreeNetwork net = reference_tree(2);
  const auto plans = enumerate_cache_plans(net);
  for (std::size_t a = 0; a < plans.size(); ++a) {
    CHECK_NOTHROW(validate(net, plans[a]));
    if (a > 0) CHECK(plans[a].b != plans[a - 1].b);
  }
  try {
    enumerate_cache_plans(reference_tree(4), 1000);
    FAIL("expected InstanceTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InstanceTooLarge);
  }
}

TEST_CASE("sink caching with unlimited budget zeroes latency at any rate") {
  const TreeNetwork net = reference_tree(2);
  GlobalParams g = reference_globals();
  g.energy_budget = HUGE_VAL;
  const std::vector<int> at_sink(4, 0);
  const CompressionResult r = optimize_compression_given_cache(net, g, CachePlan::at_positions(net, at_sink));
  CHECK(r.gain == doctest::Approx(480000));
}

TEST_CASE("zero budget is infeasible") {
  const TreeNetwork net = chain();
  GlobalParams g = reference_globals();
  g.energy_budget = 0;
  try {
    optimize_compression_given_cache(net, g, CachePlan::empty(net));
    FAIL("expected Infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
  }
  CHECK_THROWS_AS(brute_force(net, g), Error);
}

TEST_CASE("grid refinement changes the chain gain by under 2 %") {
  TopologySpec spec = chain().to_spec();
  spec.nodes[1].params.cache_capacity = 0;  // nothing fits, rates carry the gain
  spec.nodes[0].params.cache_capacity = 0;
  const TreeNetwork net = build_tree(spec);
  GlobalParams g = reference_globals();
  g.energy_budget = 2.0 * total_energy(net, g, CompressionPlan::uniform(net, 1.0), CachePlan::empty(net)).e_total_ub;
  const CachePlan none = CachePlan::empty(net);
  const double coarse = optimize_compression_given_cache(net, g, none, 50).gain;
  const double fine = optimize_compression_given_cache(net, g, none, 500).gain;
  CHECK(coarse > 0);
  CHECK(near_rel(coarse, fine, 0.02));
}

TEST_CASE("oracle solutions are feasible and re-evaluate exactly") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = random_small_instance(seed, 7, 3, 400);
    const OracleResult r = brute_force(inst.net, inst.globals, 21);
    CHECK(r.best_solution.feasibility.feasible);
    CHECK(r.configurations_examined == static_cast<std::size_t>(count_cache_plans(inst.net)));
    CHECK(r.grid_resolution == 21);
    CHECK(r.best_solution.costs.gain ==
          gain(inst.net, r.best_solution.delta, r.best_solution.cache));
    CHECK(check_feasibility(inst.net, inst.globals, r.best_solution.delta, r.best_solution.cache).feasible);
  }
}

TEST_CASE("oracle dominates greedy on the single-leaf chain and reaches the bt7 bound") {
  const TreeNetwork net = chain();
  const GlobalParams g = reference_globals();
  const double oracle = brute_force(net, g).best_solution.costs.gain;
  const double greedy = greedy_solve(net, g).solution.costs.gain;
  CHECK(oracle >= greedy * (1 - 1e-12));
  CHECK(greedy >= 0);

  const OracleResult bt7 = brute_force(reference_tree(2), g, 11);
  CHECK(bt7.best_solution.costs.gain == doctest::Approx(480000).epsilon(1e-3));
}

TEST_CASE("oracle is deterministic") {
  const Instance inst = random_small_instance(77, 8, 3, 600);
  const OracleResult a = brute_force(inst.net, inst.globals, 15);
  const OracleResult b = brute_force(inst.net, inst.globals, 15);
  CHECK(a.best_solution.delta.delta == b.best_solution.delta.delta);
  CHECK(a.best_solution.cache.b == b.best_solution.cache.b);
}
