#include <doctest.h>

#include "jcc/rounding.hpp"
#include "support.hpp"

using namespace jcc;
using namespace jcc::testing;

TEST_CASE("binary input is returned unchanged") {
  const TreeNetwork net = reference_tree(2);
  GlobalParams g = reference_globals();
  const CompressionPlan d = CompressionPlan::uniform(net, 1.0);
  const std::vector<int> pos = {0, 1, -1, 2};
  const CachePlan in = CachePlan::at_positions(net, pos);
  RoundingLog log;
  const CachePlan out = pipage_round(net, g, d, in, &log);
  CHECK(out.b == in.b);
  CHECK(log.steps == 0);
}

TEST_CASE("half and half on a chain picks the sink") {
  const TreeNetwork net = chain();
  const CompressionPlan d = CompressionPlan::uniform(net, 1.0);
  CachePlan in = CachePlan::empty(net, CacheMode::Relaxed);
  in.b << 0.5, 0.5;
  const CachePlan out = pipage_round(net, reference_globals(), d, in);
  CHECK(out.b == Eigen::Vector2d(1, 0));
  CHECK(gain(net, d, out) >= gain(net, d, in));
}

TEST_CASE("a fractional pair lands on the better endpoint") {
  TopologySpec spec;
  NodeParams inner = reference_leaf();
  inner.data_volume = 0;
  inner.request_count = 0;
  spec.nodes = {{0, std::nullopt, inner}, {1, 0, inner}, {2, 1, reference_leaf()}};
  spec.edge_latencies = {{0, 1, 0.6}, {1, 2, 0.6}};
  const TreeNetwork net = build_tree(spec);
  const CompressionPlan d = CompressionPlan::uniform(net, 1.0);
  CachePlan in = CachePlan::empty(net, CacheMode::Relaxed);
  in.b << 0.0, 0.5, 0.5;
  const CachePlan out = pipage_round(net, reference_globals(), d, in);
  const double g1 = gain(net, d, CachePlan::at_positions(net, std::vector<int>{1}));
  const double g2 = gain(net, d, CachePlan::at_positions(net, std::vector<int>{2}));
  CHECK(out.position(net, 0) == (g2 > g1 ? 2 : 1));
  CHECK(gain(net, d, out) >= gain(net, d, in));
}

TEST_CASE("random feasible relaxed plans round to better binary plans") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 200; ++t) {
    const Instance inst = random_small_instance(rng(), 9, 3, 1e12);
    auto [d, b] = random_feasible_relaxed(inst, rng);
    const CachePlan out = pipage_round(inst.net, inst.globals, d, b);
    CHECK_NOTHROW(validate(inst.net, out));
    GlobalParams unlimited = inst.globals;
    unlimited.energy_budget = HUGE_VAL;
    CHECK(check_feasibility(inst.net, unlimited, d, out).feasible);
  }
}

TEST_CASE("input outside the cache constraints is rejected") {
  NodeParams leaf = reference_leaf();
  leaf.cache_capacity = 10;
  const TreeNetwork net = chain(leaf);
  CachePlan in = CachePlan::empty(net, CacheMode::Relaxed);
  in.b << 0.5, 0.5;
  try {
    pipage_round(net, reference_globals(), CompressionPlan::uniform(net, 1.0), in);
    FAIL("expected InfeasibleInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleInput);
  }
}

TEST_CASE("epsilon profiles") {
  SUBCASE("flat behind a sink copy") {
    const TreeNetwork net = reference_tree(2);
    CachePlan c = CachePlan::empty(net, CacheMode::Relaxed);
    c.leaf(net, 0) << 1.0, 0.3, 0.3;  // the sink copy already covers every hop
    const GainProfile q = epsilon_gain_profile(net, CompressionPlan::uniform(net, 0.5), c, 0, 1, 2, -0.3, 0.3, 7);
    for (double v : q.gain) CHECK(v == doctest::Approx(q.gain.front()));
  }
  SUBCASE("convex with the maximum at an endpoint") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 100; ++t) {
      const Instance inst = random_small_instance(rng(), 9, 3, 1e12);
      const CompressionPlan d = random_delta(inst.net, rng);
      const CachePlan b = random_relaxed(inst.net, rng);
      LeafIndex k = 0;
      while (k < inst.net.num_leaves() && inst.net.height(k) < 1) ++k;
      if (k == inst.net.num_leaves()) continue;
      const auto seg = b.leaf(inst.net, k);
      const int h = inst.net.height(k);
      const GainProfile p = epsilon_gain_profile(inst.net, d, b, k, 0, h, -std::min(seg[h], 1.0 - seg[0]),
                                                 std::min(seg[0], 1.0 - seg[h]), 11);
      const double tol = 1e-9 * latency_upper_bound(inst.net);
      for (std::size_t m = 1; m + 1 < p.gain.size(); ++m) {
        CHECK(p.gain[m] <= 0.5 * (p.gain[m - 1] + p.gain[m + 1]) + tol);
      }
      const double top = *std::max_element(p.gain.begin(), p.gain.end());
      CHECK(std::max(p.gain.front(), p.gain.back()) >= top - tol);
    }
  }
  SUBCASE("range outside the box") {
    const TreeNetwork net = chain();
    CachePlan b = CachePlan::empty(net, CacheMode::Relaxed);
    b.b << 0.2, 0.2;
    try {
      epsilon_gain_profile(net, CompressionPlan::uniform(net, 1.0), b, 0, 0, 1, -0.5, 0.1, 5);
      FAIL("expected RangeExceedsBox");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RangeExceedsBox);
    }
  }
}

TEST_CASE("full pipeline on reference trees") {
  const GlobalParams g = reference_globals();
  const TreeNetwork bt7 = reference_tree(2);
  const PipelineResult r7 = round_full_pipeline(bt7, g);
  CHECK(r7.solution.feasibility.feasible);
  CHECK(r7.solution.costs.gain >= 479000);
  CHECK_NOTHROW(validate(bt7, r7.solution.cache));
  CHECK(r7.relaxed_gain <= r7.relaxed_gain_approx * (1 + 1e-12));

  const TreeNetwork bt31 = reference_tree(4);
  CHECK(round_full_pipeline(bt31, g).solution.costs.gain >= 3830000);
}
