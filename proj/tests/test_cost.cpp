#include <doctest.h>

#include <cmath>
#include <random>

#include "jcc/cost.hpp"
#include "support.hpp"

using namespace jcc;
using namespace jcc::testing;

namespace {

// Line 0 - 1 - ... - h with the reference parameters.
TreeNetwork line(int h, const NodeParams& leaf = reference_leaf()) {
  TopologySpec spec;
  NodeParams inner = leaf;
  inner.data_volume = 0;
  inner.request_count = 0;
  for (int v = 0; v <= h; ++v) {
    spec.nodes.push_back({v, v == 0 ? std::nullopt : std::optional<int>(v - 1), v == h ? leaf : inner});
  }
  spec.default_latency = kReferenceLatency;
  return build_tree(spec);
}

double f(const NodeParams& n, double d) { return n.eps_rx + n.eps_tx * d + n.eps_cp * (1.0 / d - 1.0); }

}  // namespace

TEST_CASE("per-bit cost") {
  const NodeParams n = reference_leaf();
  CHECK(per_bit_cost(n, 1.0) == doctest::Approx(2.5e-7).epsilon(1e-12));
  CHECK(per_bit_cost(n, 0.5) == doctest::Approx(2.3e-7).epsilon(1e-12));
  NodeParams free_compression = n;
  free_compression.eps_cp = 0.0;
  CHECK(per_bit_cost(free_compression, kDeltaMin) == doctest::Approx(50e-9 + 200e-9 * kDeltaMin).epsilon(1e-12));
  CHECK_THROWS_AS(per_bit_cost(n, 0.0), Error);
  CHECK_THROWS_AS(per_bit_cost(n, 1.5), Error);
}

TEST_CASE("first request energy") {
  const NodeParams n = reference_leaf();
  SUBCASE("single-leaf chain") {
    const TreeNetwork net = chain();
    CompressionPlan d = CompressionPlan::uniform(net, 1.0);
    d.delta << 0.4, 0.7;
    const double expected = 100 * f(n, 0.4) * 0.7 + 100 * f(n, 0.7);
    CHECK(near_rel(first_request_energy(net, d, 0), expected, 1e-13));
  }
  SUBCASE("bt7 without compression") {
    const TreeNetwork net = reference_tree(2);
    const CompressionPlan d = CompressionPlan::uniform(net, 1.0);
    for (LeafIndex k = 0; k < 4; ++k) CHECK(near_rel(first_request_energy(net, d, k), 7.5e-5, 1e-13));
  }
  SUBCASE("linear in the data volume") {
    NodeParams small = n;
    small.data_volume = 1e-6;
    const TreeNetwork a = chain(n);
    const TreeNetwork b = chain(small);
    const CompressionPlan d = CompressionPlan::uniform(a, 0.3);
    CHECK(near_rel(first_request_energy(b, d, 0), first_request_energy(a, d, 0) * 1e-8, 1e-12));
  }
  CHECK_THROWS_AS(first_request_energy(chain(), CompressionPlan::uniform(chain(), 1.0), 3), Error);
}

TEST_CASE("repeat request energy, worked chain cases") {
  const NodeParams n = reference_leaf();
  const GlobalParams g = reference_globals();
  const TreeNetwork net = chain();
  CompressionPlan d = CompressionPlan::uniform(net, 1.0);
  d.delta << 0.4, 0.7;
  const double y = 100, r = 1000;
  const double serve = g.w_ca * g.period / (r - 1) + n.eps_tx;

  SUBCASE("cached at the sink") {
    const CachePlan b = CachePlan::at_positions(net, std::vector<int>{0});
    CHECK(near_rel(repeat_request_energy(net, g, d, b, 0), y * (r - 1) * 0.4 * 0.7 * serve, 1e-13));
  }
  SUBCASE("cached at the leaf") {
    const CachePlan b = CachePlan::at_positions(net, std::vector<int>{1});
    const double expected = y * (r - 1) * f(n, 0.4) * 0.7 + y * (r - 1) * 0.7 * serve;
    CHECK(near_rel(repeat_request_energy(net, g, d, b, 0), expected, 1e-13));
  }
  SUBCASE("no cached copy") {
    const CachePlan b = CachePlan::empty(net);
    const double expected = y * (r - 1) * (f(n, 0.4) * 0.7 + f(n, 0.7));
    CHECK(near_rel(repeat_request_energy(net, g, d, b, 0), expected, 1e-13));
  }
  SUBCASE("single request") {
    NodeParams once = n;
    once.request_count = 1;
    const TreeNetwork one = chain(once);
    CHECK(repeat_request_energy(one, g, d, CachePlan::at_positions(one, std::vector<int>{0}), 0) == 0.0);
  }
}

TEST_CASE("total energy and its upper bound") {
  const GlobalParams g = reference_globals();
  SUBCASE("uncompressed chain without caching") {
    const TreeNetwork net = chain();
    const EnergyTotals t = total_energy(net, g, CompressionPlan::uniform(net, 1.0), CachePlan::empty(net));
    CHECK(near_rel(t.e_total_ub, 100 * 1000 * (2.5e-7 + 2.5e-7), 1e-13));
    CHECK(near_rel(t.e_total, t.e_total_ub, 1e-13));
  }
  SUBCASE("bound holds on random plans, tight without caching") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
      const Instance inst = random_small_instance(rng(), 12, 4, 1e9);
      const CompressionPlan d = random_delta(inst.net, rng);
      const CachePlan b = trial % 2 ? random_relaxed(inst.net, rng) : random_binary(inst.net, rng);
      const EnergyTotals t = total_energy(inst.net, inst.globals, d, b);
      CHECK(t.e_total <= t.e_total_ub * (1 + 1e-13));
      const EnergyTotals none = total_energy(inst.net, inst.globals, d, CachePlan::empty(inst.net));
      CHECK(near_rel(none.e_total, none.e_total_ub, 1e-12));
    }
  }
}

TEST_CASE("latency, upper bound and gain") {
  const TreeNetwork bt7 = reference_tree(2);
  const CompressionPlan ones = CompressionPlan::uniform(bt7, 1.0);
  CHECK(latency_upper_bound(bt7) == doctest::Approx(480000).epsilon(1e-12));
  CHECK(latency_upper_bound(reference_tree(3)) == doctest::Approx(1440000).epsilon(1e-12));
  CHECK(latency(bt7, ones, CachePlan::empty(bt7)) == doctest::Approx(480000).epsilon(1e-12));
  CHECK(gain(bt7, ones, CachePlan::empty(bt7)) == doctest::Approx(0.0));

  const CachePlan at_sink = CachePlan::at_positions(bt7, std::vector<int>(4, 0));
  CHECK(latency(bt7, ones, at_sink) == 0.0);
  CHECK(gain(bt7, ones, at_sink) == doctest::Approx(480000).epsilon(1e-12));

  NodeParams unit = reference_leaf();
  unit.data_volume = 1;
  unit.request_count = 1;
  CHECK(latency_upper_bound(chain(unit, 1.0)) == doctest::Approx(1.0));

  // Hand-evaluated latency on a 3-hop line, one copy at position 1.
  const TreeNetwork l3 = line(3);
  CompressionPlan d = CompressionPlan::uniform(l3, 1.0);
  d.delta << 0.9, 0.5, 0.25, 0.2;
  const CachePlan b = CachePlan::at_positions(l3, std::vector<int>{1});
  const double c = 100 * 1000 * 0.6;
  const double expected = c * (0.5 * 0.25 * 0.2);  // only the sink hop still carries data
  CHECK(near_rel(latency(l3, d, b), expected, 1e-13));
  CHECK(near_rel(gain(l3, d, b), 3 * c - expected, 1e-13));
}

TEST_CASE("surrogate gain") {
  const TreeNetwork l2 = line(2);
  CompressionPlan d = CompressionPlan::uniform(l2, 1.0);
  d.delta << 0.8, 0.5, 0.4;
  CachePlan b = CachePlan::empty(l2, CacheMode::Relaxed);
  b.b << 0.3, 0.4, 0.0;
  const double c = 100 * 1000 * 0.6;
  const double l_tilde = c * (0.5 * 0.4) * (1 - 0.3) + c * 0.4 * (1 - 0.7);
  CHECK(near_rel(gain_approx(l2, d, b), 2 * c - l_tilde, 1e-13));
  const double l_exact = c * (0.5 * 0.4) * 0.7 + c * 0.4 * (0.7 * 0.6);
  CHECK(near_rel(gain(l2, d, b), 2 * c - l_exact, 1e-13));

  b.b << 0.6, 0.7, 0.0;  // prefix sums clamp at 1 from position 1 on
  CHECK(near_rel(gain_approx(l2, d, b), 2 * c - c * 0.2 * 0.4, 1e-13));
  b.b << 1.0, 0.0, 0.0;
  CHECK(near_rel(gain_approx(l2, d, b), 2 * c, 1e-13));
}

TEST_CASE("sandwich and integral agreement on random plans") {
  const double ratio = 1.0 - std::exp(-1.0);
  std::mt19937_64 rng(5);
  for (int inst_id = 0; inst_id < 5; ++inst_id) {
    const Instance inst = random_small_instance(rng(), 9, 3, 1e9);
    for (int trial = 0; trial < 1000; ++trial) {
      const CompressionPlan d = random_delta(inst.net, rng);
      const CachePlan b = random_relaxed(inst.net, rng);
      const double g = gain(inst.net, d, b);
      const double ga = gain_approx(inst.net, d, b);
      CHECK(g <= ga * (1 + 1e-12));
      CHECK(g >= ratio * ga * (1 - 1e-12));
      const CachePlan bin = random_binary(inst.net, rng);
      CHECK(near_rel(gain(inst.net, d, bin), gain_approx(inst.net, d, bin), 1e-12));
    }
  }
}

TEST_CASE("gain is nondecreasing in each leaf's request count") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Instance inst = random_small_instance(rng(), 9, 3, 1e9);
    const CompressionPlan d = random_delta(inst.net, rng);
    const CachePlan b = random_relaxed(inst.net, rng);
    TopologySpec spec = inst.net.to_spec();
    double previous = gain(inst.net, d, b);
    for (auto& node : spec.nodes) {
      if (node.params.request_count == 0) continue;
      node.params.request_count += 100;
      const double next = gain(build_tree(spec), d, b);
      CHECK(next >= previous * (1 - 1e-13));
      previous = next;
    }
  }
}

TEST_CASE("feasibility report") {
  const TreeNetwork bt7 = reference_tree(2);
  GlobalParams g = reference_globals();
  g.energy_budget = 1e12;
  const FeasibilityReport none = check_feasibility(bt7, g, CompressionPlan::uniform(bt7, 1.0), CachePlan::empty(bt7));
  CHECK(none.feasible);
  CHECK(none.cache_used.isZero());

  const CachePlan root = CachePlan::at_positions(bt7, std::vector<int>(4, 0));
  const FeasibilityReport compressed = check_feasibility(bt7, g, CompressionPlan::uniform(bt7, 0.1), root);
  CHECK(compressed.cache_used[0] == doctest::Approx(4 * 100 * 1e-3).epsilon(1e-12));
  CHECK(compressed.cache_ok[0]);
  CHECK(compressed.feasible);

  const FeasibilityReport raw = check_feasibility(bt7, g, CompressionPlan::uniform(bt7, 1.0), root);
  CHECK(raw.cache_used[0] == doctest::Approx(400));
  CHECK_FALSE(raw.cache_ok[0]);
  CHECK_FALSE(raw.feasible);
  CHECK(raw.max_violation == doctest::Approx((400.0 - 120.0) / 120.0));

  g.energy_budget = 0.0;
  const FeasibilityReport broke = check_feasibility(bt7, g, CompressionPlan::uniform(bt7, 1.0), CachePlan::empty(bt7));
  CHECK_FALSE(broke.energy_ok);
  CHECK_FALSE(broke.feasible);

  CachePlan twice = CachePlan::empty(bt7, CacheMode::Relaxed);
  twice.b[0] = 0.7;
  twice.b[1] = 0.7;
  g.energy_budget = 1e12;
  const FeasibilityReport copies = check_feasibility(bt7, g, CompressionPlan::uniform(bt7, 0.01), twice);
  CHECK_FALSE(copies.copy_ok[0]);
  CHECK(copies.copy_ok[1]);
}

TEST_CASE("cache gain with fixed compression is monotone submodular") {
  // Exhaustive over every subset of (leaf, position) pairs on trees with at
  // most 3 leaves and depth at most 2.
  std::mt19937_64 rng(21);
  int instances = 0;
  while (instances < 30) {
    const TopologySpec spec = random_topology(rng, std::uniform_int_distribution<int>(2, 7)(rng), 2);
    const TreeNetwork net = build_tree(spec);
    if (net.num_leaves() > 3) continue;
    ++instances;
    const CompressionPlan d = random_delta(net, rng);
    const int n = static_cast<int>(net.plan_size());
    std::vector<double> value(static_cast<std::size_t>(1) << n);
    for (std::size_t s = 0; s < value.size(); ++s) {
      CachePlan b = CachePlan::empty(net, CacheMode::Relaxed);
      for (int e = 0; e < n; ++e) b.b[e] = (s >> e) & 1u ? 1.0 : 0.0;
      value[s] = gain(net, d, b);
    }
    for (std::size_t x = 0; x < value.size(); ++x) {
      for (int e = 0; e < n; ++e) {
        const std::size_t bit = std::size_t{1} << e;
        if (x & bit) continue;
        const double gain_x = value[x | bit] - value[x];
        CHECK(gain_x >= -1e-9);
        // every superset y of x not containing e
        const std::size_t free = (value.size() - 1) & ~x & ~bit;
        for (std::size_t extra = free;; extra = (extra - 1) & free) {
          const std::size_t y = x | extra;
          CHECK(gain_x >= value[y | bit] - value[y] - 1e-9);
          if (extra == 0) break;
        }
      }
    }
  }
}
