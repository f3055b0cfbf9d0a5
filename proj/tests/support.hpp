#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "jcc/cost.hpp"
#include "jcc/model.hpp"

namespace jcc::testing {

// Reference parameters of the homogeneous benchmark trees, per node.
inline NodeParams reference_leaf() { return {50e-9, 200e-9, 80e-9, 120.0, 100.0, 1000}; }
inline GlobalParams reference_globals() { return {1.88e-6, 10.0, 200.0}; }
inline constexpr double kReferenceLatency = 0.6;

inline TreeNetwork reference_tree(int depth) { return uniform_binary_tree(depth, reference_leaf(), kReferenceLatency); }

/// Sink 0 with a single leaf 1.
inline TreeNetwork chain(const NodeParams& leaf = reference_leaf(), double latency = kReferenceLatency) {
  TopologySpec spec;
  NodeParams sink = leaf;
  sink.data_volume = 0;
  sink.request_count = 0;
  spec.nodes = {{0, std::nullopt, sink}, {1, 0, leaf}};
  spec.default_latency = latency;
  return build_tree(spec);
}

/// Sink with `leaves` direct children.
inline TreeNetwork star(int leaves, const NodeParams& leaf = reference_leaf(), double latency = kReferenceLatency) {
  TopologySpec spec;
  NodeParams sink = leaf;
  sink.data_volume = 0;
  sink.request_count = 0;
  spec.nodes.push_back({0, std::nullopt, sink});
  for (int i = 1; i <= leaves; ++i) spec.nodes.push_back({i, 0, leaf});
  spec.default_latency = latency;
  return build_tree(spec);
}

struct Instance {
  TreeNetwork net;
  GlobalParams globals;
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random tree over `nodes` nodes where node i hangs below a uniformly drawn
/// earlier node, with depth capped at `max_depth`.
inline TopologySpec random_topology(std::mt19937_64& rng, int nodes, int max_depth) {
  std::vector<int> parent(static_cast<std::size_t>(nodes), -1);
  std::vector<int> depth(static_cast<std::size_t>(nodes), 0);
  for (int v = 1; v < nodes; ++v) {
    int p;
    do {
      p = std::uniform_int_distribution<int>(0, v - 1)(rng);
    } while (depth[static_cast<std::size_t>(p)] >= max_depth);
    parent[static_cast<std::size_t>(v)] = p;
    depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(p)] + 1;
  }
  std::vector<bool> has_child(static_cast<std::size_t>(nodes), false);
  for (int v = 1; v < nodes; ++v) has_child[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])] = true;

  TopologySpec spec;
  for (int v = 0; v < nodes; ++v) {
    NodeSpec n;
    n.id = v;
    if (v > 0) n.parent = parent[static_cast<std::size_t>(v)];
    n.params.eps_rx = uniform(rng, 30e-9, 70e-9);
    n.params.eps_tx = uniform(rng, 100e-9, 300e-9);
    n.params.eps_cp = uniform(rng, 40e-9, 120e-9);
    if (!has_child[static_cast<std::size_t>(v)]) {
      n.params.data_volume = uniform(rng, 50.0, 150.0);
      n.params.request_count = std::uniform_int_distribution<int>(100, 1000)(rng);
    }
    spec.nodes.push_back(n);
  }
  for (int v = 1; v < nodes; ++v) spec.edge_latencies.push_back({parent[static_cast<std::size_t>(v)], v, uniform(rng, 0.3, 1.0)});
  return spec;
}

inline double cache_plan_count(const TreeNetwork& net) {
  double count = 1.0;
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) count *= net.height(k) + 2;
  return count;
}

/// Small random instance (3..max_nodes nodes) with caching contended by
/// both capacity and the energy budget. The budget is a random multiple of
/// the energy of the uncompressed, uncached plan.
inline Instance random_small_instance(std::uint64_t seed, int max_nodes = 9, int max_depth = 3,
                                      double max_plans = 1500.0) {
  std::mt19937_64 rng(seed);
  for (;;) {
    const int nodes = std::uniform_int_distribution<int>(3, max_nodes)(rng);
    TopologySpec spec = random_topology(rng, nodes, max_depth);
    double mean_volume = 0.0;
    int leaves = 0;
    for (const auto& n : spec.nodes) {
      if (n.params.data_volume > 0) {
        mean_volume += n.params.data_volume;
        ++leaves;
      }
    }
    mean_volume /= leaves;
    for (auto& n : spec.nodes) n.params.cache_capacity = uniform(rng, 0.1, 1.2) * mean_volume;
    TreeNetwork net = build_tree(spec);
    if (cache_plan_count(net) > max_plans) continue;
    GlobalParams g{1.88e-6, 10.0, 0.0};
    const double baseline =
        total_energy(net, g, CompressionPlan::uniform(net, 1.0), CachePlan::empty(net)).e_total_ub;
    g.energy_budget = baseline * uniform(rng, 1.02, 1.3);
    return {std::move(net), g};
  }
}

inline CompressionPlan random_delta(const TreeNetwork& net, std::mt19937_64& rng, double lo = std::log(kDeltaMin)) {
  CompressionPlan p = CompressionPlan::uniform(net, 1.0);
  for (Index e = 0; e < p.delta.size(); ++e) p.delta[e] = std::exp(uniform(rng, lo, 0.0));
  return p;
}

/// Random relaxed plan obeying the one-copy constraint.
inline CachePlan random_relaxed(const TreeNetwork& net, std::mt19937_64& rng) {
  CachePlan p = CachePlan::empty(net, CacheMode::Relaxed);
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
    auto seg = p.leaf(net, k);
    for (Index i = 0; i < seg.size(); ++i) seg[i] = uniform(rng, 0.0, 1.0);
    seg *= uniform(rng, 0.0, 1.0) / seg.sum();
  }
  return p;
}

inline CachePlan random_binary(const TreeNetwork& net, std::mt19937_64& rng) {
  std::vector<int> pos;
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
    pos.push_back(std::uniform_int_distribution<int>(-1, net.height(k))(rng));
  }
  return CachePlan::at_positions(net, pos);
}

/// Random (delta, b) pair satisfying every relaxed constraint of the
/// instance. Rates are redrawn until the uncached energy fits (falling back
/// to delta = 1), then b is halved until the caches and budget admit it.
inline std::pair<CompressionPlan, CachePlan> random_feasible_relaxed(const Instance& inst, std::mt19937_64& rng) {
  CompressionPlan d = CompressionPlan::uniform(inst.net, 1.0);
  for (int attempt = 0; attempt < 20; ++attempt) {
    CompressionPlan trial = random_delta(inst.net, rng);
    if (check_feasibility(inst.net, inst.globals, trial, CachePlan::empty(inst.net)).feasible) {
      d = trial;
      break;
    }
  }
  CachePlan b = random_relaxed(inst.net, rng);
  while (!check_feasibility(inst.net, inst.globals, d, b).feasible) b.b *= 0.5;
  return {d, b};
}

inline bool near_rel(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

}  // namespace jcc::testing
