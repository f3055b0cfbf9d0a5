#include "jcc/cost.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jcc {

namespace {

void check_sizes(const TreeNetwork& net, const CompressionPlan& delta) {
  if (delta.delta.size() != net.plan_size()) throw Error(ErrorCode::InvalidPlan, "compression plan size mismatch");
}

void check_sizes(const TreeNetwork& net, const CompressionPlan& delta, const CachePlan& cache) {
  check_sizes(net, delta);
  if (cache.b.size() != net.plan_size()) throw Error(ErrorCode::InvalidPlan, "cache plan size mismatch");
}

// suffix[i] = prod_{m=i}^{h} delta_m, suffix[h+1] = 1.
Eigen::VectorXd suffix_products(const ConstSegment& delta) {
  const Index n = delta.size();
  Eigen::VectorXd suffix(n + 1);
  suffix[n] = 1.0;
  for (Index i = n - 1; i >= 0; --i) suffix[i] = suffix[i + 1] * delta[i];
  return suffix;
}

const NodeParams& leaf_params(const TreeNetwork& net, LeafIndex k) { return net.node(net.leaf_node(k)); }

}  // namespace

double per_bit_cost(const NodeParams& node, double delta) {
  if (!(delta >= kDeltaMin && delta <= 1.0)) {
    throw Error(ErrorCode::DeltaOutOfRange, "delta = " + std::to_string(delta));
  }
  return node.eps_rx + node.eps_tx * delta + node.eps_cp * (1.0 / delta - 1.0);
}

double first_request_energy(const TreeNetwork& net, const CompressionPlan& delta, LeafIndex k) {
  check_sizes(net, delta);
  const auto path = net.path(k);
  const auto d = delta.leaf(net, k);
  const Eigen::VectorXd suffix = suffix_products(d);
  const double y = leaf_params(net, k).data_volume;
  double e = 0.0;
  for (Index i = 0; i < d.size(); ++i) {
    e += y * per_bit_cost(net.node(path[static_cast<std::size_t>(i)]), d[i]) * suffix[i + 1];
  }
  return e;
}

double repeat_request_energy(const TreeNetwork& net, const GlobalParams& globals, const CompressionPlan& delta,
                             const CachePlan& cache, LeafIndex k) {
  check_sizes(net, delta, cache);
  const NodeParams& leaf = leaf_params(net, k);
  const int repeats = leaf.request_count - 1;
  if (repeats <= 0) return 0.0;
  const auto path = net.path(k);
  const auto d = delta.leaf(net, k);
  const auto b = cache.leaf(net, k);
  const Eigen::VectorXd suffix = suffix_products(d);
  const double y = leaf.data_volume;
  const double serve = globals.w_ca * globals.period / repeats + leaf.eps_tx;
  double e = 0.0;
  // A copy cached at position j serves every request for positions 0..j,
  // so position i only processes data when nothing at or above it caches.
  double cached_at_or_above = 0.0;  // sum_{j<=i} b_j
  for (Index i = 0; i < d.size(); ++i) {
    cached_at_or_above += b[i];
    const double f = per_bit_cost(net.node(path[static_cast<std::size_t>(i)]), d[i]);
    e += y * repeats * (f * suffix[i + 1] * (1.0 - cached_at_or_above) + suffix[i] * b[i] * serve);
  }
  return e;
}

double leaf_energy_ub(const TreeNetwork& net, const GlobalParams& globals, LeafIndex k, const ConstSegment& d,
                      const ConstSegment& b) {
  const NodeParams& leaf = leaf_params(net, k);
  const auto path = net.path(k);
  const Eigen::VectorXd suffix = suffix_products(d);
  const double y = leaf.data_volume;
  const double requests = leaf.request_count;
  const double cache_cost = globals.w_ca * globals.period + (requests - 1.0) * leaf.eps_tx;
  double e = 0.0;
  for (Index i = 0; i < d.size(); ++i) {
    const double f = per_bit_cost(net.node(path[static_cast<std::size_t>(i)]), d[i]);
    e += y * (requests * f * suffix[i + 1] + suffix[i] * b[i] * cache_cost);
  }
  return e;
}

EnergyTotals total_energy(const TreeNetwork& net, const GlobalParams& globals, const CompressionPlan& delta,
                          const CachePlan& cache) {
  check_sizes(net, delta, cache);
  EnergyTotals t;
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
    t.e_total += first_request_energy(net, delta, k) + repeat_request_energy(net, globals, delta, cache, k);
    t.e_total_ub += leaf_energy_ub(net, globals, k, delta.leaf(net, k), cache.leaf(net, k));
  }
  return t;
}

double leaf_latency(const TreeNetwork& net, LeafIndex k, const ConstSegment& d, const ConstSegment& b) {
  const NodeParams& leaf = leaf_params(net, k);
  const Eigen::VectorXd suffix = suffix_products(d);
  const double volume = leaf.data_volume * leaf.request_count;
  double l = 0.0;
  double uncached = 1.0;  // prod_{j<=i} (1 - b_j)
  for (int i = 0; i < net.height(k); ++i) {
    uncached *= 1.0 - b[i];
    l += suffix[i + 1] * volume * net.hop_latency(k, i) * uncached;
  }
  return l;
}

double leaf_latency_approx(const TreeNetwork& net, LeafIndex k, const ConstSegment& d, const ConstSegment& b) {
  const NodeParams& leaf = leaf_params(net, k);
  const Eigen::VectorXd suffix = suffix_products(d);
  const double volume = leaf.data_volume * leaf.request_count;
  double l = 0.0;
  double prefix = 0.0;
  for (int i = 0; i < net.height(k); ++i) {
    prefix += b[i];
    l += suffix[i + 1] * volume * net.hop_latency(k, i) * (1.0 - std::min(1.0, prefix));
  }
  return l;
}

double leaf_latency_upper_bound(const TreeNetwork& net, LeafIndex k) {
  const NodeParams& leaf = leaf_params(net, k);
  double l = 0.0;
  for (int i = 0; i < net.height(k); ++i) l += leaf.data_volume * net.hop_latency(k, i) * leaf.request_count;
  return l;
}

double latency(const TreeNetwork& net, const CompressionPlan& delta, const CachePlan& cache) {
  check_sizes(net, delta, cache);
  double l = 0.0;
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) l += leaf_latency(net, k, delta.leaf(net, k), cache.leaf(net, k));
  return l;
}

double latency_upper_bound(const TreeNetwork& net) {
  double l = 0.0;
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) l += leaf_latency_upper_bound(net, k);
  return l;
}

double gain(const TreeNetwork& net, const CompressionPlan& delta, const CachePlan& cache) {
  return latency_upper_bound(net) - latency(net, delta, cache);
}

double gain_approx(const TreeNetwork& net, const CompressionPlan& delta, const CachePlan& cache) {
  check_sizes(net, delta, cache);
  double l = 0.0;
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
    l += leaf_latency_approx(net, k, delta.leaf(net, k), cache.leaf(net, k));
  }
  return latency_upper_bound(net) - l;
}

Eigen::VectorXd leaf_cache_usage(const TreeNetwork& net, LeafIndex k, const ConstSegment& d, const ConstSegment& b) {
  const Eigen::VectorXd suffix = suffix_products(d);
  const double y = leaf_params(net, k).data_volume;
  Eigen::VectorXd used(d.size());
  for (Index i = 0; i < d.size(); ++i) used[i] = b[i] * y * suffix[i];
  return used;
}

FeasibilityReport check_feasibility(const TreeNetwork& net, const GlobalParams& globals, const CompressionPlan& delta,
                                    const CachePlan& cache, double rel_tol) {
  check_sizes(net, delta, cache);
  FeasibilityReport r;
  r.cache_used = Eigen::VectorXd::Zero(static_cast<Index>(net.num_nodes()));
  r.copy_ok.assign(static_cast<std::size_t>(net.num_leaves()), true);
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
    const auto d = delta.leaf(net, k);
    const auto b = cache.leaf(net, k);
    r.energy_used += leaf_energy_ub(net, globals, k, d, b);
    const Eigen::VectorXd used = leaf_cache_usage(net, k, d, b);
    const auto path = net.path(k);
    for (Index i = 0; i < used.size(); ++i) r.cache_used[path[static_cast<std::size_t>(i)]] += used[i];
    const double copies = b.sum();
    if (copies > 1.0 + rel_tol || b.minCoeff() < -rel_tol || b.maxCoeff() > 1.0 + rel_tol) {
      r.copy_ok[static_cast<std::size_t>(k)] = false;
      r.max_violation = std::max(r.max_violation, copies - 1.0);
    }
  }

  const double budget = globals.energy_budget;
  r.energy_ok = r.energy_used <= budget * (1.0 + rel_tol);
  if (!r.energy_ok) {
    r.max_violation = std::max(r.max_violation, budget > 0.0 ? (r.energy_used - budget) / budget : HUGE_VAL);
  }

  r.cache_ok.assign(net.num_nodes(), true);
  for (std::size_t v = 0; v < net.num_nodes(); ++v) {
    const double cap = net.node(static_cast<NodeId>(v)).cache_capacity;
    const double used = r.cache_used[static_cast<Index>(v)];
    if (used > cap * (1.0 + rel_tol) + 1e-12) {
      r.cache_ok[v] = false;
      r.max_violation = std::max(r.max_violation, cap > 0.0 ? (used - cap) / cap : HUGE_VAL);
    }
  }

  r.feasible = r.energy_ok && std::all_of(r.cache_ok.begin(), r.cache_ok.end(), [](bool x) { return x; }) &&
               std::all_of(r.copy_ok.begin(), r.copy_ok.end(), [](bool x) { return x; });
  return r;
}

CostBreakdown evaluate(const TreeNetwork& net, const GlobalParams& globals, const CompressionPlan& delta,
                       const CachePlan& cache) {
  check_sizes(net, delta, cache);
  CostBreakdown c;
  c.e_first.resize(net.num_leaves());
  c.e_repeat.resize(net.num_leaves());
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
    c.e_first[k] = first_request_energy(net, delta, k);
    c.e_repeat[k] = repeat_request_energy(net, globals, delta, cache, k);
  }
  const EnergyTotals e = total_energy(net, globals, delta, cache);
  c.e_total = e.e_total;
  c.e_total_ub = e.e_total_ub;
  c.latency = latency(net, delta, cache);
  c.latency_ub = latency_upper_bound(net);
  c.gain = c.latency_ub - c.latency;
  c.gain_approx = gain_approx(net, delta, cache);
  return c;
}

Solution make_solution(const TreeNetwork& net, const GlobalParams& globals, CompressionPlan delta, CachePlan cache) {
  Solution s{std::move(delta), std::move(cache), {}, {}};
  s.costs = evaluate(net, globals, s.delta, s.cache);
  s.feasibility = check_feasibility(net, globals, s.delta, s.cache);
  return s;
}

}  // namespace jcc
