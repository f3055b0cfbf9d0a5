#pragma once

#include <Eigen/Core>

#include <vector>

#include "jcc/model.hpp"

namespace jcc {

using ConstSegment = Eigen::Ref<const Eigen::VectorXd>;

// Empty products are 1 and empty sums 0 throughout.

/// Per-bit processing cost of a node at reduction rate delta:
/// eps_rx + eps_tx * delta + eps_cp * (1/delta - 1).
double per_bit_cost(const NodeParams& node, double delta);

/// Energy of pushing leaf k's data to the sink on the first request.
double first_request_energy(const TreeNetwork& net, const CompressionPlan& delta, LeafIndex k);

/// Energy of serving the remaining R_k - 1 requests for leaf k's data, with
/// the cache plan evaluated literally (no clamping of the prefix factor).
double repeat_request_energy(const TreeNetwork& net, const GlobalParams& globals, const CompressionPlan& delta,
                             const CachePlan& cache, LeafIndex k);

struct EnergyTotals {
  double e_total = 0.0;     // sum of first and repeat request energies
  double e_total_ub = 0.0;  // upper bound used by the energy budget constraint
};

EnergyTotals total_energy(const TreeNetwork& net, const GlobalParams& globals, const CompressionPlan& delta,
                          const CachePlan& cache);

/// Total latency over all leaves, in seconds * bits. Relaxed plans use the
/// same product form.
double latency(const TreeNetwork& net, const CompressionPlan& delta, const CachePlan& cache);

/// Latency with neither compression nor caching; independent of plans.
double latency_upper_bound(const TreeNetwork& net);

/// latency_upper_bound - latency.
double gain(const TreeNetwork& net, const CompressionPlan& delta, const CachePlan& cache);

/// Surrogate gain: each prefix product of (1 - b) is replaced by
/// 1 - min{1, prefix sum of b}. Coincides with gain on one-copy binary plans.
double gain_approx(const TreeNetwork& net, const CompressionPlan& delta, const CachePlan& cache);

// Per-leaf pieces. `delta` and `b` are the leaf's segments, path position
// 0 (sink) to height(k) (the leaf).
double leaf_latency(const TreeNetwork& net, LeafIndex k, const ConstSegment& delta, const ConstSegment& b);
double leaf_latency_approx(const TreeNetwork& net, LeafIndex k, const ConstSegment& delta, const ConstSegment& b);
double leaf_latency_upper_bound(const TreeNetwork& net, LeafIndex k);
double leaf_energy_ub(const TreeNetwork& net, const GlobalParams& globals, LeafIndex k, const ConstSegment& delta,
                      const ConstSegment& b);
/// Bits that leaf k's cached copy occupies at each path position.
Eigen::VectorXd leaf_cache_usage(const TreeNetwork& net, LeafIndex k, const ConstSegment& delta, const ConstSegment& b);

struct FeasibilityReport {
  double energy_used = 0.0;  // upper-bound energy
  bool energy_ok = false;
  Eigen::VectorXd cache_used;  // per node, bits
  std::vector<bool> cache_ok;  // per node
  std::vector<bool> copy_ok;   // per leaf
  bool feasible = false;
  /// Largest relative constraint violation, 0 when feasible.
  double max_violation = 0.0;
};

/// Default relative slack accepted by check_feasibility.
inline constexpr double kFeasibilityTol = 1e-9;

/// Energy budget, per-node cache capacity and one-copy constraints.
FeasibilityReport check_feasibility(const TreeNetwork& net, const GlobalParams& globals, const CompressionPlan& delta,
                                    const CachePlan& cache, double rel_tol = kFeasibilityTol);

struct CostBreakdown {
  Eigen::VectorXd e_first;   // per leaf
  Eigen::VectorXd e_repeat;  // per leaf
  double e_total = 0.0;
  double e_total_ub = 0.0;
  double latency = 0.0;
  double latency_ub = 0.0;
  double gain = 0.0;
  double gain_approx = 0.0;
};

CostBreakdown evaluate(const TreeNetwork& net, const GlobalParams& globals, const CompressionPlan& delta,
                       const CachePlan& cache);

/// A plan pair together with its evaluation.
struct Solution {
  CompressionPlan delta;
  CachePlan cache;
  CostBreakdown costs;
  FeasibilityReport feasibility;
};

Solution make_solution(const TreeNetwork& net, const GlobalParams& globals, CompressionPlan delta, CachePlan cache);

}  // namespace jcc
