#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "jcc/cost.hpp"

namespace jcc {

inline constexpr int kDefaultGridLevels = 41;
inline constexpr double kDefaultPlanCap = 1e6;

/// Log-spaced rates from kDeltaMin to 1 inclusive, ascending.
std::vector<double> delta_grid(int levels);

/// Number of one-copy binary cache plans: prod_k (height(k) + 2).
double count_cache_plans(const TreeNetwork& net);

/// Calls `visit` on every one-copy binary cache plan, in lexicographic order
/// of the per-leaf position vector (none < sink < ... < leaf). Returns the
/// number of plans visited. Throws InstanceTooLarge above `cap`.
std::size_t for_each_cache_plan(const TreeNetwork& net, const std::function<void(const CachePlan&)>& visit,
                                double cap = kDefaultPlanCap);

std::vector<CachePlan> enumerate_cache_plans(const TreeNetwork& net, double cap = kDefaultPlanCap);

struct CompressionResult {
  CompressionPlan delta;
  double gain = 0.0;
};

/// Coordinate descent over the rate grid for a fixed binary cache plan.
/// Starts from delta = 1, first drives the normalised constraint violation to
/// zero, then raises the gain; among equal gains lower energy wins. Sweeps run
/// leaf by leaf, positions leaf to sink. Throws Infeasible if no feasible grid
/// point is reached.
CompressionResult optimize_compression_given_cache(const TreeNetwork& net, const GlobalParams& globals,
                                                   const CachePlan& cache, int grid_levels = kDefaultGridLevels);

struct OracleResult {
  Solution best_solution;
  std::size_t configurations_examined = 0;
  int grid_resolution = 0;
};

/// Best plan over every cache configuration. Ties keep the first plan in
/// enumeration order. Throws InstanceTooLarge or Infeasible.
OracleResult brute_force(const TreeNetwork& net, const GlobalParams& globals, int grid_levels = kDefaultGridLevels,
                         double cap = kDefaultPlanCap);

}  // namespace jcc
