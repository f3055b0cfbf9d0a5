#pragma once

#include <vector>

#include "jcc/oracle.hpp"

namespace jcc {

struct GreedyResult {
  Solution solution;
  std::vector<double> step_gains;  // gain after the start and after each accepted move
};

/// Local search over single-leaf cache relocations. Each leaf starts cached
/// at itself (or, if that admits no feasible rates, with no copy at all);
/// rates are re-optimised on the grid for every candidate. The best strict
/// improvement is applied until none is left; ties go to the smaller leaf,
/// then to the position closer to the sink. Throws Infeasible, or
/// TerminationCapHit after `max_steps` accepted moves (0 picks a cap from
/// the instance size).
GreedyResult greedy_solve(const TreeNetwork& net, const GlobalParams& globals, int grid_levels = kDefaultGridLevels,
                          int max_steps = 0);

}  // namespace jcc
