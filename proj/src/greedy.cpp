#include "jcc/greedy.hpp"

#include <algorithm>
#include <optional>

namespace jcc {

namespace {

std::optional<CompressionResult> try_optimize(const TreeNetwork& net, const GlobalParams& globals,
                                              const std::vector<int>& pos, int grid_levels) {
  try {
    return optimize_compression_given_cache(net, globals, CachePlan::at_positions(net, pos), grid_levels);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Infeasible) throw;
    return std::nullopt;
  }
}

}  // namespace

GreedyResult greedy_solve(const TreeNetwork& net, const GlobalParams& globals, int grid_levels, int max_steps) {
  const std::size_t leaves = static_cast<std::size_t>(net.num_leaves());
  if (max_steps <= 0) max_steps = static_cast<int>(std::min<Index>(net.plan_size() * 1000, 1 << 20));
  const double tol = 1e-12 * std::max(1.0, latency_upper_bound(net));

  std::vector<int> pos(leaves);
  for (std::size_t k = 0; k < leaves; ++k) pos[k] = net.height(static_cast<LeafIndex>(k));
  std::optional<CompressionResult> current = try_optimize(net, globals, pos, grid_levels);
  if (!current) {
    std::fill(pos.begin(), pos.end(), -1);
    current = try_optimize(net, globals, pos, grid_levels);
  }
  if (!current) throw Error(ErrorCode::Infeasible, "neither leaf caching nor no caching admits feasible rates");

  GreedyResult result;
  result.step_gains.push_back(current->gain);
  for (int step = 0;; ++step) {
    std::optional<CompressionResult> best;
    std::size_t best_leaf = 0;
    int best_pos = 0;
    for (std::size_t k = 0; k < leaves; ++k) {
      const int h = net.height(static_cast<LeafIndex>(k));
      const int here = pos[k];
      for (int p = 0; p <= h + 1; ++p) {
        const int target = p <= h ? p : -1;  // dropping the copy is tried last
        if (target == here) continue;
        pos[k] = target;
        std::optional<CompressionResult> r = try_optimize(net, globals, pos, grid_levels);
        if (r && r->gain > current->gain + tol && (!best || r->gain > best->gain)) {
          best = std::move(r);
          best_leaf = k;
          best_pos = target;
        }
      }
      pos[k] = here;
    }
    if (!best) break;
    if (step >= max_steps) throw Error(ErrorCode::TerminationCapHit, "greedy exceeded its step cap");
    pos[best_leaf] = best_pos;
    current = std::move(best);
    result.step_gains.push_back(current->gain);
  }
  result.solution = make_solution(net, globals, std::move(current->delta), CachePlan::at_positions(net, pos));
  return result;
}

}  // namespace jcc
