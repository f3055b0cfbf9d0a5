#include "jcc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jcc {

namespace {

constexpr double kSlack = 1e-10;  // relative slack, inside check_feasibility's tolerance
constexpr int kMaxSweeps = 1000;

double excess(double used, double cap) {
  if (!std::isfinite(cap)) return 0.0;
  const double over = used - cap * (1.0 + kSlack);
  if (over <= 0.0) return 0.0;
  return over / (cap > 0.0 ? cap : 1.0);
}

struct LeafTerms {
  double energy = 0.0;
  double latency = 0.0;
  double usage = 0.0;  // bits stored at the cached node, 0 without a copy
};

// Incremental evaluator for a fixed binary cache plan. Changing one rate only
// touches its own leaf, so candidates are priced in O(height).
class Evaluator {
 public:
  Evaluator(const TreeNetwork& net, const GlobalParams& g, const CachePlan& cache)
      : net_(net), budget_(g.energy_budget), suffix_(16) {
    for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
      const NodeParams& leaf = net.node(net.leaf_node(k));
      Leaf l;
      l.pos = cache.position(net, k);
      l.cached_node = l.pos >= 0 ? net.path(k)[static_cast<std::size_t>(l.pos)] : -1;
      l.y = leaf.data_volume;
      l.requests = leaf.request_count;
      l.cache_cost = g.w_ca * g.period + (leaf.request_count - 1.0) * leaf.eps_tx;
      for (NodeId v : net.path(k)) l.nodes.push_back(&net.node(v));
      for (int i = 0; i < net.height(k); ++i) l.hop.push_back(l.y * leaf.request_count * net.hop_latency(k, i));
      leaves_.push_back(std::move(l));
    }
    usage_.assign(net.num_nodes(), 0.0);
  }

  LeafTerms leaf_terms(LeafIndex k, const ConstSegment& d) {
    const Leaf& l = leaves_[static_cast<std::size_t>(k)];
    const std::size_t n = static_cast<std::size_t>(d.size());
    if (suffix_.size() < n + 1) suffix_.resize(n + 1);
    suffix_[n] = 1.0;
    for (std::size_t i = n; i-- > 0;) suffix_[i] = suffix_[i + 1] * d[static_cast<Index>(i)];
    LeafTerms t;
    double processing = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const NodeParams& p = *l.nodes[i];
      const double di = d[static_cast<Index>(i)];
      processing += (p.eps_rx + p.eps_tx * di + p.eps_cp * (1.0 / di - 1.0)) * suffix_[i + 1];
    }
    t.energy = l.y * l.requests * processing;
    const std::size_t served = l.pos >= 0 ? static_cast<std::size_t>(l.pos) : l.hop.size();
    for (std::size_t i = 0; i < served; ++i) t.latency += suffix_[i + 1] * l.hop[i];
    if (l.pos >= 0) {
      t.usage = l.y * suffix_[static_cast<std::size_t>(l.pos)];
      t.energy += t.usage * l.cache_cost;
    }
    return t;
  }

  void reset(const CompressionPlan& delta) {
    terms_.clear();
    energy_ = latency_ = 0.0;
    std::fill(usage_.begin(), usage_.end(), 0.0);
    for (LeafIndex k = 0; k < net_.num_leaves(); ++k) {
      const LeafTerms t = leaf_terms(k, delta.leaf(net_, k));
      terms_.push_back(t);
      energy_ += t.energy;
      latency_ += t.latency;
      const NodeId v = leaves_[static_cast<std::size_t>(k)].cached_node;
      if (v >= 0) usage_[static_cast<std::size_t>(v)] += t.usage;
    }
    cache_excess_ = 0.0;
    for (std::size_t v = 0; v < usage_.size(); ++v) cache_excess_ += node_excess(v, usage_[v]);
  }

  struct Score {
    double violation;
    double latency;
    double energy;
  };

  Score current() const { return {energy_excess(energy_) + cache_excess_, latency_, energy_}; }

  // Score after replacing leaf k's terms by t.
  Score candidate(LeafIndex k, const LeafTerms& t) const {
    const LeafTerms& old = terms_[static_cast<std::size_t>(k)];
    const double e = energy_ - old.energy + t.energy;
    double cache = cache_excess_;
    const NodeId v = leaves_[static_cast<std::size_t>(k)].cached_node;
    if (v >= 0) {
      const std::size_t u = static_cast<std::size_t>(v);
      cache += node_excess(u, usage_[u] - old.usage + t.usage) - node_excess(u, usage_[u]);
      cache = std::max(cache, 0.0);
    }
    return {energy_excess(e) + cache, latency_ - old.latency + t.latency, e};
  }

  void commit(LeafIndex k, const LeafTerms& t) {
    LeafTerms& old = terms_[static_cast<std::size_t>(k)];
    energy_ += t.energy - old.energy;
    latency_ += t.latency - old.latency;
    const NodeId v = leaves_[static_cast<std::size_t>(k)].cached_node;
    if (v >= 0) {
      const std::size_t u = static_cast<std::size_t>(v);
      cache_excess_ -= node_excess(u, usage_[u]);
      usage_[u] += t.usage - old.usage;
      cache_excess_ = std::max(cache_excess_ + node_excess(u, usage_[u]), 0.0);
    }
    old = t;
  }

 private:
  struct Leaf {
    int pos = -1;
    NodeId cached_node = -1;
    double y = 0.0;
    double requests = 0.0;
    double cache_cost = 0.0;
    std::vector<const NodeParams*> nodes;
    std::vector<double> hop;  // y R l_i
  };

  double energy_excess(double e) const {
    if (!std::isfinite(budget_)) return 0.0;
    return excess(e, budget_);
  }
  double node_excess(std::size_t v, double used) const {
    return excess(used, net_.node(static_cast<NodeId>(v)).cache_capacity);
  }

  const TreeNetwork& net_;
  double budget_;
  std::vector<Leaf> leaves_;
  std::vector<double> suffix_;
  std::vector<LeafTerms> terms_;
  std::vector<double> usage_;
  double energy_ = 0.0;
  double latency_ = 0.0;
  double cache_excess_ = 0.0;
};

}  // namespace

std::vector<double> delta_grid(int levels) {
  if (levels < 2) throw Error(ErrorCode::InvalidParameter, "grid needs at least 2 levels");
  std::vector<double> grid(static_cast<std::size_t>(levels));
  for (int j = 0; j < levels; ++j) {
    grid[static_cast<std::size_t>(j)] = std::pow(kDeltaMin, static_cast<double>(levels - 1 - j) / (levels - 1));
  }
  grid.front() = kDeltaMin;
  grid.back() = 1.0;
  return grid;
}

double count_cache_plans(const TreeNetwork& net) {
  double count = 1.0;
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) count *= net.height(k) + 2;
  return count;
}

std::size_t for_each_cache_plan(const TreeNetwork& net, const std::function<void(const CachePlan&)>& visit,
                                double cap) {
  const double count = count_cache_plans(net);
  if (count > cap) {
    throw Error(ErrorCode::InstanceTooLarge, std::to_string(count) + " cache plans exceed the cap of " +
                                                 std::to_string(cap));
  }
  const std::size_t leaves = static_cast<std::size_t>(net.num_leaves());
  std::vector<int> pos(leaves, -1);
  std::size_t visited = 0;
  for (;;) {
    visit(CachePlan::at_positions(net, pos));
    ++visited;
    // odometer, last leaf fastest
    std::size_t k = leaves;
    while (k > 0) {
      --k;
      if (pos[k] < net.height(static_cast<LeafIndex>(k))) {
        ++pos[k];
        break;
      }
      pos[k] = -1;
      if (k == 0) return visited;
    }
  }
}

std::vector<CachePlan> enumerate_cache_plans(const TreeNetwork& net, double cap) {
  std::vector<CachePlan> plans;
  for_each_cache_plan(net, [&](const CachePlan& p) { plans.push_back(p); }, cap);
  return plans;
}

CompressionResult optimize_compression_given_cache(const TreeNetwork& net, const GlobalParams& globals,
                                                   const CachePlan& cache, int grid_levels) {
  validate(net, cache);
  const std::vector<double> grid = delta_grid(grid_levels);
  const double lu = latency_upper_bound(net);
  const double gain_tol = 1e-12 * std::max(1.0, lu);

  Evaluator eval(net, globals, cache);
  CompressionPlan plan = CompressionPlan::uniform(net, 1.0);
  eval.reset(plan);

  auto better = [&](const Evaluator::Score& a, const Evaluator::Score& b) {
    if (b.violation > 0.0) return a.violation < b.violation * (1.0 - 1e-12);
    if (a.violation > 0.0) return false;
    if (a.latency < b.latency - gain_tol) return true;
    return a.latency <= b.latency && a.energy < b.energy * (1.0 - 1e-12);
  };

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool improved = false;
    for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
      auto seg = plan.leaf(net, k);
      for (Index i = seg.size() - 1; i >= 0; --i) {
        const double start = seg[i];
        Evaluator::Score best = eval.current();
        double best_value = start;
        LeafTerms best_terms;
        bool moved = false;
        for (double value : grid) {
          if (value == start) continue;
          seg[i] = value;
          const LeafTerms t = eval.leaf_terms(k, seg);
          const Evaluator::Score s = eval.candidate(k, t);
          if (better(s, best)) {
            best = s;
            best_value = value;
            best_terms = t;
            moved = true;
          }
        }
        seg[i] = best_value;
        if (moved) {
          eval.commit(k, best_terms);
          improved = true;
        }
      }
    }
    eval.reset(plan);  // drop accumulated rounding before the next sweep
    if (!improved) break;
  }

  const Evaluator::Score final_score = eval.current();
  if (final_score.violation > 0.0) {
    throw Error(ErrorCode::Infeasible, "no feasible rate plan on the grid for this cache plan");
  }
  return {std::move(plan), lu - final_score.latency};
}

OracleResult brute_force(const TreeNetwork& net, const GlobalParams& globals, int grid_levels, double cap) {
  OracleResult result;
  result.grid_resolution = grid_levels;
  bool found = false;
  double best_gain = 0.0;
  CompressionPlan best_delta;
  CachePlan best_cache;
  result.configurations_examined = for_each_cache_plan(
      net,
      [&](const CachePlan& plan) {
        try {
          CompressionResult r = optimize_compression_given_cache(net, globals, plan, grid_levels);
          if (!found || r.gain > best_gain) {
            found = true;
            best_gain = r.gain;
            best_delta = std::move(r.delta);
            best_cache = plan;
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Infeasible) throw;
        }
      },
      cap);
  if (!found) throw Error(ErrorCode::Infeasible, "no cache plan admits a feasible rate plan");
  result.best_solution = make_solution(net, globals, std::move(best_delta), std::move(best_cache));
  return result;
}

}  // namespace jcc
