#include "jcc/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace jcc {

namespace {

bool fractional(double x) { return x > kIntegralTol && x < 1.0 - kIntegralTol; }

double snap(double x) {
  if (x <= kIntegralTol) return 0.0;
  if (x >= 1.0 - kIntegralTol) return 1.0;
  return x;
}

int count_fractional(const Eigen::VectorXd& b) {
  int n = 0;
  for (Index e = 0; e < b.size(); ++e) n += fractional(b[e]) ? 1 : 0;
  return n;
}

// Cache bookkeeping for one leaf's candidate assignments.
class CacheLedger {
 public:
  CacheLedger(const TreeNetwork& net, const CompressionPlan& delta, const CachePlan& cache) : net_(net) {
    used_ = Eigen::VectorXd::Zero(static_cast<Index>(net.num_nodes()));
    for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
      const auto path = net.path(k);
      per_bit_.push_back(leaf_cache_usage(net, k, delta.leaf(net, k), Eigen::VectorXd::Ones(net.height(k) + 1)));
      const Eigen::VectorXd u = per_bit_.back().cwiseProduct(cache.leaf(net, k));
      for (Index i = 0; i < u.size(); ++i) used_[path[static_cast<std::size_t>(i)]] += u[i];
    }
  }

  // Would setting leaf k's entries i to new_b[i] (from old_b) keep every node
  // it touches within capacity, or at least no fuller than before?
  bool fits(LeafIndex k, const Eigen::VectorXd& old_b, const Eigen::VectorXd& new_b) const {
    const auto path = net_.path(k);
    const Eigen::VectorXd& unit = per_bit_[static_cast<std::size_t>(k)];
    for (Index i = 0; i < old_b.size(); ++i) {
      if (old_b[i] == new_b[i]) continue;
      const NodeId v = path[static_cast<std::size_t>(i)];
      const double before = used_[v];
      const double after = before + unit[i] * (new_b[i] - old_b[i]);
      const double cap = net_.node(v).cache_capacity;
      if (after > cap * (1.0 + kFeasibilityTol) + 1e-12 && after > before) return false;
    }
    return true;
  }

  void apply(LeafIndex k, const Eigen::VectorXd& old_b, const Eigen::VectorXd& new_b) {
    const auto path = net_.path(k);
    const Eigen::VectorXd& unit = per_bit_[static_cast<std::size_t>(k)];
    for (Index i = 0; i < old_b.size(); ++i) used_[path[static_cast<std::size_t>(i)]] += unit[i] * (new_b[i] - old_b[i]);
  }

 private:
  const TreeNetwork& net_;
  std::vector<Eigen::VectorXd> per_bit_;  // y * prod_{m>=i} delta_m, per leaf
  Eigen::VectorXd used_;
};

}  // namespace

CachePlan pipage_round(const TreeNetwork& net, const GlobalParams& globals, const CompressionPlan& delta,
                       const CachePlan& cache, RoundingLog* log) {
  validate(net, delta);
  if (cache.b.size() != net.plan_size()) throw Error(ErrorCode::InvalidPlan, "cache plan size mismatch");
  {
    GlobalParams unlimited = globals;
    unlimited.energy_budget = HUGE_VAL;
    const FeasibilityReport r = check_feasibility(net, unlimited, delta, cache, 1e-6);
    if (!r.feasible) throw Error(ErrorCode::InfeasibleInput, "relaxed plan breaks the cache or one-copy constraints");
  }

  CachePlan plan{cache.b.unaryExpr([](double x) { return snap(std::clamp(x, 0.0, 1.0)); }), CacheMode::Relaxed};
  CacheLedger ledger(net, delta, plan);
  const double lu = latency_upper_bound(net);
  if (log) {
    log->gains.push_back(lu - latency(net, delta, plan));
    log->fractional_counts.push_back(count_fractional(plan.b));
  }

  for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
    const auto d = delta.leaf(net, k);
    for (;;) {
      const Eigen::VectorXd b = plan.leaf(net, k);
      std::vector<Index> frac;
      for (Index i = 0; i < b.size(); ++i) {
        if (fractional(b[i])) frac.push_back(i);
      }
      if (frac.empty()) break;

      std::vector<Eigen::VectorXd> options;
      bool forced = false;
      if (frac.size() >= 2) {
        const Index j = frac[0], l = frac[1];  // j is closer to the sink
        const double e1 = std::min(b[j], 1.0 - b[l]);
        const double e2 = std::min(1.0 - b[j], b[l]);
        Eigen::VectorXd toward_sink = b, toward_leaf = b;
        toward_sink[j] += e2;
        toward_sink[l] -= e2;
        toward_leaf[j] -= e1;
        toward_leaf[l] += e1;
        for (Eigen::VectorXd* c : {&toward_sink, &toward_leaf}) {
          *c = c->unaryExpr([](double x) { return snap(x); });
          if (ledger.fits(k, b, *c)) options.push_back(*c);
        }
        if (options.empty()) {
          forced = true;
          Eigen::VectorXd drop_leafward = b, drop_sinkward = b;
          drop_leafward[l] = 0.0;
          drop_sinkward[j] = 0.0;
          options = {drop_leafward, drop_sinkward};
        }
      } else {
        const Index j = frac[0];
        Eigen::VectorXd up = b, down = b;
        up[j] = 1.0;
        down[j] = 0.0;
        if (ledger.fits(k, b, up)) options.push_back(up);
        options.push_back(down);
      }

      // Smallest latency wins; earlier options win ties.
      std::size_t pick = 0;
      double pick_latency = leaf_latency(net, k, d, options[0]);
      for (std::size_t o = 1; o < options.size(); ++o) {
        const double lat = leaf_latency(net, k, d, options[o]);
        if (lat < pick_latency) {
          pick = o;
          pick_latency = lat;
        }
      }
      const Eigen::VectorXd& chosen = options[pick];
      if (log) log->copy_sums_before.push_back(b.sum());
      ledger.apply(k, b, chosen);
      plan.leaf(net, k) = chosen;
      if (log) {
        ++log->steps;
        log->forced_drops += forced ? 1 : 0;
        log->gains.push_back(lu - latency(net, delta, plan));
        log->fractional_counts.push_back(count_fractional(plan.b));
        log->copy_sums.push_back(chosen.sum());
      }
    }
  }
  plan.mode = CacheMode::Binary;
  validate(net, plan);
  return plan;
}

GainProfile epsilon_gain_profile(const TreeNetwork& net, const CompressionPlan& delta, const CachePlan& cache,
                                 LeafIndex k, int j, int l, double eps_lo, double eps_hi, int samples) {
  const int h = net.height(k);
  if (j == l || j < 0 || l < 0 || j > h || l > h) throw Error(ErrorCode::InvalidParameter, "need two distinct path positions");
  if (samples < 2 || !(eps_lo <= eps_hi)) throw Error(ErrorCode::InvalidParameter, "need samples >= 2 and lo <= hi");
  const auto b = cache.leaf(net, k);
  constexpr double tol = 1e-12;
  for (double eps : {eps_lo, eps_hi}) {
    if (b[j] - eps < -tol || b[j] - eps > 1.0 + tol || b[l] + eps < -tol || b[l] + eps > 1.0 + tol) {
      throw Error(ErrorCode::RangeExceedsBox, "epsilon range leaves the unit box");
    }
  }
  GainProfile p;
  CachePlan moved = cache;
  for (int s = 0; s < samples; ++s) {
    const double eps = eps_lo + (eps_hi - eps_lo) * s / (samples - 1);
    moved.leaf(net, k)[j] = std::clamp(b[j] - eps, 0.0, 1.0);
    moved.leaf(net, k)[l] = std::clamp(b[l] + eps, 0.0, 1.0);
    p.epsilon.push_back(eps);
    p.gain.push_back(gain(net, delta, moved));
  }
  return p;
}

namespace {

// Rates moved along straight lines in log space toward delta_min and toward
// 1; the feasible point with the best gain wins.
std::optional<CompressionPlan> repair_rates(const TreeNetwork& net, const GlobalParams& globals,
                                            const CompressionPlan& delta, const CachePlan& cache) {
  const Eigen::VectorXd tau = delta.delta.array().log().matrix();
  std::optional<CompressionPlan> best;
  double best_gain = -HUGE_VAL;
  for (double target : {std::log(kDeltaMin), 0.0}) {
    for (int s = 1; s <= 64; ++s) {
      const double t = s / 64.0;
      const Eigen::VectorXd moved = tau + t * (Eigen::VectorXd::Constant(tau.size(), target) - tau);
      CompressionPlan d{moved.array().exp().matrix().cwiseMax(kDeltaMin).cwiseMin(1.0)};
      if (!check_feasibility(net, globals, d, cache).feasible) continue;
      const double g = gain(net, d, cache);
      if (g > best_gain) {
        best_gain = g;
        best = std::move(d);
      }
    }
  }
  return best;
}

}  // namespace

PipelineResult round_full_pipeline(const TreeNetwork& net, const GlobalParams& globals,
                                   const SolverSettings& settings) {
  PipelineResult out;
  MasterSlaveResult relaxed = solve_master_slave(net, globals, settings);
  out.trace = relaxed.trace;
  out.relaxed_gain = gain(net, relaxed.delta, relaxed.cache);
  out.relaxed_gain_approx = gain_approx(net, relaxed.delta, relaxed.cache);

  CompressionPlan delta = relaxed.delta;
  CachePlan cache = pipage_round(net, globals, delta, relaxed.cache);
  out.rounded_gain = gain(net, delta, cache);

  if (!check_feasibility(net, globals, delta, cache).feasible) {
    out.energy_repaired = true;
    if (auto d = repair_rates(net, globals, delta, cache)) {
      delta = std::move(*d);
    } else {
      // Drop copies, each time the one whose loss is smallest.
      while (!check_feasibility(net, globals, delta, cache).feasible) {
        LeafIndex drop = -1;
        double drop_gain = -HUGE_VAL;
        for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
          if (cache.position(net, k) < 0) continue;
          CachePlan without = cache;
          without.leaf(net, k).setZero();
          const double g = gain(net, delta, without);
          if (g > drop_gain) {
            drop_gain = g;
            drop = k;
          }
        }
        if (drop < 0) throw Error(ErrorCode::Infeasible, "rounded plan cannot be repaired");
        cache.leaf(net, drop).setZero();
      }
    }
  }

  // One more compression step with the binary plan fixed.
  try {
    CompressionStep step = solve_compression_subproblem(net, globals, cache, delta, settings);
    if (check_feasibility(net, globals, step.delta, cache).feasible &&
        gain(net, step.delta, cache) >= gain(net, delta, cache)) {
      delta = std::move(step.delta);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfeasibleInput) throw;
  }

  out.solution = make_solution(net, globals, std::move(delta), std::move(cache));
  return out;
}

}  // namespace jcc
