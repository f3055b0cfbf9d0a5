#include "jcc/relax.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "jcc/simplex.hpp"

namespace jcc {

LogVars LogVars::from_plans(const CompressionPlan& delta, const CachePlan& cache, double b_min) {
  return {delta.delta.array().log().matrix(), cache.b.array().max(b_min).log().matrix()};
}

CompressionPlan LogVars::delta() const { return {tau.array().exp().matrix()}; }

CachePlan LogVars::cache() const { return {u.array().exp().matrix(), CacheMode::Relaxed}; }

double transformed_objective(const TreeNetwork& net, const LogVars& x) {
  double lost = 0.0;
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
    const NodeParams& leaf = net.node(net.leaf_node(k));
    const auto tau = x.tau.segment(net.offset(k), net.height(k) + 1);
    const auto u = x.u.segment(net.offset(k), net.height(k) + 1);
    double prefix = 0.0;
    for (int i = 0; i < net.height(k); ++i) {
      prefix += std::exp(u[i]);
      const double exponent =
          tau.tail(net.height(k) - i).sum() + std::log(leaf.data_volume * leaf.request_count * net.hop_latency(k, i));
      lost += (1.0 - std::min(1.0, prefix)) * std::exp(exponent);
    }
  }
  return latency_upper_bound(net) - lost;
}

EnergyParts transformed_energy_lhs(const TreeNetwork& net, const GlobalParams& globals, const LogVars& x) {
  EnergyParts e;
  for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
    const NodeParams& leaf = net.node(net.leaf_node(k));
    const auto path = net.path(k);
    const int h = net.height(k);
    const auto tau = x.tau.segment(net.offset(k), h + 1);
    const auto u = x.u.segment(net.offset(k), h + 1);
    const double yr = leaf.data_volume * leaf.request_count;
    for (int i = 0; i <= h; ++i) {
      const NodeParams& p = net.node(path[static_cast<std::size_t>(i)]);
      const double below = tau.tail(h - i).sum();  // sum_{m>i} tau_m
      const double t = tau[i];
      e.processing += yr * (p.eps_rx - p.eps_cp + p.eps_tx * std::exp(t) + p.eps_cp * std::exp(-t)) * std::exp(below);
      const double stored = std::log(leaf.data_volume) + u[i] + t + below;
      e.caching += std::exp(stored + std::log(globals.w_ca * globals.period));
      if (leaf.request_count > 1 && leaf.eps_tx > 0.0) {
        e.serving += std::exp(stored + std::log((leaf.request_count - 1.0) * leaf.eps_tx));
      }
    }
  }
  return e;
}

double transformed_cache_lhs(const TreeNetwork& net, const LogVars& x, NodeId v) {
  double used = 0.0;
  const int p = net.depth(v);
  for (LeafIndex k : net.leaves_through(v)) {
    const auto tau = x.tau.segment(net.offset(k), net.height(k) + 1);
    const auto u = x.u.segment(net.offset(k), net.height(k) + 1);
    used += std::exp(tau.tail(net.height(k) + 1 - p).sum() + std::log(net.node(net.leaf_node(k)).data_volume) + u[p]);
  }
  return used;
}

void validate(const SolverSettings& s) {
  if (!(s.tolerance > 0.0)) throw Error(ErrorCode::InvalidParameter, "tolerance must be > 0");
  if (s.max_outer_iterations < 1 || s.max_inner_iterations < 1 || s.max_penalty_rounds < 1) {
    throw Error(ErrorCode::InvalidParameter, "iteration caps must be >= 1");
  }
  if (!(s.initial_penalty > 0.0)) throw Error(ErrorCode::InvalidParameter, "initial_penalty must be > 0");
  if (!(s.b_min > 0.0 && s.b_min < 1.0)) throw Error(ErrorCode::InvalidParameter, "b_min must lie in (0, 1)");
}

std::string to_csv(const SolveTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,objective,max_violation,inner_iterations\n";
  for (const TraceRow& r : trace.rows) {
    out << r.iteration << ',' << r.objective << ',' << r.max_violation << ',' << r.inner_iterations << '\n';
  }
  return out.str();
}

namespace {

// Compression step in tau with caching fixed. Everything is a sum of
// exponentials of partial sums S_i = sum_{m>=i} tau_m on each leaf path.
class CompressionProblem {
 public:
  CompressionProblem(const TreeNetwork& net, const GlobalParams& g, const CachePlan& cache)
      : net_(net), n_(net.plan_size()), lower_(std::log(kDeltaMin)) {
    lu_ = std::max(1.0, latency_upper_bound(net));
    budget_ = g.energy_budget;
    for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
      const NodeParams& leaf = net.node(net.leaf_node(k));
      const auto path = net.path(k);
      const auto b = cache.leaf(net, k);
      const int h = net.height(k);
      Leaf l;
      l.offset = net.offset(k);
      l.h = h;
      const double yr = leaf.data_volume * leaf.request_count;
      const double cache_cost = g.w_ca * g.period + (leaf.request_count - 1.0) * leaf.eps_tx;
      double prefix = 0.0;
      for (int i = 0; i <= h; ++i) {
        const NodeParams& p = net.node(path[static_cast<std::size_t>(i)]);
        prefix += b[i];
        l.lat.push_back(i < h ? yr * net.hop_latency(k, i) * (1.0 - std::min(1.0, prefix)) : 0.0);
        l.e_next.push_back(yr * (p.eps_rx - p.eps_cp));
        l.e_here.push_back(yr * p.eps_tx + leaf.data_volume * b[i] * cache_cost);
        l.e_comp.push_back(yr * p.eps_cp);
        l.store.push_back(leaf.data_volume * b[i]);
        l.nodes.push_back(path[static_cast<std::size_t>(i)]);
      }
      leaves_.push_back(std::move(l));
    }
    flat_ = true;
    for (const Leaf& l : leaves_) {
      for (double a : l.lat) flat_ = flat_ && a == 0.0;
    }
    // constraints: energy (if finite), then each node holding cached mass
    if (std::isfinite(budget_)) constraint_scale_.push_back(budget_ > 0.0 ? budget_ : 1.0);
    node_row_.assign(net.num_nodes(), -1);
    for (const Leaf& l : leaves_) {
      for (int i = 0; i <= l.h; ++i) {
        const NodeId v = l.nodes[static_cast<std::size_t>(i)];
        const double cap = net.node(v).cache_capacity;
        if (l.store[static_cast<std::size_t>(i)] > 0.0 && std::isfinite(cap) && node_row_[static_cast<std::size_t>(v)] < 0) {
          node_row_[static_cast<std::size_t>(v)] = static_cast<int>(constraint_scale_.size());
          constraint_scale_.push_back(cap > 0.0 ? cap : 1.0);
          constraint_cap_.push_back(cap);
        }
      }
    }
  }

  Index size() const { return n_; }
  double lower() const { return lower_; }
  bool flat() const { return flat_; }
  std::size_t num_constraints() const { return constraint_scale_.size(); }

  struct Eval {
    double objective = 0.0;                   // surrogate latency / max(1, L^u)
    Eigen::VectorXd constraint;               // normalised g_c, feasible iff <= 0
    Eigen::VectorXd objective_grad;           // d objective / d tau
    std::vector<Eigen::VectorXd> constraint_grad;
  };

  Eval eval(const Eigen::VectorXd& tau, bool grad) const {
    const std::size_t m = num_constraints();
    Eval r;
    r.constraint = Eigen::VectorXd::Zero(static_cast<Index>(m));
    if (grad) {
      r.objective_grad = Eigen::VectorXd::Zero(n_);
      r.constraint_grad.assign(m, Eigen::VectorXd::Zero(n_));
    }
    const bool has_energy = std::isfinite(budget_);
    double energy = 0.0;
    std::vector<double> s;
    for (const Leaf& l : leaves_) {
      const int h = l.h;
      s.assign(static_cast<std::size_t>(h + 2), 0.0);
      for (int i = h; i >= 0; --i) s[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i + 1)] + tau[l.offset + i];
      for (int i = 0; i <= h; ++i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        const double next = std::exp(s[ui + 1]);
        const double here = std::exp(s[ui]);
        // objective: lat_i * e^{S_{i+1}}, depends on tau_m for m > i
        const double lat = l.lat[ui] * next;
        r.objective += lat;
        const double e_next = l.e_next[ui] * next;
        const double e_here = l.e_here[ui] * here;
        const double e_comp = l.e_comp[ui] * next / std::exp(tau[l.offset + i]);
        energy += e_next + e_here + e_comp;
        const int row = node_row_[static_cast<std::size_t>(l.nodes[ui])];
        const double stored = l.store[ui] * here;
        if (row >= 0) r.constraint[row] += stored;
        if (!grad) continue;
        for (int mm = i + 1; mm <= h; ++mm) r.objective_grad[l.offset + mm] += lat;
        if (has_energy) {
          Eigen::VectorXd& ge = r.constraint_grad[0];
          for (int mm = i; mm <= h; ++mm) ge[l.offset + mm] += e_here + (mm > i ? e_next + e_comp : -e_comp);
        }
        if (row >= 0) {
          Eigen::VectorXd& gc = r.constraint_grad[static_cast<std::size_t>(row)];
          for (int mm = i; mm <= h; ++mm) gc[l.offset + mm] += stored;
        }
      }
    }
    r.objective /= lu_;
    if (grad) r.objective_grad /= lu_;
    if (has_energy) r.constraint[0] = energy;
    for (std::size_t c = 0; c < m; ++c) {
      const double cap = c == 0 && has_energy ? budget_ : constraint_cap_[c - (has_energy ? 1 : 0)];
      r.constraint[static_cast<Index>(c)] = (r.constraint[static_cast<Index>(c)] - cap) / constraint_scale_[c];
      if (grad) r.constraint_grad[c] /= constraint_scale_[c];
    }
    return r;
  }

  static double violation(const Eval& e) { return e.constraint.size() ? std::max(0.0, e.constraint.maxCoeff()) : 0.0; }

  Eigen::VectorXd project(Eigen::VectorXd tau) const { return tau.cwiseMax(lower_).cwiseMin(0.0); }

 private:
  struct Leaf {
    Index offset = 0;
    int h = 0;
    std::vector<double> lat, e_next, e_here, e_comp, store;
    std::vector<NodeId> nodes;
  };

  const TreeNetwork& net_;
  Index n_;
  double lower_;
  double lu_ = 1.0;
  double budget_ = 0.0;
  bool flat_ = false;
  std::vector<Leaf> leaves_;
  std::vector<int> node_row_;
  std::vector<double> constraint_scale_;
  std::vector<double> constraint_cap_;
};

double merit(const CompressionProblem::Eval& e, const Eigen::VectorXd& lambda, double rho) {
  double m = e.objective;
  for (Index c = 0; c < e.constraint.size(); ++c) {
    const double shifted = std::max(0.0, e.constraint[c] + lambda[c] / rho);
    m += 0.5 * rho * shifted * shifted - 0.5 * lambda[c] * lambda[c] / rho;
  }
  return m;
}

Eigen::VectorXd merit_grad(const CompressionProblem::Eval& e, const Eigen::VectorXd& lambda, double rho) {
  Eigen::VectorXd g = e.objective_grad;
  for (Index c = 0; c < e.constraint.size(); ++c) {
    const double shifted = std::max(0.0, e.constraint[c] + lambda[c] / rho);
    if (shifted > 0.0) g += rho * shifted * e.constraint_grad[static_cast<std::size_t>(c)];
  }
  return g;
}

// Projected gradient with Armijo backtracking on the augmented Lagrangian.
int minimise_merit(const CompressionProblem& prob, Eigen::VectorXd& tau, const Eigen::VectorXd& lambda, double rho,
                   int max_iter) {
  CompressionProblem::Eval e = prob.eval(tau, true);
  double f = merit(e, lambda, rho);
  double step = 1.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    const Eigen::VectorXd g = merit_grad(e, lambda, rho);
    bool accepted = false;
    Eigen::VectorXd trial;
    CompressionProblem::Eval te;
    double tf = 0.0;
    while (step > 1e-16) {
      trial = prob.project(tau - step * g);
      const double decrease = g.dot(trial - tau);
      if ((trial - tau).lpNorm<Eigen::Infinity>() < 1e-13) break;
      te = prob.eval(trial, true);
      tf = merit(te, lambda, rho);
      if (tf <= f + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double moved = (trial - tau).lpNorm<Eigen::Infinity>();
    const double gained = f - tf;
    tau = std::move(trial);
    e = std::move(te);
    f = tf;
    step = std::min(step * 2.0, 1e8);
    if (moved < 1e-12 || gained <= 1e-15 * std::max(1.0, std::abs(f))) break;
  }
  return it;
}

double energy_only(const TreeNetwork& net, const GlobalParams& g, const Eigen::VectorXd& tau) {
  const CompressionPlan d{tau.array().exp().matrix().cwiseMax(kDeltaMin).cwiseMin(1.0)};
  return total_energy(net, g, d, CachePlan::empty(net)).e_total_ub;
}

bool within_budget(const TreeNetwork& net, const GlobalParams& g, const Eigen::VectorXd& tau) {
  return !std::isfinite(g.energy_budget) || energy_only(net, g, tau) <= g.energy_budget;
}

}  // namespace

CompressionPlan initial_compression(const TreeNetwork& net, const GlobalParams& globals, const SolverSettings& settings) {
  validate(settings);
  std::mt19937_64 rng(settings.seed);
  std::uniform_real_distribution<double> draw(std::log(kDeltaMin), 0.0);
  Eigen::VectorXd tau(net.plan_size());
  for (Index e = 0; e < tau.size(); ++e) tau[e] = draw(rng);

  auto done = [](const Eigen::VectorXd& t) { return CompressionPlan{t.array().exp().matrix().cwiseMax(kDeltaMin).cwiseMin(1.0)}; };
  if (within_budget(net, globals, tau)) return done(tau);

  // Heavy compression is paid for by the 1/delta term, so first pull the
  // random point toward delta = 1, then toward delta_min.
  auto repair_toward = [&](const Eigen::VectorXd& target) -> std::optional<Eigen::VectorXd> {
    if (!within_budget(net, globals, target)) return std::nullopt;
    double bad = 0.0, good = 1.0;
    for (int i = 0; i < 20; ++i) {
      const double mid = 0.5 * (bad + good);
      if (within_budget(net, globals, tau + mid * (target - tau))) {
        good = mid;
      } else {
        bad = mid;
      }
    }
    return tau + good * (target - tau);
  };
  if (auto t = repair_toward(Eigen::VectorXd::Zero(tau.size()))) return done(*t);
  if (auto t = repair_toward(Eigen::VectorXd::Constant(tau.size(), std::log(kDeltaMin)))) return done(*t);

  // Last resort: descend on energy alone from delta = 1.
  if (std::isfinite(globals.energy_budget)) {
    CompressionProblem prob(net, globals, CachePlan::empty(net, CacheMode::Relaxed));
    Eigen::VectorXd t = Eigen::VectorXd::Zero(tau.size());
    for (int it = 0; it < 2000; ++it) {
      const CompressionProblem::Eval e = prob.eval(t, true);
      if (e.constraint[0] <= 0.0) return done(t);
      double step = 1.0;
      Eigen::VectorXd trial;
      for (; step > 1e-16; step *= 0.5) {
        trial = prob.project(t - step * e.constraint_grad[0]);
        if (prob.eval(trial, false).constraint[0] < e.constraint[0]) break;
      }
      if (step <= 1e-16 || (trial - t).lpNorm<Eigen::Infinity>() < 1e-14) break;
      t = trial;
    }
  }
  throw Error(ErrorCode::Infeasible, "no compression plan meets the energy budget without caching");
}

CachePlan solve_caching_subproblem(const TreeNetwork& net, const GlobalParams& globals, const CompressionPlan& delta,
                                   const SolverSettings&) {
  validate(net, delta);
  const double processing = total_energy(net, globals, delta, CachePlan::empty(net)).e_total_ub;
  const bool energy_row = std::isfinite(globals.energy_budget);
  if (energy_row && processing > globals.energy_budget * (1.0 + kFeasibilityTol)) {
    throw Error(ErrorCode::Infeasible, "rates alone exceed the energy budget");
  }

  const Index n = net.plan_size();
  std::vector<NodeId> capped;
  std::vector<int> node_row(net.num_nodes(), -1);
  for (std::size_t v = 0; v < net.num_nodes(); ++v) {
    if (std::isfinite(net.node(static_cast<NodeId>(v)).cache_capacity)) {
      node_row[v] = static_cast<int>(capped.size());
      capped.push_back(static_cast<NodeId>(v));
    }
  }
  const Index rows = (energy_row ? 1 : 0) + static_cast<Index>(capped.size()) + net.num_leaves();
  const Index cache0 = energy_row ? 1 : 0;
  const Index copy0 = cache0 + static_cast<Index>(capped.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  if (energy_row) b[0] = std::max(0.0, globals.energy_budget - processing);
  for (std::size_t r = 0; r < capped.size(); ++r) b[cache0 + static_cast<Index>(r)] = net.node(capped[r]).cache_capacity;
  b.tail(net.num_leaves()).setOnes();

  for (LeafIndex k = 0; k < net.num_leaves(); ++k) {
    const NodeParams& leaf = net.node(net.leaf_node(k));
    const auto d = delta.leaf(net, k);
    const auto path = net.path(k);
    const int h = net.height(k);
    Eigen::VectorXd suffix(h + 2);
    suffix[h + 1] = 1.0;
    for (int i = h; i >= 0; --i) suffix[i] = suffix[i + 1] * d[i];
    // Coefficient of b_j: latency saved on every hop at or below position j.
    double saved = 0.0;
    for (int j = h; j >= 0; --j) {
      if (j < h) saved += suffix[j + 1] * leaf.data_volume * leaf.request_count * net.hop_latency(k, j);
      const Index col = net.offset(k) + j;
      c[col] = saved;
      const double stored = leaf.data_volume * suffix[j];
      if (energy_row) A(0, col) = stored * (globals.w_ca * globals.period + (leaf.request_count - 1.0) * leaf.eps_tx);
      const int row = node_row[static_cast<std::size_t>(path[static_cast<std::size_t>(j)])];
      if (row >= 0) A(cache0 + row, col) = stored;
      A(copy0 + k, col) = 1.0;
    }
  }

  const LpResult lp = solve_lp(A, b, c);
  CachePlan plan{lp.x.cwiseMax(0.0).cwiseMin(1.0), CacheMode::Relaxed};
  for (Index e = 0; e < n; ++e) {
    if (plan.b[e] < 1e-13) plan.b[e] = 0.0;
    if (plan.b[e] > 1.0 - 1e-13) plan.b[e] = 1.0;
  }
  return plan;
}

CompressionStep solve_compression_subproblem(const TreeNetwork& net, const GlobalParams& globals,
                                             const CachePlan& cache, const CompressionPlan& start,
                                             const SolverSettings& settings) {
  validate(settings);
  validate(net, start);
  const CompressionProblem prob(net, globals, cache);
  CompressionStep out{start, 0, prob.flat()};
  if (prob.flat()) return out;

  const Eigen::VectorXd tau0 = start.delta.array().log().matrix().cwiseMax(prob.lower()).cwiseMin(0.0);
  const CompressionProblem::Eval e0 = prob.eval(tau0, false);
  const double tol = settings.feasibility_tol;
  if (CompressionProblem::violation(e0) > tol) {
    throw Error(ErrorCode::InfeasibleInput, "compression step must start from a feasible point");
  }

  Eigen::VectorXd best = tau0;
  double best_obj = e0.objective;
  Eigen::VectorXd tau = tau0;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(static_cast<Index>(prob.num_constraints()));
  double rho = settings.initial_penalty;
  double last_violation = HUGE_VAL;
  double last_obj = HUGE_VAL;
  CompressionProblem::Eval e = e0;
  for (int round = 0; round < settings.max_penalty_rounds; ++round) {
    out.inner_iterations += minimise_merit(prob, tau, lambda, rho, settings.max_inner_iterations);
    e = prob.eval(tau, false);
    const double v = CompressionProblem::violation(e);
    if (v <= tol && e.objective < best_obj) {
      best = tau;
      best_obj = e.objective;
    }
    for (Index c = 0; c < lambda.size(); ++c) lambda[c] = std::max(0.0, lambda[c] + rho * e.constraint[c]);
    if (v > 0.25 * last_violation) rho *= 2.0;
    const bool settled = std::abs(e.objective - last_obj) <= 1e-12 * std::max(1.0, std::abs(e.objective));
    if (v <= tol * 1e-2 && (settled || lambda.size() == 0 || lambda.isZero())) break;
    last_violation = v;
    last_obj = e.objective;
  }

  // A slightly infeasible final iterate is pulled back toward the start.
  if (CompressionProblem::violation(e) > tol) {
    double good = 0.0, bad = 1.0;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (good + bad);
      if (CompressionProblem::violation(prob.eval(tau0 + mid * (tau - tau0), false)) <= tol) {
        good = mid;
      } else {
        bad = mid;
      }
    }
    const Eigen::VectorXd pulled = tau0 + good * (tau - tau0);
    const double obj = prob.eval(pulled, false).objective;
    if (obj < best_obj) {
      best = pulled;
      best_obj = obj;
    }
  }
  out.delta.delta = best.array().exp().matrix().cwiseMax(kDeltaMin).cwiseMin(1.0);
  return out;
}

CompressionPlan solve_compression_subproblem(const TreeNetwork& net, const GlobalParams& globals,
                                             const CachePlan& cache, const SolverSettings& settings) {
  CompressionPlan start = CompressionPlan::uniform(net, 1.0);
  if (!check_feasibility(net, globals, start, cache).feasible) {
    start = initial_compression(net, globals, settings);
    if (!check_feasibility(net, globals, start, cache).feasible) {
      throw Error(ErrorCode::Infeasible, "no feasible starting rates for this cache plan");
    }
  }
  return solve_compression_subproblem(net, globals, cache, start, settings).delta;
}

MasterSlaveResult solve_master_slave(const TreeNetwork& net, const GlobalParams& globals,
                                     const SolverSettings& settings) {
  validate(settings);
  validate(globals);
  const double scale = std::max(1.0, latency_upper_bound(net));

  MasterSlaveResult r;
  r.delta = initial_compression(net, globals, settings);
  r.cache = CachePlan::empty(net, CacheMode::Relaxed);
  double previous = gain_approx(net, r.delta, r.cache);
  r.trace.rows.push_back({0, previous, check_feasibility(net, globals, r.delta, r.cache).max_violation, 0});

  for (int it = 1; it <= settings.max_outer_iterations; ++it) {
    CachePlan cache = solve_caching_subproblem(net, globals, r.delta, settings);
    if (gain_approx(net, r.delta, cache) >= gain_approx(net, r.delta, r.cache)) r.cache = std::move(cache);
    CompressionStep step = solve_compression_subproblem(net, globals, r.cache, r.delta, settings);
    r.delta = std::move(step.delta);
    const double objective = gain_approx(net, r.delta, r.cache);
    r.trace.rows.push_back(
        {it, objective, check_feasibility(net, globals, r.delta, r.cache).max_violation, step.inner_iterations});
    r.trace.iterations = it;
    if (std::abs(objective - previous) < settings.tolerance * scale) {
      r.trace.converged = true;
      return r;
    }
    previous = objective;
  }
  throw NonConvergenceError(std::move(r));
}

}  // namespace jcc
