#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jcc/cost.hpp"

namespace jcc {

/// tau = log(delta), u = log(b) over the flat plan layout.
struct LogVars {
  Eigen::VectorXd tau;
  Eigen::VectorXd u;

  static LogVars from_plans(const CompressionPlan& delta, const CachePlan& cache, double b_min);
  CompressionPlan delta() const;
  CachePlan cache() const;  // relaxed mode
};

/// Surrogate gain written in log variables. Equals gain_approx(exp tau, exp u).
double transformed_objective(const TreeNetwork& net, const LogVars& x);

struct EnergyParts {
  double processing = 0.0;  // first and repeat processing, signed-coefficient exponentials
  double caching = 0.0;     // w_ca * T per cached bit
  double serving = 0.0;     // (R - 1) * eps_tx per cached bit
  double total() const { return processing + caching + serving; }
};

/// Left side of the energy budget constraint. total() equals the upper-bound
/// energy of (exp tau, exp u).
EnergyParts transformed_energy_lhs(const TreeNetwork& net, const GlobalParams& globals, const LogVars& x);

/// Bits cached at node v.
double transformed_cache_lhs(const TreeNetwork& net, const LogVars& x, NodeId v);

struct SolverSettings {
  double tolerance = 1e-3;  // relative to max(1, L^u)
  int max_outer_iterations = 50;
  int max_inner_iterations = 500;  // projected-gradient steps per penalty round
  int max_penalty_rounds = 40;
  double initial_penalty = 10.0;
  double feasibility_tol = 1e-9;  // relative, for accepting a compression step
  std::uint64_t seed = 1;
  double b_min = 1e-6;
};

void validate(const SolverSettings& s);

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  double max_violation = 0.0;
  int inner_iterations = 0;
};

struct SolveTrace {
  std::vector<TraceRow> rows;  // row 0 is the initial point
  bool converged = false;
  int iterations = 0;
};

/// CSV with header iteration,objective,max_violation,inner_iterations.
std::string to_csv(const SolveTrace& trace);

struct MasterSlaveResult {
  CompressionPlan delta;
  CachePlan cache;  // relaxed
  SolveTrace trace;
};

/// Thrown when the outer iteration cap is hit; carries the best iterate.
class NonConvergenceError : public Error {
 public:
  explicit NonConvergenceError(MasterSlaveResult best)
      : Error(ErrorCode::NonConvergence, "outer iteration cap reached"), best_(std::move(best)) {}
  const MasterSlaveResult& best() const { return best_; }

 private:
  MasterSlaveResult best_;
};

/// Random rates, repaired onto the energy budget, with no caching.
/// Throws Infeasible when no repair succeeds.
CompressionPlan initial_compression(const TreeNetwork& net, const GlobalParams& globals, const SolverSettings& settings);

/// Caching step with rates fixed. Under the one-copy constraint the surrogate
/// is linear in b, so this is an LP solved exactly. Throws Infeasible if the
/// rates alone exceed the energy budget.
CachePlan solve_caching_subproblem(const TreeNetwork& net, const GlobalParams& globals, const CompressionPlan& delta,
                                   const SolverSettings& settings = {});

struct CompressionStep {
  CompressionPlan delta;
  int inner_iterations = 0;
  bool degenerate = false;  // surrogate independent of the rates
};

/// Compression step with caching fixed: minimises the surrogate latency over
/// tau in the box subject to energy and cache constraints, starting from the
/// feasible `start`. Only returns a point that is feasible and no worse than
/// `start`.
CompressionStep solve_compression_subproblem(const TreeNetwork& net, const GlobalParams& globals,
                                             const CachePlan& cache, const CompressionPlan& start,
                                             const SolverSettings& settings = {});

/// Same, starting from delta = 1 (or the repaired random start if that is
/// infeasible).
CompressionPlan solve_compression_subproblem(const TreeNetwork& net, const GlobalParams& globals,
                                             const CachePlan& cache, const SolverSettings& settings = {});

/// Alternates caching and compression steps until the surrogate changes by
/// less than tolerance * max(1, L^u). Throws Infeasible or NonConvergenceError.
MasterSlaveResult solve_master_slave(const TreeNetwork& net, const GlobalParams& globals,
                                     const SolverSettings& settings = {});

}  // namespace jcc
