#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jcc/ga.hpp"
#include "jcc/oracle.hpp"
#include "jcc/relax.hpp"

namespace jcc {

inline const std::vector<std::string> kSolvers = {"proposed", "greedy", "oracle", "ga"};

struct Scenario {
  std::string name;
  TopologySpec topology;
  GlobalParams globals;
  std::vector<std::string> solvers = kSolvers;
  std::vector<std::uint64_t> seeds = {1};
  int grid_levels = kDefaultGridLevels;
  SolverSettings settings;
  GaSettings ga;
  // Bookkeeping for generated scenarios, e.g. the energy perturbation range.
  nlohmann::json generator;
};

// Scenario file: {"name", "topology", "global", "solvers", "seeds",
// "grid_levels", "settings": {...}, "ga": {...}, "generator": {...}}.
// Everything except name, topology and global is optional.
nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

/// Complete binary tree of the given depth (2..5) with the reference
/// parameters: y = 100, R = 1000, S = 120, W = 200, l = 0.6,
/// eps_rx = 50e-9, eps_tx = 200e-9, eps_cp = 80e-9, w_ca = 1.88e-6, T = 10.
Scenario generate_homogeneous(int depth);

/// Tree of 7, 15, 31 or 67 nodes where node i hangs below (i - 1) / 3. Cache
/// capacities are drawn from [100, 120] and each energy coefficient from
/// +-20 % around the reference value; deterministic per seed.
Scenario generate_heterogeneous(int shape, std::uint64_t seed);

struct RunRecord {
  std::string scenario;
  std::string solver;
  std::uint64_t seed = 0;
  double objective = 0.0;  // exact gain of the returned plan, 0 without one
  double wall_seconds = 0.0;
  int iterations = 0;
  bool feasible = false;
  std::string status = "ok";  // ok or an error code
};

struct RunOutput {
  RunRecord record;
  std::optional<Solution> solution;
  std::optional<SolveTrace> trace;
};

/// One solver on one scenario. Errors become records.
RunOutput run_one(const Scenario& scenario, const std::string& solver, std::uint64_t seed);

/// Runs every (scenario, solver, seed) in that order and writes
/// results.csv, timings.csv, plans/<run>.json and trace_<run>.csv (proposed
/// solver) under out_dir, <run> being scenario_solver_seed.
std::vector<RunRecord> run_suite(const std::vector<Scenario>& scenarios, const std::string& out_dir);

/// results.csv: scenario,solver,seed,objective,iterations,feasible,status.
/// Wall times live in timings.csv so that results.csv is reproducible.
std::string results_csv(const std::vector<RunRecord>& records);
std::string timings_csv(const std::vector<RunRecord>& records);

struct SweepPoint {
  int requests = 0;
  double gain = 0.0;
  bool feasible = false;
};

/// Proposed pipeline with every leaf's request count set to each value.
std::vector<SweepPoint> sweep_requests(const Scenario& scenario, const std::vector<int>& r_values,
                                       std::uint64_t seed);
std::string sweep_csv(const std::vector<SweepPoint>& points);

struct CheckReport {
  int checked = 0;
  std::vector<std::string> mismatches;  // one line per failed record
};

/// Re-evaluates every record of <out_dir>/results.csv that has a stored plan
/// (plans carry their own topology and globals).
CheckReport check_results(const std::string& out_dir);

}  // namespace jcc
