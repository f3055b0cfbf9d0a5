#include "jcc/bench.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "jcc/greedy.hpp"
#include "jcc/rounding.hpp"
#include "jcc/topology_io.hpp"

namespace jcc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kRefRx = 50e-9, kRefTx = 200e-9, kRefCp = 80e-9;
constexpr double kRefVolume = 100.0, kRefLatency = 0.6, kRefCapacity = 120.0;
constexpr int kRefRequests = 1000;
const GlobalParams kRefGlobals{1.88e-6, 10.0, 200.0};

void check_name(const std::string& name) {
  if (name.empty()) throw Error(ErrorCode::InvalidParameter, "scenario name is empty");
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
      throw Error(ErrorCode::InvalidParameter, "scenario name may only use [A-Za-z0-9_.-]: " + name);
    }
  }
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string run_name(const RunRecord& r) { return r.scenario + "_" + r.solver + "_" + std::to_string(r.seed); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path.string());
  out << text;
}

}  // namespace

json to_json(const Scenario& s) {
  const SolverSettings& st = s.settings;
  const GaSettings& ga = s.ga;
  json j = {{"name", s.name},
            {"topology", to_json(s.topology)},
            {"global", to_json(s.globals)},
            {"solvers", s.solvers},
            {"seeds", s.seeds},
            {"grid_levels", s.grid_levels},
            {"settings",
             {{"tolerance", st.tolerance},
              {"max_outer_iterations", st.max_outer_iterations},
              {"max_inner_iterations", st.max_inner_iterations},
              {"max_penalty_rounds", st.max_penalty_rounds},
              {"initial_penalty", st.initial_penalty},
              {"feasibility_tol", st.feasibility_tol},
              {"b_min", st.b_min}}},
            {"ga",
             {{"population", ga.population},
              {"generations", ga.generations},
              {"crossover_rate", ga.crossover_rate},
              {"mutation_rate", ga.mutation_rate},
              {"mutation_sigma", ga.mutation_sigma},
              {"tournament", ga.tournament},
              {"elite", ga.elite},
              {"penalty", ga.penalty}}}};
  if (!s.generator.is_null()) j["generator"] = s.generator;
  return j;
}

Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    s.name = j.at("name").get<std::string>();
    check_name(s.name);
    s.topology = topology_from_json(j.at("topology"));
    s.globals = globals_from_json(j.at("global"));
    if (j.contains("solvers")) s.solvers = j["solvers"].get<std::vector<std::string>>();
    for (const std::string& solver : s.solvers) {
      if (std::find(kSolvers.begin(), kSolvers.end(), solver) == kSolvers.end()) {
        throw Error(ErrorCode::InvalidParameter, "unknown solver " + solver);
      }
    }
    if (j.contains("seeds")) s.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    s.grid_levels = j.value("grid_levels", s.grid_levels);
    if (j.contains("settings")) {
      const json& st = j["settings"];
      SolverSettings& o = s.settings;
      o.tolerance = st.value("tolerance", o.tolerance);
      o.max_outer_iterations = st.value("max_outer_iterations", o.max_outer_iterations);
      o.max_inner_iterations = st.value("max_inner_iterations", o.max_inner_iterations);
      o.max_penalty_rounds = st.value("max_penalty_rounds", o.max_penalty_rounds);
      o.initial_penalty = st.value("initial_penalty", o.initial_penalty);
      o.feasibility_tol = st.value("feasibility_tol", o.feasibility_tol);
      o.b_min = st.value("b_min", o.b_min);
      validate(o);
    }
    if (j.contains("ga")) {
      const json& g = j["ga"];
      GaSettings& o = s.ga;
      o.population = g.value("population", o.population);
      o.generations = g.value("generations", o.generations);
      o.crossover_rate = g.value("crossover_rate", o.crossover_rate);
      o.mutation_rate = g.value("mutation_rate", o.mutation_rate);
      o.mutation_sigma = g.value("mutation_sigma", o.mutation_sigma);
      o.tournament = g.value("tournament", o.tournament);
      o.elite = g.value("elite", o.elite);
      o.penalty = g.value("penalty", o.penalty);
      validate(o);
    }
    if (j.contains("generator")) s.generator = j["generator"];
    build_tree(s.topology);  // fail early on a malformed topology
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

Scenario generate_homogeneous(int depth) {
  if (depth < 2 || depth > 5) throw Error(ErrorCode::InvalidParameter, "depth must lie in 2..5");
  const NodeParams leaf{kRefRx, kRefTx, kRefCp, kRefCapacity, kRefVolume, kRefRequests};
  Scenario s;
  s.topology = uniform_binary_tree(depth, leaf, kRefLatency).to_spec();
  s.name = "bt" + std::to_string(s.topology.nodes.size());
  s.globals = kRefGlobals;
  s.generator = {{"kind", "homogeneous"}, {"depth", depth}};
  return s;
}

Scenario generate_heterogeneous(int shape, std::uint64_t seed) {
  if (shape != 7 && shape != 15 && shape != 31 && shape != 67) {
    throw Error(ErrorCode::InvalidParameter, "shape must be 7, 15, 31 or 67");
  }
  constexpr double spread = 0.2;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> capacity(100.0, 120.0);
  std::uniform_real_distribution<double> factor(1.0 - spread, 1.0 + spread);
  std::vector<bool> has_child(static_cast<std::size_t>(shape), false);
  for (int v = 1; v < shape; ++v) has_child[static_cast<std::size_t>((v - 1) / 3)] = true;

  Scenario s;
  s.name = "het" + std::to_string(shape) + "_s" + std::to_string(seed);
  for (int v = 0; v < shape; ++v) {
    NodeSpec n;
    n.id = v;
    if (v > 0) n.parent = (v - 1) / 3;
    n.params.cache_capacity = capacity(rng);
    n.params.eps_rx = kRefRx * factor(rng);
    n.params.eps_tx = kRefTx * factor(rng);
    n.params.eps_cp = kRefCp * factor(rng);
    if (!has_child[static_cast<std::size_t>(v)]) {
      n.params.data_volume = kRefVolume;
      n.params.request_count = kRefRequests;
    }
    s.topology.nodes.push_back(n);
  }
  s.topology.default_latency = kRefLatency;
  s.globals = kRefGlobals;
  s.seeds = {seed};
  s.generator = {{"kind", "heterogeneous"},
                 {"shape", shape},
                 {"seed", seed},
                 {"capacity_range", {100.0, 120.0}},
                 {"energy_spread", spread}};
  return s;
}

RunOutput run_one(const Scenario& scenario, const std::string& solver, std::uint64_t seed) {
  RunOutput out;
  RunRecord& r = out.record;
  r.scenario = scenario.name;
  r.solver = solver;
  r.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const TreeNetwork net = build_tree(scenario.topology);
    if (solver == "proposed") {
      SolverSettings settings = scenario.settings;
      settings.seed = seed;
      try {
        PipelineResult p = round_full_pipeline(net, scenario.globals, settings);
        r.iterations = p.trace.iterations;
        out.trace = std::move(p.trace);
        out.solution = std::move(p.solution);
      } catch (const NonConvergenceError& e) {
        out.trace = e.best().trace;
        throw;
      }
    } else if (solver == "greedy") {
      GreedyResult g = greedy_solve(net, scenario.globals, scenario.grid_levels);
      r.iterations = static_cast<int>(g.step_gains.size()) - 1;
      out.solution = std::move(g.solution);
    } else if (solver == "oracle") {
      OracleResult o = brute_force(net, scenario.globals, scenario.grid_levels);
      r.iterations = static_cast<int>(o.configurations_examined);
      out.solution = std::move(o.best_solution);
    } else if (solver == "ga") {
      GaSettings settings = scenario.ga;
      settings.seed = seed;
      GaResult g = ga_solve(net, scenario.globals, settings);
      r.iterations = static_cast<int>(g.best_fitness.size());
      out.solution = std::move(g.solution);
    } else {
      throw Error(ErrorCode::InvalidParameter, "unknown solver " + solver);
    }
    // Trust nothing: the reported objective is recomputed from the plan.
    r.objective = gain(net, out.solution->delta, out.solution->cache);
    r.feasible = check_feasibility(net, scenario.globals, out.solution->delta, out.solution->cache).feasible;
  } catch (const Error& e) {
    r.status = std::string(to_string(e.code()));
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string results_csv(const std::vector<RunRecord>& records) {
  std::string csv = "scenario,solver,seed,objective,iterations,feasible,status\n";
  for (const RunRecord& r : records) {
    csv += r.scenario + ',' + r.solver + ',' + std::to_string(r.seed) + ',' + format_double(r.objective) + ',' +
           std::to_string(r.iterations) + ',' + (r.feasible ? "1" : "0") + ',' + r.status + '\n';
  }
  return csv;
}

std::string timings_csv(const std::vector<RunRecord>& records) {
  std::string csv = "scenario,solver,seed,wall_seconds\n";
  for (const RunRecord& r : records) {
    csv += r.scenario + ',' + r.solver + ',' + std::to_string(r.seed) + ',' + format_double(r.wall_seconds) + '\n';
  }
  return csv;
}

std::vector<RunRecord> run_suite(const std::vector<Scenario>& scenarios, const std::string& out_dir) {
  const fs::path root(out_dir);
  fs::create_directories(root / "plans");
  std::vector<RunRecord> records;
  for (const Scenario& scenario : scenarios) {
    check_name(scenario.name);
    for (const std::string& solver : scenario.solvers) {
      for (std::uint64_t seed : scenario.seeds) {
        RunOutput out = run_one(scenario, solver, seed);
        const std::string name = run_name(out.record);
        if (out.solution) {
          json plan = {{"topology", to_json(scenario.topology)},
                       {"global", to_json(scenario.globals)},
                       {"objective", out.record.objective},
                       {"delta", to_json(out.solution->delta)},
                       {"cache", to_json(out.solution->cache)}};
          write_json_file((root / "plans" / (name + ".json")).string(), plan);
        }
        if (out.trace) write_text(root / ("trace_" + name + ".csv"), to_csv(*out.trace));
        records.push_back(std::move(out.record));
      }
    }
  }
  write_text(root / "results.csv", results_csv(records));
  write_text(root / "timings.csv", timings_csv(records));
  return records;
}

std::vector<SweepPoint> sweep_requests(const Scenario& scenario, const std::vector<int>& r_values,
                                       std::uint64_t seed) {
  if (r_values.empty()) throw Error(ErrorCode::InvalidParameter, "no request values given");
  std::vector<SweepPoint> points;
  for (int requests : r_values) {
    if (requests < 1) throw Error(ErrorCode::InvalidParameter, "request counts must be >= 1");
    Scenario s = scenario;
    for (NodeSpec& n : s.topology.nodes) {
      if (n.params.request_count > 0) n.params.request_count = requests;
    }
    const RunOutput out = run_one(s, "proposed", seed);
    points.push_back({requests, out.record.objective, out.record.feasible});
  }
  return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string csv = "R,gain,feasible\n";
  for (const SweepPoint& p : points) {
    csv += std::to_string(p.requests) + ',' + format_double(p.gain) + ',' + (p.feasible ? "1" : "0") + '\n';
  }
  return csv;
}

CheckReport check_results(const std::string& out_dir) {
  const fs::path root(out_dir);
  std::ifstream in(root / "results.csv");
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + (root / "results.csv").string());
  CheckReport report;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 7) throw Error(ErrorCode::ParseError, "bad results row: " + line);
    const fs::path plan_path = root / "plans" / (f[0] + "_" + f[1] + "_" + f[2] + ".json");
    if (!fs::exists(plan_path)) {
      if (f[6] == "ok") report.mismatches.push_back(line + " (plan missing)");
      continue;
    }
    const json plan = read_json_file(plan_path.string());
    const TreeNetwork net = build_tree(topology_from_json(plan.at("topology")));
    const GlobalParams g = globals_from_json(plan.at("global"));
    const CompressionPlan delta = compression_plan_from_json(plan.at("delta"));
    const CachePlan cache = cache_plan_from_json(plan.at("cache"));
    const double recomputed = gain(net, delta, cache);
    const double reported = std::stod(f[3]);
    const bool feasible = check_feasibility(net, g, delta, cache).feasible;
    ++report.checked;
    if (std::abs(recomputed - reported) > 1e-9 * std::max(1.0, std::abs(recomputed)) || feasible != (f[5] == "1")) {
      report.mismatches.push_back(line + " (recomputed " + format_double(recomputed) + ")");
    }
  }
  return report;
}

}  // namespace jcc
