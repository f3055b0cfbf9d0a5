#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "jcc/bench.hpp"
#include "jcc/topology_io.hpp"

using namespace jcc;

namespace {

Scenario load(const std::string& path, const std::optional<std::string>& solver, const std::vector<std::uint64_t>& seeds,
              const std::optional<int>& grid_levels) {
  Scenario s = scenario_from_json(read_json_file(path));
  if (solver) s.solvers = {*solver};
  if (!seeds.empty()) s.seeds = seeds;
  if (grid_levels) s.grid_levels = *grid_levels;
  return s;
}

void print(const std::vector<RunRecord>& records) {
  for (const RunRecord& r : records) {
    std::printf("%-12s %-9s seed %-4llu %-18s gain %.6g%s\n", r.scenario.c_str(), r.solver.c_str(),
                static_cast<unsigned long long>(r.seed), r.status.c_str(), r.objective,
                r.feasible ? "" : " (infeasible)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint compression and cache placement on collection trees"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "write a generated scenario file");
  std::optional<int> depth, shape;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* depth_opt = gen->add_option("--depth", depth, "complete binary tree of this depth (2..5)");
  gen->add_option("--heterogeneous", shape, "heterogeneous tree of 7, 15, 31 or 67 nodes")->excludes(depth_opt);
  gen->add_option("--seed", gen_seed, "generator seed (heterogeneous trees)");
  gen->add_option("--out", gen_out, "scenario file, stdout if omitted");

  auto* run = app.add_subcommand("run", "run solvers and write results.csv, plans and traces");
  std::string scenario_path, out_dir = "results";
  std::optional<std::string> solver;
  std::vector<std::uint64_t> seeds;
  std::optional<int> grid_levels;
  run->add_option("--scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--solver", solver, "run only this solver")
      ->check(CLI::IsMember({"proposed", "greedy", "oracle", "ga"}));
  run->add_option("--seed", seeds, "seeds, overriding the scenario");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--grid-levels", grid_levels, "rate grid of the oracle and greedy solvers");

  auto* sweep = app.add_subcommand("sweep", "gain of the proposed solver against the request count");
  std::vector<int> requests = {200, 400, 600, 800, 1000};
  std::uint64_t sweep_seed = 1;
  sweep->add_option("--scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--requests", requests, "request counts");
  sweep->add_option("--seed", sweep_seed, "solver seed");
  sweep->add_option("--out", out_dir, "output directory for sweep.csv");

  auto* oracle = app.add_subcommand("oracle", "exhaustive reference solution");
  oracle->add_option("--scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  oracle->add_option("--grid-levels", grid_levels, "rate grid levels");
  oracle->add_option("--out", out_dir, "output directory");

  auto* check = app.add_subcommand("check", "re-evaluate every stored plan against results.csv");
  check->add_option("--out", out_dir, "directory holding results.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      if (!depth && !shape) throw CLI::RequiredError("--depth or --heterogeneous");
      const Scenario s = depth ? generate_homogeneous(*depth) : generate_heterogeneous(*shape, gen_seed);
      if (gen_out.empty()) {
        std::cout << to_json(s).dump(2) << '\n';
      } else {
        write_json_file(gen_out, to_json(s));
        std::printf("wrote %s\n", gen_out.c_str());
      }
    } else if (*run) {
      const std::vector<RunRecord> records = run_suite({load(scenario_path, solver, seeds, grid_levels)}, out_dir);
      print(records);
    } else if (*sweep) {
      const Scenario s = load(scenario_path, std::nullopt, {}, std::nullopt);
      const std::vector<SweepPoint> points = sweep_requests(s, requests, sweep_seed);
      std::filesystem::create_directories(out_dir);
      const std::string path = (std::filesystem::path(out_dir) / "sweep.csv").string();
      std::ofstream(path, std::ios::binary) << sweep_csv(points);
      std::cout << sweep_csv(points);
    } else if (*oracle) {
      print(run_suite({load(scenario_path, std::string("oracle"), {}, grid_levels)}, out_dir));
    } else if (*check) {
      const CheckReport report = check_results(out_dir);
      for (const std::string& m : report.mismatches) std::printf("mismatch: %s\n", m.c_str());
      std::printf("%d records checked, %zu mismatches\n", report.checked, report.mismatches.size());
      return report.mismatches.empty() ? 0 : 1;
    }
  } catch (const CLI::Error& e) {
    app.exit(e);
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
