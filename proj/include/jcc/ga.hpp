#pragma once

#include <cstdint>
#include <vector>

#include "jcc/cost.hpp"

namespace jcc {

struct GaSettings {
  int population = 60;
  int generations = 150;
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;   // per gene
  double mutation_sigma = 1.0;  // std dev of the log-rate step
  int tournament = 3;
  int elite = 2;
  double penalty = 10.0;  // per unit of relative constraint violation
  std::uint64_t seed = 1;
};

void validate(const GaSettings& s);

struct GaResult {
  Solution solution;
  std::vector<double> best_fitness;  // best fitness seen so far, per generation
  int evaluations = 0;
};

/// Genetic search over (cache position per leaf, log rate per entry). Fitness
/// is gain / L^u minus penalty * max relative violation. Returns the best
/// feasible individual ever evaluated; throws Infeasible if none was.
GaResult ga_solve(const TreeNetwork& net, const GlobalParams& globals, const GaSettings& settings = {});

}  // namespace jcc
