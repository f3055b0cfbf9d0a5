#include "jcc/ga.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

namespace jcc {

void validate(const GaSettings& s) {
  if (s.population < 2) throw Error(ErrorCode::InvalidParameter, "population must be >= 2");
  if (s.generations < 1) throw Error(ErrorCode::InvalidParameter, "generations must be >= 1");
  auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate(s.crossover_rate) || !rate(s.mutation_rate)) throw Error(ErrorCode::InvalidParameter, "rates must lie in [0, 1]");
  if (s.tournament < 1 || s.elite < 0 || s.elite > s.population) {
    throw Error(ErrorCode::InvalidParameter, "bad tournament or elite size");
  }
  if (!(s.mutation_sigma >= 0.0) || !(s.penalty >= 0.0)) throw Error(ErrorCode::InvalidParameter, "negative sigma or penalty");
}

namespace {

struct Individual {
  std::vector<int> pos;  // -1 = no copy
  Eigen::VectorXd tau;   // log rates
  double fitness = 0.0;
  bool feasible = false;
  double gain = 0.0;
};

}  // namespace

GaResult ga_solve(const TreeNetwork& net, const GlobalParams& globals, const GaSettings& s) {
  validate(s);
  validate(globals);
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> step(0.0, s.mutation_sigma);
  const double lower = std::log(kDeltaMin);
  const double lu = std::max(1.0, latency_upper_bound(net));
  const std::size_t leaves = static_cast<std::size_t>(net.num_leaves());
  const Index n = net.plan_size();

  auto random_position = [&](std::size_t k) {
    return std::uniform_int_distribution<int>(-1, net.height(static_cast<LeafIndex>(k)))(rng);
  };
  auto plans = [&](const Individual& ind) {
    return std::make_pair(CompressionPlan{ind.tau.array().exp().matrix().cwiseMax(kDeltaMin).cwiseMin(1.0)},
                          CachePlan::at_positions(net, ind.pos));
  };

  GaResult result;
  std::optional<Individual> best_feasible;
  auto evaluate = [&](Individual& ind) {
    const auto [delta, cache] = plans(ind);
    const FeasibilityReport f = check_feasibility(net, globals, delta, cache);
    ind.gain = gain(net, delta, cache);
    ind.feasible = f.feasible;
    ind.fitness = ind.gain / lu - s.penalty * std::min(f.max_violation, 1e6);
    ++result.evaluations;
    if (ind.feasible && (!best_feasible || ind.gain > best_feasible->gain)) best_feasible = ind;
  };

  std::vector<Individual> pop(static_cast<std::size_t>(s.population));
  for (Individual& ind : pop) {
    ind.pos.resize(leaves);
    for (std::size_t k = 0; k < leaves; ++k) ind.pos[k] = random_position(k);
    ind.tau.resize(n);
    for (Index e = 0; e < n; ++e) ind.tau[e] = lower * unit(rng);
    evaluate(ind);
  }

  auto by_fitness = [](const Individual& a, const Individual& b) { return a.fitness > b.fitness; };
  auto tournament = [&]() -> const Individual& {
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, pop.size() - 1)(rng);
    for (int t = 1; t < s.tournament; ++t) {
      const std::size_t other = std::uniform_int_distribution<std::size_t>(0, pop.size() - 1)(rng);
      if (pop[other].fitness > pop[pick].fitness) pick = other;
    }
    return pop[pick];
  };

  double best_so_far = -HUGE_VAL;
  for (int gen = 0; gen < s.generations; ++gen) {
    std::stable_sort(pop.begin(), pop.end(), by_fitness);
    best_so_far = std::max(best_so_far, pop.front().fitness);
    result.best_fitness.push_back(best_so_far);
    if (gen + 1 == s.generations) break;

    std::vector<Individual> next(pop.begin(), pop.begin() + s.elite);
    while (next.size() < pop.size()) {
      Individual child = tournament();
      const Individual& other = tournament();
      if (unit(rng) < s.crossover_rate) {
        for (std::size_t k = 0; k < leaves; ++k) {
          if (unit(rng) < 0.5) child.pos[k] = other.pos[k];
        }
        for (Index e = 0; e < n; ++e) {
          if (unit(rng) < 0.5) child.tau[e] = other.tau[e];
        }
      }
      for (std::size_t k = 0; k < leaves; ++k) {
        if (unit(rng) < s.mutation_rate) child.pos[k] = random_position(k);
      }
      for (Index e = 0; e < n; ++e) {
        if (unit(rng) < s.mutation_rate) child.tau[e] = std::clamp(child.tau[e] + step(rng), lower, 0.0);
      }
      evaluate(child);
      next.push_back(std::move(child));
    }
    pop = std::move(next);
  }

  if (!best_feasible) throw Error(ErrorCode::Infeasible, "no feasible individual found");
  auto [delta, cache] = plans(*best_feasible);
  result.solution = make_solution(net, globals, std::move(delta), std::move(cache));
  return result;
}

}  // namespace jcc
