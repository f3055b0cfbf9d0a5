#pragma once

#include <vector>

#include "jcc/relax.hpp"

namespace jcc {

/// Values within this distance of 0 or 1 count as integral.
inline constexpr double kIntegralTol = 1e-9;

struct RoundingLog {
  std::vector<double> gains;           // exact gain before the first step and after each step
  std::vector<int> fractional_counts;  // fractional entries remaining, same indexing
  std::vector<double> copy_sums;       // sum of b over leaf k after each step touching k
  std::vector<double> copy_sums_before;
  int steps = 0;
  int forced_drops = 0;  // neither pipage endpoint fitted the caches
};

/// Pipage rounding of a relaxed cache plan with rates fixed. Within each
/// leaf, the two fractional entries closest to the sink trade mass until one
/// is integral; the endpoint with the larger exact gain is kept among those
/// that fit the caches (ties move mass toward the sink). A last fractional
/// entry becomes 1 if it fits, else 0. Throws InfeasibleInput if the input
/// breaks the relaxed constraints by more than 1e-6 relative.
CachePlan pipage_round(const TreeNetwork& net, const GlobalParams& globals, const CompressionPlan& delta,
                       const CachePlan& cache, RoundingLog* log = nullptr);

struct GainProfile {
  std::vector<double> epsilon;
  std::vector<double> gain;
};

/// Exact gain along b_{k,j} - eps, b_{k,l} + eps for `samples` evenly spaced
/// eps in [eps_lo, eps_hi]. Throws RangeExceedsBox if an end leaves [0, 1].
GainProfile epsilon_gain_profile(const TreeNetwork& net, const CompressionPlan& delta, const CachePlan& cache,
                                 LeafIndex k, int j, int l, double eps_lo, double eps_hi, int samples);

struct PipelineResult {
  Solution solution;
  SolveTrace trace;
  double relaxed_gain = 0.0;         // exact gain of the relaxed plan
  double relaxed_gain_approx = 0.0;  // surrogate of the relaxed plan
  double rounded_gain = 0.0;         // right after rounding, before any repair
  bool energy_repaired = false;
};

/// Master-slave relaxation, pipage rounding, then an energy re-check. If the
/// rounded plan breaks the budget, rates are moved along the segments toward
/// delta_min and toward 1 (best feasible point kept) and, failing that,
/// copies are dropped cheapest first. A final compression step with the
/// binary plan fixed can only raise the gain.
PipelineResult round_full_pipeline(const TreeNetwork& net, const GlobalParams& globals,
                                   const SolverSettings& settings = {});

}  // namespace jcc
