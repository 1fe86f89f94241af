#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dps/dpf.hpp"
#include "dps/seqmodel.hpp"

/**
 * Desk-scale experiment harnesses around the estimator: convergence in K,
 * concentration sweeps over deviation thresholds, and coverage validation of
 * the absolute error bound.
 *
 * All harnesses are fully deterministic: every trial draws through a
 * substream derived from (seed, prompt index, trial index, k index), and
 * rows come out in canonical (prompt, K, trial) order, so identical configs
 * produce byte-identical tables.
 */

namespace dps {

struct ConvergenceRow {
  std::string prompt_id;
  int k = 0;
  int trial = 0;
  double phi_k = 0.0;
  double r_k = 0.0;
  double eps_tail = 0.0;
  double abs_err_vs_ref = 0.0;
  std::string ref_kind;    // "oracle" or "kref"
  bool degenerate = false; // row flagged instead of aborting the run
};

struct ConcentrationRow {
  int k = 0;
  double lambda = 0.0;
  int trials = 0;  // non-degenerate trials entering the tail estimate
  int exceed_count = 0;
  double empirical_tail = 0.0;
  double theoretical_bound = 0.0;  // clamp(tail bound at mean r_k, 1)
};

struct CoverageReport {
  int k = 0;
  double delta = 0.0;
  int trials = 0;
  int covered = 0;
  double coverage = 0.0;
  double guaranteed_level = 0.0;  // 1 - delta - 2 mean(eps_tail)
  double mean_eps_tail = 0.0;
  int degenerate_trials = 0;  // counted as not covered
};

struct ConvergenceConfig {
  std::vector<int> k_list;   // ascending
  int k_ref = 20000;         // reference draw when enumeration is infeasible
  int repeats = 5;
  std::uint64_t seed = 0;
  SamplerConfig sampler;
  std::uint64_t cap = kDefaultEnumerationCap;
};

struct ConcentrationConfig {
  std::vector<int> k_list;
  std::vector<double> lambdas{0.01, 0.05, 0.2, 1.0};
  int trials = 500;
  std::uint64_t seed = 0;
  SamplerConfig sampler;
  std::uint64_t cap = kDefaultEnumerationCap;
};

struct CoverageConfig {
  int k = 64;
  double delta = 0.1;
  int trials = 1000;
  std::uint64_t seed = 0;
  SamplerConfig sampler;
  std::uint64_t cap = kDefaultEnumerationCap;
};

// One row per (prompt, K, trial). The error reference is the exact potential
// when the space is enumerable, otherwise an estimate at k_ref; ref_kind
// records which. Degenerate draws flag their row rather than aborting.
std::vector<ConvergenceRow> run_convergence(const ToyModel& model,
                                            const std::vector<Prompt>& prompts,
                                            const ConvergenceConfig& cfg);

// One row per (K, lambda), pooled over prompts and trials: the empirical
// tail Pr(|phi_k - phi_inf| >= lambda) against the tail bound evaluated at
// the mean r_k and mean eps_tail of the non-degenerate trials, clamped to 1.
// Requires an enumerable model.
std::vector<ConcentrationRow> run_concentration(const ToyModel& model,
                                                const std::vector<Prompt>& prompts,
                                                const ConcentrationConfig& cfg);

// Coverage of the absolute error bound at the per-trial r_k: the fraction of
// trials with |phi_k - phi_inf| within the bound, against the guaranteed
// level 1 - delta - 2 mean(eps_tail). Requires an enumerable model.
CoverageReport validate_bounds(const ToyModel& model,
                               const std::vector<Prompt>& prompts,
                               const CoverageConfig& cfg);

}  // namespace dps
