#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "dps/errors.hpp"
#include "dps/seqmodel.hpp"

/**
 * Decision potential: exact oracle, K-grained estimator, and error bounds.
 *
 * The decision potential of an input is the squared gap between the log
 * likelihoods of the two most probable output sequences. The oracle computes
 * it by exhaustive enumeration; the estimator replaces the population top-2
 * with the top-2 distinct sequences among K i.i.d. draws, re-scored by the
 * true model. Whenever both population leaders land in the draw (event A),
 * the estimate equals the oracle bitwise, because both routes share the same
 * scoring path.
 *
 * Error control around the estimate:
 *   r_k        log-likelihood diameter of the draw: top-1 score minus the
 *              minimum sampled score;
 *   r_k_local  sharper local gap: top-1 minus the third-best distinct score,
 *              absent when fewer than three distinct sequences were drawn;
 *   eps_tail   (1 - P(sample top-1))^K, the chance the true best sequence
 *              was never drawn;
 *   bounds     Hoeffding-style absolute deviation at confidence 1 - delta -
 *              2 eps_tail, an expected-deviation bound, and an exponential
 *              tail bound per threshold lambda. Bounds are returned raw and
 *              may exceed 1 where they are vacuous; clamping is left to
 *              presentation.
 */

namespace dps {

struct ExactPotential {
  double phi_inf = 0.0;
  double delta_inf = 0.0;
  TokenSequence top1;
  TokenSequence top2;
  std::uint64_t space_size = 0;
};

struct SampleSet {
  Prompt prompt;
  int k = 0;  // requested draw count
  std::vector<SequenceSample> draws;
  std::map<TokenSequence, double> distinct;
  std::uint64_t seed = 0;
  SamplerConfig sampler;
};

// Estimate over draws keyed by Key: token sequences for toy models, token
// strings for remote models. Ties in logprob break toward the smaller key.
template <typename Key>
struct BasicEstimate {
  double phi_k = 0.0;
  double delta_k = 0.0;
  Key top1;
  Key top2;
  double r_k = 0.0;
  std::optional<double> r_k_local;
  double eps_tail = 0.0;
  int distinct_count = 0;
};

using PotentialEstimate = BasicEstimate<TokenSequence>;

struct BoundReport {
  double delta = 0.0;
  double abs_bound = 0.0;
  double abs_confidence = 0.0;  // 1 - delta - 2 eps_tail
  double expected_bound = 0.0;
  std::map<double, double> tail_bounds;  // lambda -> raw tail bound
};

// Oracle: enumerate, take the top-2 by logprob (ties toward lexicographically
// smaller sequences; the value is unaffected). Throws SpaceTooLarge beyond
// cap and DegenerateModel when fewer than two sequences have positive
// probability.
ExactPotential exact_dpf(const ToyModel& model, const Prompt& prompt,
                         std::uint64_t cap = kDefaultEnumerationCap);

// Exactly k draws through per-draw substreams derived from (seed, draw
// index); deterministic given seed. Degeneracy is detected downstream.
SampleSet draw_sample_set(const ToyModel& model, const Prompt& prompt, int k,
                          const SamplerConfig& cfg, std::uint64_t seed);

// (1 - p_top1)^k.
double epsilon_tail(double p_top1, std::int64_t k);

// 2 r^2 sqrt(ln(4/delta) / (2k)); holds with probability at least
// 1 - delta - 2 eps_tail.
double absolute_error_bound(double r_k, std::int64_t k, double delta);

// 2 r^2 sqrt(2 pi / k) + 4 r^2 eps_tail.
double expected_error_bound(double r_k, std::int64_t k, double eps_tail);

// 4 exp(-k lambda^2 / (2 r^4)) + 2 eps_tail, returned raw (may exceed 1).
double concentration_tail_bound(double r_k, std::int64_t k, double lambda,
                                double eps_tail);

// Diagnostic for the population-gap assumption: delta_inf <= r_k.
bool check_gap_assumption(const ExactPotential& exact,
                          const PotentialEstimate& est);

BoundReport make_bound_report(double r_k, double eps_tail, std::int64_t k,
                              double delta, std::span<const double> lambdas);

// Shared estimator core over a prebuilt distinct map plus the multiset
// minimum. k is the requested draw count (for eps_tail).
template <typename Key>
BasicEstimate<Key> estimate_from_distinct(const std::map<Key, double>& distinct,
                                          double min_logprob, int k) {
  if (distinct.size() < 2) {
    throw DegenerateSample("fewer than 2 distinct sequences in the sample; "
                           "k is too small for this prompt's entropy");
  }
  // Top-3 by logprob; map iteration is key-ascending, and promotion requires
  // a strictly greater score, so ties settle on the smaller key.
  const std::pair<const Key, double>* best[3] = {nullptr, nullptr, nullptr};
  for (const auto& entry : distinct) {
    const double lp = entry.second;
    if (best[0] == nullptr || lp > best[0]->second) {
      best[2] = best[1];
      best[1] = best[0];
      best[0] = &entry;
    } else if (best[1] == nullptr || lp > best[1]->second) {
      best[2] = best[1];
      best[1] = &entry;
    } else if (best[2] == nullptr || lp > best[2]->second) {
      best[2] = &entry;
    }
  }
  BasicEstimate<Key> est;
  est.top1 = best[0]->first;
  est.top2 = best[1]->first;
  est.delta_k = best[0]->second - best[1]->second;
  est.phi_k = est.delta_k * est.delta_k;
  est.r_k = best[0]->second - min_logprob;
  if (best[2] != nullptr) est.r_k_local = best[0]->second - best[2]->second;
  est.distinct_count = static_cast<int>(distinct.size());
  est.eps_tail = epsilon_tail(std::exp(best[0]->second), k);
  return est;
}

// K-grained estimate over the distinct sequences of a sample set. Throws
// DegenerateSample when fewer than two distinct sequences were drawn; the
// caller may redraw per SamplerConfig::max_resample_attempts.
PotentialEstimate k_dpf(const SampleSet& set);

}  // namespace dps
