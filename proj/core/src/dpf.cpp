#include "dps/dpf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace dps {

ExactPotential exact_dpf(const ToyModel& model, const Prompt& prompt,
                         std::uint64_t cap) {
  const auto entries = enumerate_sequences(model, prompt, cap);
  // Enumeration is in lexicographic order; replacing only on a strictly
  // greater score keeps the lexicographically smallest sequence among ties.
  const std::pair<TokenSequence, double>* best1 = nullptr;
  const std::pair<TokenSequence, double>* best2 = nullptr;
  for (const auto& entry : entries) {
    if (entry.second == -std::numeric_limits<double>::infinity()) continue;
    if (best1 == nullptr || entry.second > best1->second) {
      best2 = best1;
      best1 = &entry;
    } else if (best2 == nullptr || entry.second > best2->second) {
      best2 = &entry;
    }
  }
  if (best2 == nullptr) {
    throw DegenerateModel("fewer than 2 sequences with nonzero probability");
  }
  ExactPotential exact;
  exact.top1 = best1->first;
  exact.top2 = best2->first;
  exact.delta_inf = best1->second - best2->second;
  exact.phi_inf = exact.delta_inf * exact.delta_inf;
  exact.space_size = sequence_space_size(model, cap);
  return exact;
}

SampleSet draw_sample_set(const ToyModel& model, const Prompt& prompt, int k,
                          const SamplerConfig& cfg, std::uint64_t seed) {
  if (k < 2) throw DomainError("sample set needs k >= 2");
  SampleSet set;
  set.prompt = prompt;
  set.k = k;
  set.seed = seed;
  set.sampler = cfg;
  set.draws.reserve(static_cast<std::size_t>(k));
  for (int draw = 0; draw < k; ++draw) {
    RngStream stream = substream(seed, {static_cast<std::uint64_t>(draw)});
    SequenceSample sample = sample_sequence(model, prompt, cfg, stream);
    set.distinct.emplace(sample.seq, sample.logprob);
    set.draws.push_back(std::move(sample));
  }
  return set;
}

PotentialEstimate k_dpf(const SampleSet& set) {
  double min_lp = std::numeric_limits<double>::infinity();
  for (const SequenceSample& s : set.draws) min_lp = std::min(min_lp, s.logprob);
  return estimate_from_distinct(set.distinct, min_lp, set.k);
}

double epsilon_tail(double p_top1, std::int64_t k) {
  if (!(p_top1 > 0.0) || p_top1 > 1.0) {
    throw DomainError("epsilon_tail requires p_top1 in (0, 1]");
  }
  if (k < 1) throw DomainError("epsilon_tail requires k >= 1");
  return std::pow(1.0 - p_top1, static_cast<double>(k));
}

double absolute_error_bound(double r_k, std::int64_t k, double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw DomainError("absolute_error_bound requires delta in (0, 1)");
  }
  if (r_k < 0.0) throw DomainError("absolute_error_bound requires r_k >= 0");
  if (k < 1) throw DomainError("absolute_error_bound requires k >= 1");
  return 2.0 * r_k * r_k *
         std::sqrt(std::log(4.0 / delta) / (2.0 * static_cast<double>(k)));
}

double expected_error_bound(double r_k, std::int64_t k, double eps_tail) {
  if (r_k < 0.0) throw DomainError("expected_error_bound requires r_k >= 0");
  if (k < 1) throw DomainError("expected_error_bound requires k >= 1");
  if (eps_tail < 0.0 || eps_tail > 1.0) {
    throw DomainError("expected_error_bound requires eps_tail in [0, 1]");
  }
  return 2.0 * r_k * r_k * std::sqrt(2.0 * std::numbers::pi / static_cast<double>(k)) +
         4.0 * r_k * r_k * eps_tail;
}

double concentration_tail_bound(double r_k, std::int64_t k, double lambda,
                                double eps_tail) {
  if (!(lambda > 0.0)) throw DomainError("concentration_tail_bound requires lambda > 0");
  if (!(r_k > 0.0)) throw DomainError("concentration_tail_bound requires r_k > 0");
  if (k < 1) throw DomainError("concentration_tail_bound requires k >= 1");
  if (eps_tail < 0.0 || eps_tail > 1.0) {
    throw DomainError("concentration_tail_bound requires eps_tail in [0, 1]");
  }
  const double r2 = r_k * r_k;
  return 4.0 * std::exp(-static_cast<double>(k) * lambda * lambda / (2.0 * r2 * r2)) +
         2.0 * eps_tail;
}

bool check_gap_assumption(const ExactPotential& exact,
                          const PotentialEstimate& est) {
  return exact.delta_inf <= est.r_k;
}

BoundReport make_bound_report(double r_k, double eps_tail, std::int64_t k,
                              double delta, std::span<const double> lambdas) {
  BoundReport report;
  report.delta = delta;
  report.abs_bound = absolute_error_bound(r_k, k, delta);
  report.abs_confidence = 1.0 - delta - 2.0 * eps_tail;
  report.expected_bound = expected_error_bound(r_k, k, eps_tail);
  for (double lambda : lambdas) {
    report.tail_bounds.emplace(lambda,
                               concentration_tail_bound(r_k, k, lambda, eps_tail));
  }
  return report;
}

}  // namespace dps
