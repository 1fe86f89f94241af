#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dps/errors.hpp"
#include "dps/rng.hpp"

/**
 * Autoregressive sequence-model abstraction and the toy models used for
 * desk-scale verification.
 *
 * A model emits exactly gen_len tokens from a vocabulary of size vocab_size;
 * there is no end-of-sequence token, so the output space is the full
 * vocab_size^gen_len grid and can be enumerated exactly when small. Three
 * kinds are supported:
 *
 *   iid        one step distribution applied at every position, optionally
 *              overridden per prompt key;
 *   markov     an initial distribution plus a row-stochastic transition
 *              table conditioned on the previous token;
 *   analytic2d a two-sequence, single-step model whose log-likelihood gap is
 *              alpha * (u - v) for prompt coordinates (u, v), giving a known
 *              closed-form potential surface.
 *
 * All log-probabilities are natural logs (nats). Scoring is always done
 * against the true model; sampler modifications (temperature, nucleus
 * clipping) affect which tokens get drawn, never the reported score.
 */

namespace dps {

using Token = std::int32_t;
using TokenSequence = std::vector<Token>;
using ProbVector = std::vector<double>;

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

struct Prompt {
  std::string key = "default";
  std::optional<std::array<double, 2>> coords;  // used by analytic2d and surfaces
};

struct SamplerConfig {
  double temperature = 1.0;
  double top_p = 0.9;
  int max_resample_attempts = 0;  // redraw budget when a sample set is degenerate
};

enum class ModelKind { Iid, Markov, Analytic2d };

struct ToyModel {
  ModelKind kind = ModelKind::Iid;
  int vocab_size = 0;
  int gen_len = 0;
  ProbVector step_probs;                             // iid default table
  std::map<std::string, ProbVector> prompt_tables;   // iid per-prompt overrides
  ProbVector init_probs;                             // markov initial row
  std::vector<ProbVector> transition;                // markov V x V rows
  double alpha = 0.0;                                // analytic2d slope
};

struct SequenceSample {
  TokenSequence seq;
  double logprob = 0.0;  // true-model score, never sampler-modified
};

// Loads and validates a model from JSON. Rows whose sums deviate from 1 by
// at most 1e-6 are renormalized; larger deviations are rejected.
ToyModel load_toy_model(const std::filesystem::path& path);
ToyModel parse_toy_model(const std::string& json_text);

// Next-token distribution given a (possibly empty) prefix.
ProbVector conditional_distribution(const ToyModel& model, const Prompt& prompt,
                                    const TokenSequence& prefix);

// Sum of per-step log-probabilities of a full-length sequence, in nats.
// Independent of any SamplerConfig.
double score_sequence(const ToyModel& model, const Prompt& prompt,
                      const TokenSequence& seq);

// Keeps the smallest set of highest-probability tokens whose cumulative mass
// reaches top_p, zeroes the rest, renormalizes. Ties in probability are
// broken toward the lower token id. top_p == 1 is the identity.
ProbVector nucleus_filter(const ProbVector& dist, double top_p);

// Ancestral sampling: per step, temperature scaling (p^(1/T), renormalized)
// then nucleus filtering, then one draw from the stream. The returned
// logprob is the true model score of the drawn sequence.
SequenceSample sample_sequence(const ToyModel& model, const Prompt& prompt,
                               const SamplerConfig& cfg, RngStream& stream);

// Saturating vocab_size^gen_len: values above cap come back as cap + 1.
std::uint64_t sequence_space_size(const ToyModel& model,
                                  std::uint64_t cap = kDefaultEnumerationCap);

inline bool space_enumerable(const ToyModel& model,
                             std::uint64_t cap = kDefaultEnumerationCap) {
  return sequence_space_size(model, cap) <= cap;
}

// All vocab_size^gen_len sequences with true log-scores, in lexicographic
// token order. Sequences through a zero-probability step carry -infinity.
// Throws SpaceTooLarge above cap; exp(logprob) sums to 1 within 1e-9.
std::vector<std::pair<TokenSequence, double>> enumerate_sequences(
    const ToyModel& model, const Prompt& prompt,
    std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace dps
