#include "dps/seqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace dps {

namespace {

using nlohmann::json;

constexpr double kRowSumTolerance = 1e-6;

// Validates one distribution row in place: correct width, nonnegative finite
// entries, sum within kRowSumTolerance of 1 (then renormalized).
void validate_row(ProbVector& row, int vocab_size, const std::string& what) {
  if (static_cast<int>(row.size()) != vocab_size) {
    throw InvalidShape(what + ": expected " + std::to_string(vocab_size) +
                       " entries, got " + std::to_string(row.size()));
  }
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0) {
      throw InvalidDistribution(what + ": entries must be finite and nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    throw InvalidDistribution(what + ": row sums to " + std::to_string(sum));
  }
  for (double& p : row) p /= sum;
}

ProbVector read_row(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array of numbers");
  ProbVector row;
  row.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number()) throw ParseError(what + ": expected an array of numbers");
    row.push_back(e.get<double>());
  }
  return row;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

const ProbVector& iid_table(const ToyModel& model, const Prompt& prompt) {
  auto it = model.prompt_tables.find(prompt.key);
  return it == model.prompt_tables.end() ? model.step_probs : it->second;
}

}  // namespace

ToyModel parse_toy_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model JSON must be an object");

  ToyModel model;
  if (!doc.contains("kind") || !doc["kind"].is_string()) {
    throw ParseError("model JSON requires a string \"kind\"");
  }
  const std::string kind = doc["kind"].get<std::string>();
  if (kind == "iid") {
    model.kind = ModelKind::Iid;
  } else if (kind == "markov") {
    model.kind = ModelKind::Markov;
  } else if (kind == "analytic2d") {
    model.kind = ModelKind::Analytic2d;
  } else {
    throw ParseError("unknown model kind \"" + kind + "\"");
  }

  // Whitelist of fields per kind; anything else is rejected.
  const std::map<std::string, std::vector<std::string>> allowed = {
      {"iid", {"kind", "vocab_size", "gen_len", "step_probs", "prompt_tables"}},
      {"markov", {"kind", "vocab_size", "gen_len", "init_probs", "transition"}},
      {"analytic2d", {"kind", "vocab_size", "gen_len", "alpha"}},
  };
  const auto& fields = allowed.at(kind);
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::find(fields.begin(), fields.end(), key) == fields.end()) {
      throw ParseError("unknown field \"" + key + "\" for kind \"" + kind + "\"");
    }
  }

  auto read_int = [&doc](const char* name, int fallback) {
    if (!doc.contains(name)) return fallback;
    if (!doc[name].is_number_integer()) {
      throw ParseError(std::string(name) + " must be an integer");
    }
    return doc[name].get<int>();
  };

  if (model.kind == ModelKind::Analytic2d) {
    // Fixed shape: two sequences of length one.
    model.vocab_size = read_int("vocab_size", 2);
    model.gen_len = read_int("gen_len", 1);
    if (model.vocab_size != 2 || model.gen_len != 1) {
      throw InvalidShape("analytic2d requires vocab_size=2 and gen_len=1");
    }
    if (!doc.contains("alpha") || !doc["alpha"].is_number()) {
      throw ParseError("analytic2d requires a numeric \"alpha\"");
    }
    model.alpha = doc["alpha"].get<double>();
    if (!std::isfinite(model.alpha)) throw ParseError("alpha must be finite");
    return model;
  }

  model.vocab_size = read_int("vocab_size", 0);
  model.gen_len = read_int("gen_len", 0);
  if (model.vocab_size < 2) throw InvalidShape("vocab_size must be at least 2");
  if (model.gen_len < 1) throw InvalidShape("gen_len must be at least 1");

  if (model.kind == ModelKind::Iid) {
    if (!doc.contains("step_probs")) throw ParseError("iid requires \"step_probs\"");
    model.step_probs = read_row(doc["step_probs"], "step_probs");
    validate_row(model.step_probs, model.vocab_size, "step_probs");
    if (doc.contains("prompt_tables")) {
      if (!doc["prompt_tables"].is_object()) {
        throw ParseError("prompt_tables must be an object of key -> row");
      }
      for (const auto& [key, value] : doc["prompt_tables"].items()) {
        ProbVector row = read_row(value, "prompt_tables[" + key + "]");
        validate_row(row, model.vocab_size, "prompt_tables[" + key + "]");
        model.prompt_tables.emplace(key, std::move(row));
      }
    }
    return model;
  }

  // markov
  if (!doc.contains("init_probs")) throw ParseError("markov requires \"init_probs\"");
  if (!doc.contains("transition")) throw ParseError("markov requires \"transition\"");
  model.init_probs = read_row(doc["init_probs"], "init_probs");
  validate_row(model.init_probs, model.vocab_size, "init_probs");
  if (!doc["transition"].is_array() ||
      static_cast<int>(doc["transition"].size()) != model.vocab_size) {
    throw InvalidShape("transition must have vocab_size rows");
  }
  model.transition.reserve(model.vocab_size);
  for (int r = 0; r < model.vocab_size; ++r) {
    ProbVector row = read_row(doc["transition"][r], "transition[" + std::to_string(r) + "]");
    validate_row(row, model.vocab_size, "transition[" + std::to_string(r) + "]");
    model.transition.push_back(std::move(row));
  }
  return model;
}

ToyModel load_toy_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toy_model(buf.str());
}

ProbVector conditional_distribution(const ToyModel& model, const Prompt& prompt,
                                    const TokenSequence& prefix) {
  if (static_cast<int>(prefix.size()) >= model.gen_len) {
    throw PrefixTooLong("prefix length " + std::to_string(prefix.size()) +
                        " not below gen_len " + std::to_string(model.gen_len));
  }
  switch (model.kind) {
    case ModelKind::Iid:
      return iid_table(model, prompt);
    case ModelKind::Markov:
      if (prefix.empty()) return model.init_probs;
      return model.transition.at(static_cast<std::size_t>(prefix.back()));
    case ModelKind::Analytic2d: {
      if (!prompt.coords) {
        throw DomainError("analytic2d requires prompt coordinates (u, v)");
      }
      const double u = (*prompt.coords)[0];
      const double v = (*prompt.coords)[1];
      const double p = sigmoid(model.alpha * (u - v));
      return ProbVector{p, 1.0 - p};
    }
  }
  throw DomainError("unreachable model kind");
}

double score_sequence(const ToyModel& model, const Prompt& prompt,
                      const TokenSequence& seq) {
  if (static_cast<int>(seq.size()) != model.gen_len) {
    throw InvalidShape("sequence length " + std::to_string(seq.size()) +
                       " != gen_len " + std::to_string(model.gen_len));
  }
  double acc = 0.0;
  TokenSequence prefix;
  prefix.reserve(seq.size());
  for (Token t : seq) {
    if (t < 0 || t >= model.vocab_size) {
      throw InvalidShape("token id " + std::to_string(t) + " outside vocabulary");
    }
    const ProbVector dist = conditional_distribution(model, prompt, prefix);
    const double p = dist[static_cast<std::size_t>(t)];
    if (p <= 0.0) {
      throw ZeroProbability("sequence steps through a zero-probability token");
    }
    acc += std::log(p);
    prefix.push_back(t);
  }
  return acc;
}

ProbVector nucleus_filter(const ProbVector& dist, double top_p) {
  if (top_p >= 1.0) return dist;  // identity by contract
  const std::size_t n = dist.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Probability descending, lower token id first among ties.
  std::stable_sort(order.begin(), order.end(),
                   [&dist](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
  ProbVector out(n, 0.0);
  double kept = 0.0;
  for (std::size_t idx : order) {
    out[idx] = dist[idx];
    kept += dist[idx];
    if (kept >= top_p) break;
  }
  for (double& p : out) p /= kept;
  return out;
}

SequenceSample sample_sequence(const ToyModel& model, const Prompt& prompt,
                               const SamplerConfig& cfg, RngStream& stream) {
  SequenceSample sample;
  sample.seq.reserve(static_cast<std::size_t>(model.gen_len));
  for (int step = 0; step < model.gen_len; ++step) {
    const ProbVector dist = conditional_distribution(model, prompt, sample.seq);

    ProbVector work = dist;
    if (cfg.temperature != 1.0) {
      // p^(1/T), renormalized; computed against the row max for stability.
      const double mx = *std::max_element(work.begin(), work.end());
      double sum = 0.0;
      for (double& p : work) {
        p = p > 0.0 ? std::exp((std::log(p) - std::log(mx)) / cfg.temperature) : 0.0;
        sum += p;
      }
      for (double& p : work) p /= sum;
    }
    work = nucleus_filter(work, cfg.top_p);

    const double u = stream.next_unit();
    double cum = 0.0;
    Token chosen = -1;
    for (std::size_t t = 0; t < work.size(); ++t) {
      if (work[t] <= 0.0) continue;
      cum += work[t];
      chosen = static_cast<Token>(t);
      if (u < cum) break;  // falls through to the last positive token when u >= cum
    }
    // True-model score of the drawn token; same accumulation order as
    // score_sequence, so the stored logprob is bitwise identical to it.
    sample.logprob += std::log(dist[static_cast<std::size_t>(chosen)]);
    sample.seq.push_back(chosen);
  }
  return sample;
}

std::uint64_t sequence_space_size(const ToyModel& model, std::uint64_t cap) {
  std::uint64_t space = 1;
  for (int step = 0; step < model.gen_len; ++step) {
    if (space > cap / static_cast<std::uint64_t>(model.vocab_size) + 1) {
      return cap + 1;
    }
    space *= static_cast<std::uint64_t>(model.vocab_size);
    if (space > cap) return cap + 1;
  }
  return space;
}

std::vector<std::pair<TokenSequence, double>> enumerate_sequences(
    const ToyModel& model, const Prompt& prompt, std::uint64_t cap) {
  const std::uint64_t space = sequence_space_size(model, cap);
  if (space > cap) {
    throw SpaceTooLarge("sequence space exceeds cap " + std::to_string(cap));
  }
  std::vector<std::pair<TokenSequence, double>> out;
  out.reserve(space);

  // Depth-first in token order, accumulating the log-score one step at a
  // time exactly like score_sequence does. Impossible branches carry -inf.
  TokenSequence prefix;
  std::vector<double> acc{0.0};
  std::vector<ProbVector> dists;
  dists.push_back(conditional_distribution(model, prompt, prefix));
  std::vector<Token> cursor{0};
  while (!cursor.empty()) {
    const std::size_t depth = cursor.size() - 1;
    Token& t = cursor.back();
    if (t >= model.vocab_size) {
      cursor.pop_back();
      dists.pop_back();
      acc.pop_back();
      if (!prefix.empty()) prefix.pop_back();
      if (!cursor.empty()) ++cursor.back();
      continue;
    }
    const double p = dists[depth][static_cast<std::size_t>(t)];
    const double lp = acc[depth] + std::log(p);
    if (static_cast<int>(depth) + 1 == model.gen_len) {
      TokenSequence seq = prefix;
      seq.push_back(t);
      out.emplace_back(std::move(seq), lp);
      ++t;
    } else {
      prefix.push_back(t);
      acc.push_back(lp);
      dists.push_back(conditional_distribution(model, prompt, prefix));
      cursor.push_back(0);
    }
  }
  return out;
}

}  // namespace dps
