#include "dps/remote.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace dps {

namespace {

using nlohmann::json;

constexpr const char* kCompletionsPath = "/v1/completions";

httplib::Headers make_headers(const RemoteConfig& cfg) {
  httplib::Headers headers{{"Content-Type", "application/json"}};
  if (!cfg.api_key_env.empty()) {
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key != nullptr && key[0] != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  return headers;
}

void apply_timeout(httplib::Client& client, double seconds) {
  const auto sec = static_cast<time_t>(seconds);
  const auto usec = static_cast<time_t>((seconds - static_cast<double>(sec)) * 1e6);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
}

// POSTs with retry on timeout/429/5xx; other statuses return to the caller.
httplib::Result post_with_retry(const RemoteConfig& cfg, const std::string& body) {
  httplib::Client client(cfg.base_url);
  apply_timeout(client, cfg.request_timeout);
  const httplib::Headers headers = make_headers(cfg);

  for (int attempt = 0;; ++attempt) {
    httplib::Result res =
        client.Post(kCompletionsPath, headers, body, "application/json");
    const bool transport_failure = !res;
    const bool retryable_status =
        res && (res->status == 429 || (res->status >= 500 && res->status < 600));
    if (!transport_failure && !retryable_status) return res;
    if (attempt >= cfg.max_retries) {
      if (transport_failure) {
        throw TransportError("request failed after " +
                             std::to_string(attempt + 1) + " attempts: " +
                             httplib::to_string(res.error()));
      }
      throw TransportError("server kept returning HTTP " +
                           std::to_string(res->status) + " after " +
                           std::to_string(attempt + 1) + " attempts");
    }
    const double delay = cfg.backoff_base * std::pow(2.0, attempt);
    std::this_thread::sleep_for(std::chrono::duration<double>(delay));
  }
}

void check_auth(const httplib::Response& res) {
  if (res.status == 401 || res.status == 403) {
    throw AuthError("server rejected credentials (HTTP " +
                    std::to_string(res.status) + ")");
  }
}

json parse_body(const httplib::Response& res) {
  json parsed = json::parse(res.body, nullptr, false);
  if (parsed.is_discarded()) throw ProtocolError("response body is not JSON");
  return parsed;
}

const json& choice_logprobs(const json& choice) {
  const auto it = choice.find("logprobs");
  if (it == choice.end() || it->is_null()) {
    throw ProtocolError("response choice has no logprobs block");
  }
  if (!it->is_object() || !it->contains("token_logprobs")) {
    throw ProtocolError("logprobs block lacks token_logprobs");
  }
  return *it;
}

}  // namespace

std::vector<RemoteSample> remote_sample(const RemoteConfig& cfg,
                                        const std::string& prompt, int n) {
  if (n < 1) throw DomainError("remote_sample requires n >= 1");
  json body{{"model", cfg.model_name},
            {"prompt", prompt},
            {"max_tokens", cfg.max_tokens},
            {"temperature", cfg.sampler.temperature},
            {"top_p", cfg.sampler.top_p},
            {"n", n},
            {"logprobs", 1},
            {"echo", false}};
  const httplib::Result res = post_with_retry(cfg, body.dump());
  check_auth(*res);
  if (res->status != 200) {
    throw TransportError("unexpected HTTP " + std::to_string(res->status));
  }
  const json parsed = parse_body(*res);
  if (!parsed.contains("choices") || !parsed["choices"].is_array()) {
    throw ProtocolError("response has no choices array");
  }

  std::vector<RemoteSample> out;
  out.reserve(parsed["choices"].size());
  for (const json& choice : parsed["choices"]) {
    const json& lp = choice_logprobs(choice);
    RemoteSample sample;
    sample.text = choice.value("text", std::string{});
    if (lp.contains("tokens") && lp["tokens"].is_array()) {
      for (const json& tok : lp["tokens"]) {
        sample.tokens.push_back(tok.get<std::string>());
      }
    }
    for (const json& v : lp["token_logprobs"]) {
      if (!v.is_number()) {
        throw ProtocolError("sampling response contains a non-numeric logprob");
      }
      sample.logprob += v.get<double>();
    }
    out.push_back(std::move(sample));
  }
  return out;
}

double remote_score(const RemoteConfig& cfg, const std::string& prompt,
                    const std::string& completion) {
  if (completion.empty()) return 0.0;  // empty product
  json body{{"model", cfg.model_name},
            {"prompt", prompt + completion},
            {"max_tokens", 0},
            {"temperature", cfg.sampler.temperature},
            {"top_p", cfg.sampler.top_p},
            {"n", 1},
            {"logprobs", 1},
            {"echo", true}};
  const httplib::Result res = post_with_retry(cfg, body.dump());
  check_auth(*res);
  if (res->status == 400) {
    throw CapabilityError("server rejects echoed-prompt scoring");
  }
  if (res->status != 200) {
    throw TransportError("unexpected HTTP " + std::to_string(res->status));
  }
  const json parsed = parse_body(*res);
  if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
      parsed["choices"].empty()) {
    throw ProtocolError("response has no choices array");
  }
  const json& lp = choice_logprobs(parsed["choices"][0]);
  if (!lp.contains("text_offset") || !lp["text_offset"].is_array()) {
    throw ProtocolError("echo response lacks text_offset");
  }
  const json& offsets = lp["text_offset"];
  const json& logprobs = lp["token_logprobs"];
  if (offsets.size() != logprobs.size()) {
    throw ProtocolError("text_offset and token_logprobs disagree in length");
  }

  // Completion tokens are the ones starting at or after the prompt's end.
  const auto boundary = static_cast<std::int64_t>(prompt.size());
  double total = 0.0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (offsets[i].get<std::int64_t>() < boundary) continue;
    if (!logprobs[i].is_number()) {
      throw ProtocolError("completion token has no logprob");
    }
    total += logprobs[i].get<double>();
  }
  return total;
}

std::vector<RemoteSample> remote_sample_batch(const RemoteConfig& cfg,
                                              const std::string& prompt, int k) {
  if (k < 1) throw DomainError("remote_sample_batch requires k >= 1");
  const int n_max = std::max(cfg.n_max, 1);
  const int batches = (k + n_max - 1) / n_max;
  std::vector<std::vector<RemoteSample>> results(batches);

  const int workers = std::clamp(cfg.max_in_flight, 1, batches);
  std::atomic<int> next_batch{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    while (true) {
      const int b = next_batch.fetch_add(1);
      if (b >= batches) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      const int n = std::min(n_max, k - b * n_max);
      try {
        results[b] = remote_sample(cfg, prompt, n);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<RemoteSample> out;
  out.reserve(static_cast<std::size_t>(k));
  for (std::vector<RemoteSample>& batch : results) {
    for (RemoteSample& sample : batch) out.push_back(std::move(sample));
  }
  return out;
}

RemoteEstimate remote_k_dpf(const RemoteConfig& cfg, const std::string& prompt,
                            int k) {
  if (k < 2) throw DomainError("the estimator needs k >= 2 draws");
  const std::vector<RemoteSample> draws = remote_sample_batch(cfg, prompt, k);

  std::map<std::string, double> distinct;
  double min_logprob = std::numeric_limits<double>::infinity();
  for (const RemoteSample& draw : draws) {
    std::string key;
    if (!draw.tokens.empty()) {
      for (const std::string& tok : draw.tokens) {
        key += tok;
        key += '\x1f';  // unambiguous token-string join
      }
    } else {
      key = draw.text;
    }
    distinct.emplace(std::move(key), draw.logprob);
    min_logprob = std::min(min_logprob, draw.logprob);
  }
  return estimate_from_distinct<std::string>(distinct, min_logprob,
                                             static_cast<int>(draws.size()));
}

}  // namespace dps
