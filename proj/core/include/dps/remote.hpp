#pragma once

#include <string>
#include <vector>

#include "dps/dpf.hpp"
#include "dps/seqmodel.hpp"

/**
 * Estimator transport for OpenAI-compatible completions servers with
 * per-token log-probabilities.
 *
 * Wire protocol: POST {base_url}/v1/completions with JSON body
 * {"model","prompt","max_tokens","temperature","top_p","n","logprobs":1,
 *  "echo":false}; scoring uses echo:true with max_tokens:0 and discards
 * prompt-token logprobs by text offset. Timeouts, HTTP 429, and 5xx retry
 * with exponential backoff (backoff_base * 2^attempt); 401/403 raise
 * AuthError immediately; a missing logprobs block raises ProtocolError; a
 * 400 rejection of echo scoring raises CapabilityError.
 *
 * A sample's logprob is the exact sum of the reported token logprobs; no
 * local recomputation. Distinct-sequence keys use the server's token strings
 * verbatim when present, else the completion text.
 */

namespace dps {

struct RemoteConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model_name;
  std::string api_key_env;        // name of the env var holding the key
  double request_timeout = 30.0;  // seconds
  int max_retries = 3;
  double backoff_base = 0.1;  // seconds
  int max_in_flight = 4;
  int max_tokens = 16;  // generation length per draw
  int n_max = 8;        // draws per request
  SamplerConfig sampler;
};

struct RemoteSample {
  std::string text;
  std::vector<std::string> tokens;  // empty when the server omits them
  double logprob = 0.0;
};

// Estimate over remote draws; keys are dedup keys (token strings joined, or
// the completion text).
using RemoteEstimate = BasicEstimate<std::string>;

// One completions request returning n draws.
std::vector<RemoteSample> remote_sample(const RemoteConfig& cfg,
                                        const std::string& prompt, int n);

// Sum of the completion's token logprobs via echoed-prompt scoring. The
// empty completion scores 0. Servers that reject echo raise CapabilityError.
double remote_score(const RemoteConfig& cfg, const std::string& prompt,
                    const std::string& completion);

// k draws split into ceil(k / n_max) requests, at most max_in_flight
// pending at once; output is in draw order regardless of arrival order.
std::vector<RemoteSample> remote_sample_batch(const RemoteConfig& cfg,
                                              const std::string& prompt, int k);

// The potential estimate over k remote draws.
RemoteEstimate remote_k_dpf(const RemoteConfig& cfg, const std::string& prompt,
                            int k);

}  // namespace dps
