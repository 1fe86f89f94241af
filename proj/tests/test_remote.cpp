#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "dps/dpf.hpp"
#include "dps/remote.hpp"
#include "support/mock_completions_server.hpp"

using namespace dps;
using testsupport::MockCompletionsServer;

namespace {

RemoteConfig mock_config(const MockCompletionsServer& server) {
  RemoteConfig cfg;
  cfg.base_url = server.base_url();
  cfg.model_name = "mock-001";
  cfg.request_timeout = 5.0;
  cfg.backoff_base = 0.01;
  return cfg;
}

MockCompletionsServer::Draw make_draw(std::string text,
                                      std::vector<std::string> tokens,
                                      std::vector<double> lps) {
  MockCompletionsServer::Draw d;
  d.text = std::move(text);
  d.tokens = std::move(tokens);
  d.token_logprobs = std::move(lps);
  return d;
}

}  // namespace

TEST_CASE("remote sampling") {
  MockCompletionsServer server;
  server.pool = {make_draw("xy", {"x", "y"}, {-0.1, -0.2})};
  RemoteConfig cfg = mock_config(server);

  SUBCASE("logprob is the exact sum of reported token logprobs") {
    const auto draws = remote_sample(cfg, "p", 1);
    REQUIRE(draws.size() == 1);
    CHECK(draws[0].text == "xy");
    REQUIRE(draws[0].tokens.size() == 2);
    CHECK(draws[0].tokens[0] == "x");
    CHECK(draws[0].logprob == -0.1 + -0.2);  // bitwise, no recomputation
  }
  SUBCASE("http 429 retries and succeeds") {
    server.fail_first = 1;
    const auto draws = remote_sample(cfg, "p", 2);
    CHECK(draws.size() == 2);
    CHECK(server.request_count.load() == 2);
  }
  SUBCASE("http 5xx retries and succeeds") {
    server.fail_first = 1;
    server.fail_status = 503;
    const auto draws = remote_sample(cfg, "p", 1);
    CHECK(draws.size() == 1);
    CHECK(server.request_count.load() == 2);
  }
  SUBCASE("exhausted retry budget raises a transport error") {
    server.fail_first = 10;
    cfg.max_retries = 1;
    CHECK_THROWS_AS(remote_sample(cfg, "p", 1), TransportError);
    CHECK(server.request_count.load() == 2);  // initial try + one retry
  }
  SUBCASE("missing logprobs block raises a protocol error") {
    server.strip_logprobs = true;
    CHECK_THROWS_AS(remote_sample(cfg, "p", 1), ProtocolError);
  }
}

TEST_CASE("remote auth") {
  MockCompletionsServer server;
  server.pool = {make_draw("xy", {"x", "y"}, {-0.1, -0.2})};
  server.require_bearer = "sekrit";
  RemoteConfig cfg = mock_config(server);
  cfg.api_key_env = "DPS_TEST_API_KEY";

  SUBCASE("401 raises immediately without retries") {
    setenv("DPS_TEST_API_KEY", "wrong", 1);
    CHECK_THROWS_AS(remote_sample(cfg, "p", 1), AuthError);
    CHECK(server.request_count.load() == 1);
  }
  SUBCASE("matching bearer token authenticates") {
    setenv("DPS_TEST_API_KEY", "sekrit", 1);
    const auto draws = remote_sample(cfg, "p", 1);
    CHECK(draws.size() == 1);
  }
  unsetenv("DPS_TEST_API_KEY");
}

TEST_CASE("remote scoring") {
  MockCompletionsServer server;
  RemoteConfig cfg = mock_config(server);
  using Json = MockCompletionsServer::Json;

  const auto full_echo = [](const std::string& prompt) {
    Json lp{{"tokens", {"A", "B", "C", "D"}},
            {"token_logprobs", {nullptr, -1.0, -0.5, -0.25}},
            {"text_offset", {0, 1, 2, 3}}};
    return Json{{"choices",
                 Json::array({Json{{"index", 0},
                                   {"text", prompt},
                                   {"logprobs", lp}}})}};
  };

  SUBCASE("prompt tokens are discarded by text offset") {
    server.echo_builder = full_echo;
    // Offsets 0 and 1 fall inside the prompt "AB"; C and D remain.
    CHECK(remote_score(cfg, "AB", "CD") == -0.5 + -0.25);
  }
  SUBCASE("empty completion scores zero without a request") {
    CHECK(remote_score(cfg, "AB", "") == 0.0);
    CHECK(server.request_count.load() == 0);
  }
  SUBCASE("echo rejection raises a capability error") {
    server.reject_echo = true;
    CHECK_THROWS_AS(remote_score(cfg, "AB", "CD"), CapabilityError);
  }
  SUBCASE("missing text_offset raises a protocol error") {
    server.echo_builder = [](const std::string& prompt) {
      Json lp{{"tokens", {"A", "B", "C", "D"}},
              {"token_logprobs", {nullptr, -1.0, -0.5, -0.25}}};
      return Json{{"choices",
                   Json::array({Json{{"index", 0},
                                     {"text", prompt},
                                     {"logprobs", lp}}})}};
    };
    CHECK_THROWS_AS(remote_score(cfg, "AB", "CD"), ProtocolError);
  }
  SUBCASE("null logprob on a completion token raises a protocol error") {
    server.echo_builder = [](const std::string& prompt) {
      Json lp{{"tokens", {"A", "B", "C", "D"}},
              {"token_logprobs", {nullptr, -1.0, nullptr, -0.25}},
              {"text_offset", {0, 1, 2, 3}}};
      return Json{{"choices",
                   Json::array({Json{{"index", 0},
                                     {"text", prompt},
                                     {"logprobs", lp}}})}};
    };
    CHECK_THROWS_AS(remote_score(cfg, "AB", "CD"), ProtocolError);
  }
}

TEST_CASE("remote batching") {
  MockCompletionsServer server;
  server.pool = {make_draw("aa", {"a", "a"}, {-0.5, -0.5}),
                 make_draw("ab", {"a", "b"}, {-0.5, -1.0}),
                 make_draw("bb", {"b", "b"}, {-1.5, -1.5})};
  RemoteConfig cfg = mock_config(server);

  SUBCASE("k splits into ceil(k / n_max) requests") {
    cfg.n_max = 3;
    cfg.max_in_flight = 1;
    const auto draws = remote_sample_batch(cfg, "p", 10);
    REQUIRE(draws.size() == 10);
    REQUIRE(server.request_sizes.size() == 4);
    CHECK(server.request_sizes[0] == 3);
    CHECK(server.request_sizes[1] == 3);
    CHECK(server.request_sizes[2] == 3);
    CHECK(server.request_sizes[3] == 1);
    // Sequential dispatch makes the pool cycle land in draw order.
    for (std::size_t i = 0; i < draws.size(); ++i) {
      CHECK(draws[i].text == server.pool[i % server.pool.size()].text);
    }
  }
  SUBCASE("in-flight requests never exceed the configured ceiling") {
    cfg.n_max = 1;
    cfg.max_in_flight = 3;
    server.latency_ms = 25;
    const auto draws = remote_sample_batch(cfg, "p", 12);
    CHECK(draws.size() == 12);
    CHECK(server.request_count.load() == 12);
    CHECK(server.max_in_flight_seen.load() <= 3);
    CHECK(server.max_in_flight_seen.load() >= 1);
  }
  SUBCASE("k below n_max is a single request") {
    cfg.n_max = 8;
    const auto draws = remote_sample_batch(cfg, "p", 5);
    CHECK(draws.size() == 5);
    CHECK(server.request_count.load() == 1);
  }
}

TEST_CASE("remote potential estimate") {
  MockCompletionsServer server;
  server.pool = {make_draw("aa", {"a", "a"}, {-0.5, -0.5}),
                 make_draw("ab", {"a", "b"}, {-0.5, -1.0}),
                 make_draw("bb", {"b", "b"}, {-1.5, -1.5})};
  RemoteConfig cfg = mock_config(server);
  cfg.n_max = 2;
  cfg.max_in_flight = 2;

  SUBCASE("matches the hand computation regardless of arrival order") {
    // Six draws cycle the pool twice; the distinct map sees logprobs
    // -1.0 ("aa"), -1.5 ("ab"), -3.0 ("bb").
    const RemoteEstimate est = remote_k_dpf(cfg, "p", 6);
    CHECK(est.delta_k == 0.5);
    CHECK(est.phi_k == 0.25);
    CHECK(est.r_k == 2.0);
    REQUIRE(est.r_k_local.has_value());
    CHECK(*est.r_k_local == 2.0);
    CHECK(est.distinct_count == 3);
    CHECK(est.top1 == std::string("a") + '\x1f' + "a" + '\x1f');
    CHECK(est.top2 == std::string("a") + '\x1f' + "b" + '\x1f');
    CHECK(est.eps_tail == epsilon_tail(std::exp(-1.0), 6));
  }
  SUBCASE("same text with different tokenizations stays distinct") {
    server.pool = {make_draw("same", {"s", "ame"}, {-1.0, -1.0}),
                   make_draw("same", {"sa", "me"}, {-1.0, -1.0})};
    const RemoteEstimate est = remote_k_dpf(cfg, "p", 4);
    CHECK(est.distinct_count == 2);
    CHECK(est.phi_k == 0.0);
  }
  SUBCASE("token-free draws deduplicate by completion text") {
    server.pool = {make_draw("q", {}, {}), make_draw("r", {}, {})};
    const RemoteEstimate est = remote_k_dpf(cfg, "p", 4);
    CHECK(est.distinct_count == 2);
    CHECK(est.top1 == "q");  // equal logprobs; smaller key wins
  }
  SUBCASE("a collapsed pool degenerates") {
    server.pool = {make_draw("aa", {"a", "a"}, {-0.5, -0.5})};
    CHECK_THROWS_AS(remote_k_dpf(cfg, "p", 4), DegenerateSample);
  }
  SUBCASE("k below 2 is rejected") {
    CHECK_THROWS_AS(remote_k_dpf(cfg, "p", 1), DomainError);
  }
}
