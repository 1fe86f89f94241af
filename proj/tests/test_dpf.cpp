#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>

#include "dps/dpf.hpp"
#include "dps/rng.hpp"
#include "support/test_util.hpp"

using namespace dps;

TEST_CASE("exact potential by enumeration") {
  SUBCASE("coin2 frozen values") {
    const ExactPotential e = exact_dpf(testsupport::coin2_model(), Prompt{});
    CHECK(e.phi_inf == 0.16440195389316525);    // (ln 1.5)^2 via the score path
    CHECK(e.delta_inf == 0.40546510810816416);  // ln 0.36 - ln 0.24
    CHECK(e.top1 == TokenSequence{0, 0});
    CHECK(e.top2 == TokenSequence{0, 1});
    CHECK(e.space_size == 4);
  }
  SUBCASE("logprob ties break toward the lexicographically smaller sequence") {
    const ToyModel m = parse_toy_model(
        R"({"kind":"iid","vocab_size":2,"gen_len":1,"step_probs":[0.5,0.5]})");
    const ExactPotential e = exact_dpf(m, Prompt{});
    CHECK(e.top1 == TokenSequence{0});
    CHECK(e.top2 == TokenSequence{1});
    CHECK(e.phi_inf == 0.0);
    CHECK(e.delta_inf == 0.0);
  }
  SUBCASE("three-outcome gap") {
    const ToyModel m = parse_toy_model(
        R"({"kind":"iid","vocab_size":3,"gen_len":1,"step_probs":[0.9,0.05,0.05]})");
    const ExactPotential e = exact_dpf(m, Prompt{});
    CHECK(e.delta_inf == doctest::Approx(2.8903717578961645));  // ln 18
    CHECK(e.top2 == TokenSequence{1});                          // tie -> smaller id
  }
  SUBCASE("fewer than two positive-probability sequences is degenerate") {
    const ToyModel z = parse_toy_model(
        R"({"kind":"iid","vocab_size":2,"gen_len":1,"step_probs":[1.0,0.0]})");
    CHECK_THROWS_AS(exact_dpf(z, Prompt{}), DegenerateModel);
  }
  SUBCASE("cap propagates") {
    CHECK_THROWS_AS(exact_dpf(testsupport::coin2_model(), Prompt{}, 3),
                    SpaceTooLarge);
  }
}

TEST_CASE("sample sets") {
  const ToyModel m = testsupport::coin2_model();
  SamplerConfig full;
  full.top_p = 1.0;

  SUBCASE("k below 2 is rejected") {
    CHECK_THROWS_AS(draw_sample_set(m, Prompt{}, 1, full, 0), DomainError);
  }
  SUBCASE("deterministic given seed, and scored by the true model") {
    const SampleSet a = draw_sample_set(m, Prompt{}, 64, full, 42);
    const SampleSet b = draw_sample_set(m, Prompt{}, 64, full, 42);
    REQUIRE(a.draws.size() == 64);
    CHECK(a.k == 64);
    for (std::size_t i = 0; i < a.draws.size(); ++i) {
      CHECK(a.draws[i].seq == b.draws[i].seq);
      CHECK(a.draws[i].logprob == b.draws[i].logprob);
      CHECK(a.draws[i].logprob == score_sequence(m, Prompt{}, a.draws[i].seq));
    }
  }
  SUBCASE("distinct map holds one entry per unique sequence") {
    const SampleSet s = draw_sample_set(m, Prompt{}, 512, full, 7);
    CHECK(s.distinct.size() == 4);  // all four sequences show up by K=512
    for (const auto& [seq, lp] : s.distinct) {
      CHECK(lp == score_sequence(m, Prompt{}, seq));
    }
  }
}

TEST_CASE("finite-sample potential estimate") {
  const ToyModel m = testsupport::coin2_model();
  SamplerConfig full;
  full.top_p = 1.0;

  SUBCASE("matches the oracle bitwise once both top sequences are sampled") {
    const ExactPotential exact = exact_dpf(m, Prompt{});
    const PotentialEstimate est = k_dpf(draw_sample_set(m, Prompt{}, 1000, full, 1));
    CHECK(est.top1 == exact.top1);
    CHECK(est.top2 == exact.top2);
    CHECK(est.phi_k == exact.phi_inf);
    CHECK(est.delta_k == exact.delta_inf);
  }
  SUBCASE("ordering invariants") {
    const PotentialEstimate est = k_dpf(draw_sample_set(m, Prompt{}, 1000, full, 3));
    CHECK(est.delta_k >= 0.0);
    REQUIRE(est.r_k_local.has_value());
    CHECK(est.delta_k <= *est.r_k_local);
    CHECK(*est.r_k_local <= est.r_k);
    CHECK(est.phi_k == doctest::Approx(est.delta_k * est.delta_k).epsilon(1e-9));
    CHECK(est.distinct_count == 4);
    CHECK(est.r_k == 0.8109302162163285);  // ln 0.36 - ln 0.16
  }
  SUBCASE("two distinct sequences leave no local gap") {
    const ToyModel two = parse_toy_model(
        R"({"kind":"iid","vocab_size":2,"gen_len":1,"step_probs":[0.7,0.3]})");
    const PotentialEstimate est =
        k_dpf(draw_sample_set(two, Prompt{}, 64, full, 5));
    CHECK(est.distinct_count == 2);
    CHECK_FALSE(est.r_k_local.has_value());
    CHECK(est.r_k == est.delta_k);
  }
  SUBCASE("a collapsed sample set is degenerate") {
    SamplerConfig clipped;
    clipped.top_p = 0.5;  // nucleus keeps only token 0; every draw identical
    CHECK_THROWS_AS(k_dpf(draw_sample_set(m, Prompt{}, 32, clipped, 0)),
                    DegenerateSample);
  }
  SUBCASE("tied logprobs pick the lexicographically smaller key") {
    std::map<TokenSequence, double> distinct{
        {{0, 1}, -1.0}, {{1, 0}, -1.0}, {{1, 1}, -2.0}};
    const auto est = estimate_from_distinct<TokenSequence>(distinct, -2.0, 10);
    CHECK(est.top1 == TokenSequence{0, 1});
    CHECK(est.top2 == TokenSequence{1, 0});
    CHECK(est.phi_k == 0.0);
    REQUIRE(est.r_k_local.has_value());
    CHECK(*est.r_k_local == 1.0);
  }
}

TEST_CASE("tail and error bounds") {
  SUBCASE("frozen values") {
    CHECK(epsilon_tail(0.36, 10) == 0.011529215046068473);
    CHECK(epsilon_tail(0.36, 5) == 0.10737418240000002);
    CHECK(absolute_error_bound(3, 400, 0.05) == 1.3321864685707183);
    CHECK(absolute_error_bound(2, 100, 0.5) == 0.8157335921350471);
    CHECK(expected_error_bound(3, 400, 0.01) == 2.6159654471679);
    CHECK(expected_error_bound(2, 100, 0.0) == 2.0053026197048003);
    CHECK(concentration_tail_bound(2, 100, 1, 0) == 0.17574773449362968);
  }
  SUBCASE("domain checks") {
    CHECK_THROWS_AS(epsilon_tail(0.0, 10), DomainError);
    CHECK_THROWS_AS(epsilon_tail(1.5, 10), DomainError);
    CHECK_THROWS_AS(epsilon_tail(0.5, 0), DomainError);
    CHECK_THROWS_AS(absolute_error_bound(2, 100, 0.0), DomainError);
    CHECK_THROWS_AS(absolute_error_bound(2, 100, 1.0), DomainError);
    CHECK_THROWS_AS(absolute_error_bound(-1, 100, 0.5), DomainError);
    CHECK_THROWS_AS(absolute_error_bound(2, 0, 0.5), DomainError);
    CHECK_THROWS_AS(expected_error_bound(2, 100, -0.1), DomainError);
    CHECK_THROWS_AS(concentration_tail_bound(2, 100, 0.0, 0), DomainError);
    CHECK_THROWS_AS(concentration_tail_bound(0.0, 100, 1, 0), DomainError);
  }
  SUBCASE("monotonicity") {
    // eps_tail falls in k and in p_top1.
    CHECK(epsilon_tail(0.36, 10) < epsilon_tail(0.36, 5));
    CHECK(epsilon_tail(0.5, 5) < epsilon_tail(0.36, 5));
    // absolute bound: up in r, down in k, down in delta.
    CHECK(absolute_error_bound(3, 100, 0.1) > absolute_error_bound(2, 100, 0.1));
    CHECK(absolute_error_bound(2, 400, 0.1) < absolute_error_bound(2, 100, 0.1));
    CHECK(absolute_error_bound(2, 100, 0.2) < absolute_error_bound(2, 100, 0.1));
    // tail bound: down in k and lambda, up in eps.
    CHECK(concentration_tail_bound(2, 400, 1, 0) <
          concentration_tail_bound(2, 100, 1, 0));
    CHECK(concentration_tail_bound(2, 100, 2, 0) <
          concentration_tail_bound(2, 100, 1, 0));
    CHECK(concentration_tail_bound(2, 100, 1, 0.1) >
          concentration_tail_bound(2, 100, 1, 0));
  }
  SUBCASE("edge values") {
    CHECK(epsilon_tail(1.0, 3) == 0.0);
    // Vacuous bound beyond 1 is returned raw.
    CHECK(concentration_tail_bound(2, 100, 0.01, 0) > 1.0);
  }
}

TEST_CASE("gap assumption diagnostic") {
  const ToyModel m = testsupport::coin2_model();
  SamplerConfig full;
  full.top_p = 1.0;
  const ExactPotential exact = exact_dpf(m, Prompt{});

  SUBCASE("full sample satisfies the gap") {
    const PotentialEstimate est = k_dpf(draw_sample_set(m, Prompt{}, 1000, full, 1));
    CHECK(est.r_k == doctest::Approx(0.8109302162163285));
    CHECK(check_gap_assumption(exact, est));
  }
  SUBCASE("equality at two sequences") {
    const ToyModel two = parse_toy_model(
        R"({"kind":"iid","vocab_size":2,"gen_len":1,"step_probs":[0.7,0.3]})");
    const ExactPotential e2 = exact_dpf(two, Prompt{});
    const PotentialEstimate est = k_dpf(draw_sample_set(two, Prompt{}, 64, full, 5));
    CHECK(est.r_k == e2.delta_inf);
    CHECK(check_gap_assumption(e2, est));
  }
  SUBCASE("fails when the sample missed the head of the distribution") {
    PotentialEstimate est;
    est.r_k = 0.0;  // as if only the two tail sequences were drawn
    CHECK_FALSE(check_gap_assumption(exact, est));
  }
}

TEST_CASE("bound report bundles the three bounds") {
  const std::vector<double> lambdas{0.01, 0.2};
  const BoundReport report = make_bound_report(2.0, 0.0, 100, 0.5, lambdas);
  CHECK(report.delta == 0.5);
  CHECK(report.abs_bound == 0.8157335921350471);
  CHECK(report.abs_confidence == doctest::Approx(0.5));  // 1 - delta - 2 eps
  CHECK(report.expected_bound == 2.0053026197048003);
  REQUIRE(report.tail_bounds.size() == 2);
  CHECK(report.tail_bounds.at(0.2) ==
        concentration_tail_bound(2.0, 100, 0.2, 0.0));
}
