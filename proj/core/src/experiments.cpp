#include "dps/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dps/rng.hpp"

namespace dps {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Reserved trial lane for reference draws so they never collide with
// numbered trials.
constexpr std::uint64_t kRefLane = 0xffffffffULL;

void check_k_list(const std::vector<int>& k_list) {
  if (k_list.empty()) throw DomainError("k_list must be non-empty");
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    if (k_list[i] < 2) throw DomainError("every k must be >= 2");
    if (i > 0 && k_list[i] <= k_list[i - 1]) {
      throw DomainError("k_list must be strictly ascending");
    }
  }
}

}  // namespace

std::vector<ConvergenceRow> run_convergence(const ToyModel& model,
                                            const std::vector<Prompt>& prompts,
                                            const ConvergenceConfig& cfg) {
  check_k_list(cfg.k_list);
  if (cfg.repeats < 1) throw DomainError("repeats must be >= 1");
  if (prompts.empty()) throw DomainError("at least one prompt required");

  std::vector<ConvergenceRow> rows;
  rows.reserve(prompts.size() * cfg.k_list.size() *
               static_cast<std::size_t>(cfg.repeats));
  const bool enumerable = space_enumerable(model, cfg.cap);

  for (std::size_t p = 0; p < prompts.size(); ++p) {
    const Prompt& prompt = prompts[p];
    double ref_phi = kNan;
    std::string ref_kind;
    bool ref_ok = true;
    if (enumerable) {
      ref_phi = exact_dpf(model, prompt, cfg.cap).phi_inf;
      ref_kind = "oracle";
    } else {
      ref_kind = "kref";
      const std::uint64_t ref_seed = derive_seed(cfg.seed, {p, kRefLane, 0});
      try {
        SampleSet ref_set =
            draw_sample_set(model, prompt, cfg.k_ref, cfg.sampler, ref_seed);
        ref_phi = k_dpf(ref_set).phi_k;
      } catch (const DegenerateSample&) {
        ref_ok = false;  // flag every row of this prompt instead of aborting
      }
    }

    for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
      for (int trial = 0; trial < cfg.repeats; ++trial) {
        ConvergenceRow row;
        row.prompt_id = prompt.key;
        row.k = cfg.k_list[ki];
        row.trial = trial;
        row.ref_kind = ref_kind;
        const std::uint64_t seed =
            derive_seed(cfg.seed, {p, static_cast<std::uint64_t>(trial), ki});
        try {
          SampleSet set =
              draw_sample_set(model, prompt, row.k, cfg.sampler, seed);
          const PotentialEstimate est = k_dpf(set);
          row.phi_k = est.phi_k;
          row.r_k = est.r_k;
          row.eps_tail = est.eps_tail;
          if (ref_ok) {
            row.abs_err_vs_ref = std::abs(est.phi_k - ref_phi);
          } else {
            row.abs_err_vs_ref = kNan;
            row.degenerate = true;
          }
        } catch (const DegenerateSample&) {
          row.phi_k = kNan;
          row.r_k = kNan;
          row.eps_tail = kNan;
          row.abs_err_vs_ref = kNan;
          row.degenerate = true;
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<ConcentrationRow> run_concentration(const ToyModel& model,
                                                const std::vector<Prompt>& prompts,
                                                const ConcentrationConfig& cfg) {
  check_k_list(cfg.k_list);
  for (double lambda : cfg.lambdas) {
    if (!(lambda > 0.0)) throw DomainError("lambdas must be positive");
  }
  if (cfg.lambdas.empty()) throw DomainError("lambdas must be non-empty");
  if (cfg.trials < 100) throw DomainError("concentration needs trials >= 100");
  if (prompts.empty()) throw DomainError("at least one prompt required");

  // Oracle per prompt; SpaceTooLarge propagates (this harness has no proxy).
  std::vector<double> phi_inf;
  phi_inf.reserve(prompts.size());
  for (const Prompt& prompt : prompts) {
    phi_inf.push_back(exact_dpf(model, prompt, cfg.cap).phi_inf);
  }

  std::vector<ConcentrationRow> rows;
  rows.reserve(cfg.k_list.size() * cfg.lambdas.size());
  for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
    const int k = cfg.k_list[ki];
    std::vector<double> errors;
    errors.reserve(prompts.size() * static_cast<std::size_t>(cfg.trials));
    double r_sum = 0.0;
    double eps_sum = 0.0;
    for (std::size_t p = 0; p < prompts.size(); ++p) {
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t seed =
            derive_seed(cfg.seed, {p, static_cast<std::uint64_t>(trial), ki});
        try {
          SampleSet set = draw_sample_set(model, prompts[p], k, cfg.sampler, seed);
          const PotentialEstimate est = k_dpf(set);
          errors.push_back(std::abs(est.phi_k - phi_inf[p]));
          r_sum += est.r_k;
          eps_sum += est.eps_tail;
        } catch (const DegenerateSample&) {
          // Dropped from both sides of the tail estimate; the row's `trials`
          // field reports how many draws actually entered it.
        }
      }
    }
    const int valid = static_cast<int>(errors.size());
    const double mean_r = valid > 0 ? r_sum / valid : 0.0;
    const double mean_eps = valid > 0 ? eps_sum / valid : 0.0;
    for (double lambda : cfg.lambdas) {
      ConcentrationRow row;
      row.k = k;
      row.lambda = lambda;
      row.trials = valid;
      for (double err : errors) {
        if (err >= lambda) ++row.exceed_count;
      }
      row.empirical_tail =
          valid > 0 ? static_cast<double>(row.exceed_count) / valid : 0.0;
      row.theoretical_bound =
          mean_r > 0.0
              ? std::min(1.0, concentration_tail_bound(mean_r, k, lambda, mean_eps))
              : 1.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

CoverageReport validate_bounds(const ToyModel& model,
                               const std::vector<Prompt>& prompts,
                               const CoverageConfig& cfg) {
  if (cfg.trials < 1) throw DomainError("validate_bounds needs trials >= 1");
  if (prompts.empty()) throw DomainError("at least one prompt required");
  if (!(cfg.delta > 0.0) || !(cfg.delta < 1.0)) {
    throw DomainError("delta must lie in (0, 1)");
  }

  std::vector<double> phi_inf;
  phi_inf.reserve(prompts.size());
  for (const Prompt& prompt : prompts) {
    phi_inf.push_back(exact_dpf(model, prompt, cfg.cap).phi_inf);
  }

  CoverageReport report;
  report.k = cfg.k;
  report.delta = cfg.delta;
  double eps_sum = 0.0;
  int eps_count = 0;
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      ++report.trials;
      const std::uint64_t seed =
          derive_seed(cfg.seed, {p, static_cast<std::uint64_t>(trial), 0});
      try {
        SampleSet set = draw_sample_set(model, prompts[p], cfg.k, cfg.sampler, seed);
        const PotentialEstimate est = k_dpf(set);
        const double bound = absolute_error_bound(est.r_k, cfg.k, cfg.delta);
        if (std::abs(est.phi_k - phi_inf[p]) <= bound) ++report.covered;
        eps_sum += est.eps_tail;
        ++eps_count;
      } catch (const DegenerateSample&) {
        ++report.degenerate_trials;  // conservatively counted as not covered
      }
    }
  }
  report.coverage = static_cast<double>(report.covered) / report.trials;
  report.mean_eps_tail = eps_count > 0 ? eps_sum / eps_count : 0.0;
  report.guaranteed_level = 1.0 - cfg.delta - 2.0 * report.mean_eps_tail;
  return report;
}

}  // namespace dps
