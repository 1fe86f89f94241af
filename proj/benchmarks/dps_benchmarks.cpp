#include <benchmark/benchmark.h>

#include <vector>

#include "dps/dpf.hpp"
#include "dps/rng.hpp"
#include "dps/seqmodel.hpp"
#include "dps/surface.hpp"

namespace {

dps::ToyModel coin_model() {
  return dps::parse_toy_model(
      R"({"kind":"iid","vocab_size":2,"gen_len":2,"step_probs":[0.6,0.4]})");
}

dps::ToyModel markov_model() {
  dps::RngStream rng(9);
  dps::ToyModel m;
  m.kind = dps::ModelKind::Markov;
  m.vocab_size = 6;
  m.gen_len = 3;
  auto row = [&rng] {
    dps::ProbVector r(6);
    double sum = 0.0;
    for (double& p : r) {
      p = 0.05 + rng.next_unit();
      sum += p;
    }
    for (double& p : r) p /= sum;
    return r;
  };
  m.init_probs = row();
  for (int v = 0; v < 6; ++v) m.transition.push_back(row());
  return m;
}

dps::SamplerConfig full_sampler() {
  dps::SamplerConfig s;
  s.top_p = 1.0;
  return s;
}

void bm_nucleus_filter(benchmark::State& state) {
  dps::RngStream rng(3);
  dps::ProbVector probs(64);
  double sum = 0.0;
  for (double& p : probs) {
    p = rng.next_unit();
    sum += p;
  }
  for (double& p : probs) p /= sum;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dps::nucleus_filter(probs, 0.9));
  }
}
BENCHMARK(bm_nucleus_filter);

void bm_draw_sample_set(benchmark::State& state) {
  const dps::ToyModel m = markov_model();
  const int k = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dps::draw_sample_set(m, dps::Prompt{}, k, full_sampler(), ++seed));
  }
  state.SetItemsProcessed(state.iterations() * k);
}
BENCHMARK(bm_draw_sample_set)->Arg(64)->Arg(1024);

void bm_k_dpf(benchmark::State& state) {
  const dps::ToyModel m = markov_model();
  const dps::SampleSet set =
      dps::draw_sample_set(m, dps::Prompt{}, 1024, full_sampler(), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dps::k_dpf(set));
  }
}
BENCHMARK(bm_k_dpf);

void bm_exact_enumeration(benchmark::State& state) {
  const dps::ToyModel m = markov_model();
  for (auto _ : state) {
    benchmark::DoNotOptimize(dps::exact_dpf(m, dps::Prompt{}));
  }
}
BENCHMARK(bm_exact_enumeration);

void bm_interpolate_grid(benchmark::State& state) {
  dps::RngStream rng(5);
  std::vector<dps::SamplePoint> points;
  for (int i = 0; i < 200; ++i) {
    dps::SamplePoint p;
    p.u = rng.next_unit();
    p.v = rng.next_unit();
    p.phi = rng.next_unit();
    points.push_back(p);
  }
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dps::interpolate_grid(points, n, n, dps::InterpMethod::Linear));
  }
}
BENCHMARK(bm_interpolate_grid)->Arg(51)->Arg(101);

void bm_extract_isohypses(benchmark::State& state) {
  dps::SurfaceGrid g;
  g.nx = 101;
  g.ny = 101;
  for (int i = 0; i < g.nx; ++i) g.u_axis.push_back(i / 100.0);
  for (int j = 0; j < g.ny; ++j) g.v_axis.push_back(j / 100.0);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const double du = g.u_axis[i] - 0.5, dv = g.v_axis[j] - 0.5;
      g.values.push_back(du * du + dv * dv);
      g.valid.push_back(1);
    }
  }
  const std::vector<double> levels{0.02, 0.08, 0.18};
  for (auto _ : state) {
    benchmark::DoNotOptimize(dps::extract_isohypses(g, levels));
  }
}
BENCHMARK(bm_extract_isohypses);

}  // namespace

BENCHMARK_MAIN();
