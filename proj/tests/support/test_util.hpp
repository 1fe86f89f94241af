#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dps/rng.hpp"
#include "dps/seqmodel.hpp"

namespace testsupport {

// Dirichlet(1,...,1) row: normalized exponential draws. Rows are normalized
// exactly so hand-built models satisfy the distribution invariants without
// going through the JSON validator.
inline dps::ProbVector random_distribution(dps::RngStream& rng, int width) {
  dps::ProbVector row(static_cast<std::size_t>(width));
  double sum = 0.0;
  for (double& p : row) {
    p = -std::log(1.0 - rng.next_unit());
    sum += p;
  }
  for (double& p : row) p /= sum;
  return row;
}

// Random iid or markov table model with vocab in [2, vmax] and generation
// length in [1, nmax]; fully determined by the stream.
inline dps::ToyModel random_table_model(dps::RngStream& rng, int vmax = 6,
                                        int nmax = 3) {
  dps::ToyModel model;
  model.vocab_size = 2 + static_cast<int>(rng.next_u64() % (vmax - 1));
  model.gen_len = 1 + static_cast<int>(rng.next_u64() % nmax);
  if (rng.next_u64() & 1) {
    model.kind = dps::ModelKind::Markov;
    model.init_probs = random_distribution(rng, model.vocab_size);
    model.transition.clear();
    for (int v = 0; v < model.vocab_size; ++v) {
      model.transition.push_back(random_distribution(rng, model.vocab_size));
    }
  } else {
    model.kind = dps::ModelKind::Iid;
    model.step_probs = random_distribution(rng, model.vocab_size);
  }
  return model;
}

inline dps::ToyModel coin2_model() {
  return dps::parse_toy_model(
      R"({"kind":"iid","vocab_size":2,"gen_len":2,"step_probs":[0.6,0.4]})");
}

inline dps::ToyModel analytic_model(double alpha) {
  return dps::parse_toy_model(
      R"({"kind":"analytic2d","vocab_size":2,"gen_len":1,"alpha":)" +
      std::to_string(alpha) + "}");
}

}  // namespace testsupport
