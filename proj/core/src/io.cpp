#include "dps/io.hpp"

#include <cmath>
#include <cstdio>

namespace dps {

namespace {

std::string json_double(double value) {
  if (std::isnan(value)) return "null";
  return format_double(value);
}

std::string tokens_json(const TokenSequence& seq) {
  std::string out = "[";
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(seq[i]);
  }
  out += "]";
  return out;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

std::string to_json(const ExactPotential& exact) {
  std::string out = "{";
  out += "\"phi_inf\":" + json_double(exact.phi_inf);
  out += ",\"delta_inf\":" + json_double(exact.delta_inf);
  out += ",\"top1\":" + tokens_json(exact.top1);
  out += ",\"top2\":" + tokens_json(exact.top2);
  out += ",\"space_size\":" + std::to_string(exact.space_size);
  out += "}";
  return out;
}

std::string to_json(const PotentialEstimate& estimate) {
  std::string out = "{";
  out += "\"phi_k\":" + json_double(estimate.phi_k);
  out += ",\"delta_k\":" + json_double(estimate.delta_k);
  out += ",\"top1\":" + tokens_json(estimate.top1);
  out += ",\"top2\":" + tokens_json(estimate.top2);
  out += ",\"r_k\":" + json_double(estimate.r_k);
  out += ",\"r_k_local\":";
  out += estimate.r_k_local ? json_double(*estimate.r_k_local) : "null";
  out += ",\"eps_tail\":" + json_double(estimate.eps_tail);
  out += ",\"distinct_count\":" + std::to_string(estimate.distinct_count);
  out += "}";
  return out;
}

std::string to_json(const BoundReport& report) {
  std::string out = "{";
  out += "\"delta\":" + json_double(report.delta);
  out += ",\"abs_bound\":" + json_double(report.abs_bound);
  out += ",\"abs_confidence\":" + json_double(report.abs_confidence);
  out += ",\"expected_bound\":" + json_double(report.expected_bound);
  out += ",\"tail_bounds\":{";
  bool first = true;
  for (const auto& [lambda, bound] : report.tail_bounds) {
    if (!first) out += ",";
    first = false;
    out += "\"" + format_double(lambda) + "\":" + json_double(bound);
  }
  out += "}}";
  return out;
}

std::string to_json(const CoverageReport& report) {
  std::string out = "{";
  out += "\"K\":" + std::to_string(report.k);
  out += ",\"delta\":" + json_double(report.delta);
  out += ",\"trials\":" + std::to_string(report.trials);
  out += ",\"covered\":" + std::to_string(report.covered);
  out += ",\"coverage\":" + json_double(report.coverage);
  out += ",\"guaranteed_level\":" + json_double(report.guaranteed_level);
  out += ",\"mean_eps_tail\":" + json_double(report.mean_eps_tail);
  out += ",\"degenerate_trials\":" + std::to_string(report.degenerate_trials);
  out += "}";
  return out;
}

std::string convergence_csv(std::span<const ConvergenceRow> rows) {
  std::string out =
      "prompt_id,K,trial,phi_k,r_k,eps_tail,abs_err_vs_ref,ref_kind,degenerate\n";
  for (const ConvergenceRow& row : rows) {
    out += row.prompt_id;
    out += "," + std::to_string(row.k);
    out += "," + std::to_string(row.trial);
    out += "," + format_double(row.phi_k);
    out += "," + format_double(row.r_k);
    out += "," + format_double(row.eps_tail);
    out += "," + format_double(row.abs_err_vs_ref);
    out += "," + row.ref_kind;
    out += ",";
    out += row.degenerate ? "1" : "0";
    out += "\n";
  }
  return out;
}

std::string concentration_csv(std::span<const ConcentrationRow> rows) {
  std::string out = "K,lambda,trials,exceed_count,empirical_tail,theoretical_bound\n";
  for (const ConcentrationRow& row : rows) {
    out += std::to_string(row.k);
    out += "," + format_double(row.lambda);
    out += "," + std::to_string(row.trials);
    out += "," + std::to_string(row.exceed_count);
    out += "," + format_double(row.empirical_tail);
    out += "," + format_double(row.theoretical_bound);
    out += "\n";
  }
  return out;
}

std::string convergence_jsonl(std::span<const ConvergenceRow> rows) {
  std::string out;
  for (const ConvergenceRow& row : rows) {
    out += "{\"prompt_id\":\"" + row.prompt_id + "\"";
    out += ",\"K\":" + std::to_string(row.k);
    out += ",\"trial\":" + std::to_string(row.trial);
    out += ",\"phi_k\":" + json_double(row.phi_k);
    out += ",\"r_k\":" + json_double(row.r_k);
    out += ",\"eps_tail\":" + json_double(row.eps_tail);
    out += ",\"abs_err_vs_ref\":" + json_double(row.abs_err_vs_ref);
    out += ",\"ref_kind\":\"" + row.ref_kind;
    out += "\",\"degenerate\":";
    out += row.degenerate ? "true" : "false";
    out += "}\n";
  }
  return out;
}

std::string concentration_jsonl(std::span<const ConcentrationRow> rows) {
  std::string out;
  for (const ConcentrationRow& row : rows) {
    out += "{\"K\":" + std::to_string(row.k);
    out += ",\"lambda\":" + json_double(row.lambda);
    out += ",\"trials\":" + std::to_string(row.trials);
    out += ",\"exceed_count\":" + std::to_string(row.exceed_count);
    out += ",\"empirical_tail\":" + json_double(row.empirical_tail);
    out += ",\"theoretical_bound\":" + json_double(row.theoretical_bound);
    out += "}\n";
  }
  return out;
}

std::string grid_csv(const SurfaceGrid& grid) {
  std::string out = "i,j,u,v,phi,valid\n";
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      out += std::to_string(i);
      out += "," + std::to_string(j);
      out += "," + format_double(grid.u_axis[i]);
      out += "," + format_double(grid.v_axis[j]);
      out += "," + format_double(grid.at(i, j));
      out += ",";
      out += grid.is_valid(i, j) ? "1" : "0";
      out += "\n";
    }
  }
  return out;
}

std::string isohypses_json(std::span<const IsohypseSet> sets) {
  std::string out = "[";
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (s) out += ",";
    out += "{\"level\":" + json_double(sets[s].level);
    out += ",\"polylines\":[";
    for (std::size_t p = 0; p < sets[s].polylines.size(); ++p) {
      if (p) out += ",";
      out += "[";
      const auto& poly = sets[s].polylines[p];
      for (std::size_t v = 0; v < poly.size(); ++v) {
        if (v) out += ",";
        out += "[" + format_double(poly[v][0]) + "," + format_double(poly[v][1]) + "]";
      }
      out += "]";
    }
    out += "],\"closed\":[";
    for (std::size_t p = 0; p < sets[s].closed.size(); ++p) {
      if (p) out += ",";
      out += sets[s].closed[p] ? "true" : "false";
    }
    out += "]}";
  }
  out += "]";
  return out;
}

}  // namespace dps
