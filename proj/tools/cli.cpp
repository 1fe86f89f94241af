#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dps/dpf.hpp"
#include "dps/experiments.hpp"
#include "dps/io.hpp"
#include "dps/remote.hpp"
#include "dps/rng.hpp"
#include "dps/seqmodel.hpp"
#include "dps/surface.hpp"
#include "dps/svg.hpp"
#include "dps/version.hpp"

namespace dps::cli {

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Option plumbing
// ---------------------------------------------------------------------------

enum class Backend { Toy, Analytic2d, Remote };

struct ModelSpec {
  Backend backend = Backend::Toy;
  std::string raw;
  std::string toy_path;      // toy:<path>
  double alpha = 0.0;        // analytic2d:alpha=<x>
  std::string remote_model;  // remote:<model-name>
};

struct CommonOpts {
  std::string model;
  std::uint64_t seed = 0;
  double top_p = 0.9;
  double temperature = 1.0;
  std::string prompt;  // toy prompt key / remote prompt text
  std::string coords;  // "u,v" for analytic2d prompts
  // remote transport
  std::string base_url = "http://127.0.0.1:8000";
  std::string api_key_env;
  double timeout = 30.0;
  int retries = 3;
  double backoff = 0.1;
  int max_in_flight = 4;
  int n_max = 8;
  int max_tokens = 16;
};

ModelSpec parse_model_spec(const std::string& value) {
  ModelSpec spec;
  spec.raw = value;
  const auto fail = [&value]() -> ModelSpec {
    throw DomainError("model spec '" + value +
                      "' must be toy:<path>, analytic2d:alpha=<x>, or "
                      "remote:<model-name>");
  };
  if (value.rfind("toy:", 0) == 0) {
    spec.backend = Backend::Toy;
    spec.toy_path = value.substr(4);
    if (spec.toy_path.empty()) return fail();
  } else if (value.rfind("analytic2d:", 0) == 0) {
    spec.backend = Backend::Analytic2d;
    const std::string payload = value.substr(11);
    if (payload.rfind("alpha=", 0) != 0) return fail();
    try {
      std::size_t used = 0;
      spec.alpha = std::stod(payload.substr(6), &used);
      if (used != payload.size() - 6) return fail();
    } catch (const std::exception&) {
      return fail();
    }
  } else if (value.rfind("remote:", 0) == 0) {
    spec.backend = Backend::Remote;
    spec.remote_model = value.substr(7);
    if (spec.remote_model.empty()) return fail();
  } else {
    return fail();
  }
  return spec;
}

ToyModel make_toy_model(const ModelSpec& spec) {
  if (spec.backend == Backend::Toy) return load_toy_model(spec.toy_path);
  // Route the analytic model through the JSON validator too.
  return parse_toy_model(
      R"({"kind":"analytic2d","vocab_size":2,"gen_len":1,"alpha":)" +
      format_double(spec.alpha) + "}");
}

RemoteConfig make_remote_config(const ModelSpec& spec, const CommonOpts& o) {
  RemoteConfig cfg;
  cfg.base_url = o.base_url;
  cfg.model_name = spec.remote_model;
  cfg.api_key_env = o.api_key_env;
  cfg.request_timeout = o.timeout;
  cfg.max_retries = o.retries;
  cfg.backoff_base = o.backoff;
  cfg.max_in_flight = o.max_in_flight;
  cfg.n_max = o.n_max;
  cfg.max_tokens = o.max_tokens;
  cfg.sampler.temperature = o.temperature;
  cfg.sampler.top_p = o.top_p;
  return cfg;
}

SamplerConfig make_sampler(const CommonOpts& o) {
  SamplerConfig cfg;
  cfg.temperature = o.temperature;
  cfg.top_p = o.top_p;
  return cfg;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream stream(text);
  while (std::getline(stream, item, sep)) parts.push_back(item);
  return parts;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw DomainError("cannot parse " + what + " from '" + text + "'");
  }
}

int parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw DomainError("cannot parse " + what + " from '" + text + "'");
  }
}

std::vector<double> parse_doubles(const std::string& csv, const std::string& what) {
  std::vector<double> out;
  for (const std::string& part : split(csv, ',')) out.push_back(parse_double(part, what));
  if (out.empty()) throw DomainError(what + " list is empty");
  return out;
}

std::vector<int> parse_ints(const std::string& csv, const std::string& what) {
  std::vector<int> out;
  for (const std::string& part : split(csv, ',')) out.push_back(parse_int(part, what));
  if (out.empty()) throw DomainError(what + " list is empty");
  return out;
}

Prompt make_prompt(const CommonOpts& o) {
  Prompt prompt;
  if (!o.prompt.empty()) prompt.key = o.prompt;
  if (!o.coords.empty()) {
    const std::vector<double> uv = parse_doubles(o.coords, "--coords");
    if (uv.size() != 2) throw DomainError("--coords expects exactly u,v");
    prompt.coords = {uv[0], uv[1]};
  }
  return prompt;
}

// ---------------------------------------------------------------------------
// Serialization helpers
// ---------------------------------------------------------------------------

std::string json_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

std::string meta_json(const std::string& command, const ModelSpec& spec,
                      std::uint64_t seed, const CommonOpts& o,
                      const std::string& params) {
  std::string out = "{\"tool_version\":\"" + std::string(kVersion) + "\"";
  out += ",\"command\":\"" + command + "\"";
  out += ",\"model_spec\":\"" + json_escape(spec.raw) + "\"";
  out += ",\"seed\":" + std::to_string(seed);
  out += ",\"sampler\":{\"temperature\":" + format_double(o.temperature) +
         ",\"top_p\":" + format_double(o.top_p) + "}";
  if (!params.empty()) out += ",\"params\":{" + params + "}";
  out += "}";
  return out;
}

std::string remote_estimate_json(const RemoteEstimate& est) {
  std::string out = "{";
  out += "\"phi_k\":" + format_double(est.phi_k);
  out += ",\"delta_k\":" + format_double(est.delta_k);
  out += ",\"top1\":\"" + json_escape(est.top1) + "\"";
  out += ",\"top2\":\"" + json_escape(est.top2) + "\"";
  out += ",\"r_k\":" + format_double(est.r_k);
  out += ",\"r_k_local\":";
  out += est.r_k_local ? format_double(*est.r_k_local) : "null";
  out += ",\"eps_tail\":" + format_double(est.eps_tail);
  out += ",\"distinct_count\":" + std::to_string(est.distinct_count);
  out += "}";
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DomainError("cannot open " + path.string() + " for writing");
  file << content;
  if (!file) throw DomainError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct DpfOpts {
  CommonOpts common;
  int k = 1000;
  double delta = 0.05;
  std::string lambdas = "0.01,0.05,0.2,1";
};

int cmd_dpf(const DpfOpts& o, std::ostream& out) {
  const ModelSpec spec = parse_model_spec(o.common.model);
  const std::vector<double> lambdas = parse_doubles(o.lambdas, "--lambdas");
  std::string estimate_json;
  BoundReport bounds;
  if (spec.backend == Backend::Remote) {
    const RemoteConfig cfg = make_remote_config(spec, o.common);
    const RemoteEstimate est = remote_k_dpf(cfg, o.common.prompt, o.k);
    bounds = make_bound_report(est.r_k, est.eps_tail, o.k, o.delta, lambdas);
    estimate_json = remote_estimate_json(est);
  } else {
    const ToyModel model = make_toy_model(spec);
    const SampleSet set = draw_sample_set(model, make_prompt(o.common), o.k,
                                          make_sampler(o.common), o.common.seed);
    const PotentialEstimate est = k_dpf(set);
    bounds = make_bound_report(est.r_k, est.eps_tail, o.k, o.delta, lambdas);
    estimate_json = to_json(est);
  }
  out << "{\"meta\":"
      << meta_json("dpf", spec, o.common.seed, o.common,
                   "\"k\":" + std::to_string(o.k) +
                       ",\"delta\":" + format_double(o.delta))
      << ",\"estimate\":" << estimate_json << ",\"bounds\":" << to_json(bounds)
      << "}\n";
  return 0;
}

struct OracleOpts {
  CommonOpts common;
  std::uint64_t cap = kDefaultEnumerationCap;
};

int cmd_oracle(const OracleOpts& o, std::ostream& out, std::ostream& err) {
  const ModelSpec spec = parse_model_spec(o.common.model);
  if (spec.backend == Backend::Remote) {
    err << "error: oracle requires an enumerable toy model\n";
    return 1;
  }
  const ToyModel model = make_toy_model(spec);
  const ExactPotential exact = exact_dpf(model, make_prompt(o.common), o.cap);
  out << "{\"meta\":" << meta_json("oracle", spec, o.common.seed, o.common, "")
      << ",\"exact\":" << to_json(exact) << "}\n";
  return 0;
}

struct ConvergeOpts {
  CommonOpts common;
  std::string prompts = "default";
  std::string k_list = "10,100,1000";
  int k_ref = 20000;
  int repeats = 5;
  std::string out_dir;
  std::string format = "csv";
};

std::vector<ConvergenceRow> remote_convergence(const RemoteConfig& cfg,
                                               const std::string& prompt_text,
                                               const std::vector<int>& k_list,
                                               int k_ref, int repeats) {
  const std::string prompt_id = prompt_text.empty() ? "default" : prompt_text;
  const RemoteEstimate ref = remote_k_dpf(cfg, prompt_text, k_ref);
  std::vector<ConvergenceRow> rows;
  for (const int k : k_list) {
    for (int trial = 0; trial < repeats; ++trial) {
      ConvergenceRow row;
      row.prompt_id = prompt_id;
      row.k = k;
      row.trial = trial;
      row.ref_kind = "kref";
      try {
        const RemoteEstimate est = remote_k_dpf(cfg, prompt_text, k);
        row.phi_k = est.phi_k;
        row.r_k = est.r_k;
        row.eps_tail = est.eps_tail;
        row.abs_err_vs_ref = std::abs(est.phi_k - ref.phi_k);
      } catch (const DegenerateSample&) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.phi_k = row.r_k = row.eps_tail = row.abs_err_vs_ref = nan;
        row.degenerate = true;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

int cmd_converge(const ConvergeOpts& o, std::ostream& out) {
  const ModelSpec spec = parse_model_spec(o.common.model);
  const std::vector<int> k_list = parse_ints(o.k_list, "--k-list");

  std::vector<ConvergenceRow> rows;
  if (spec.backend == Backend::Remote) {
    const RemoteConfig cfg = make_remote_config(spec, o.common);
    rows = remote_convergence(cfg, o.common.prompt, k_list, o.k_ref, o.repeats);
  } else {
    const ToyModel model = make_toy_model(spec);
    std::vector<Prompt> prompts;
    if (spec.backend == Backend::Analytic2d) {
      prompts.push_back(make_prompt(o.common));
    } else {
      for (const std::string& key : split(o.prompts, ',')) {
        Prompt prompt;
        if (!key.empty()) prompt.key = key;
        prompts.push_back(std::move(prompt));
      }
      if (prompts.empty()) prompts.push_back(Prompt{});
    }
    ConvergenceConfig cfg;
    cfg.k_list = k_list;
    cfg.k_ref = o.k_ref;
    cfg.repeats = o.repeats;
    cfg.seed = o.common.seed;
    cfg.sampler = make_sampler(o.common);
    rows = run_convergence(model, prompts, cfg);
  }

  const std::string table =
      o.format == "json" ? convergence_jsonl(rows) : convergence_csv(rows);
  const std::string meta = meta_json(
      "converge", spec, o.common.seed, o.common,
      "\"k_ref\":" + std::to_string(o.k_ref) +
          ",\"repeats\":" + std::to_string(o.repeats) + ",\"k_list\":\"" +
          json_escape(o.k_list) + "\"");
  if (o.out_dir.empty()) {
    out << table;
  } else {
    fs::create_directories(o.out_dir);
    const std::string name = o.format == "json" ? "converge.jsonl" : "converge.csv";
    write_file(fs::path(o.out_dir) / name, table);
    write_file(fs::path(o.out_dir) / "converge.meta.json", meta + "\n");
  }
  return 0;
}

struct ConcentrateOpts {
  CommonOpts common;
  std::string prompts = "default";
  std::string k_list = "16,64,256,1024";
  std::string lambdas = "0.01,0.05,0.2,1";
  int trials = 500;
  std::string out_dir;
  std::string format = "csv";
};

int cmd_concentrate(const ConcentrateOpts& o, std::ostream& out, std::ostream& err) {
  const ModelSpec spec = parse_model_spec(o.common.model);
  if (spec.backend == Backend::Remote) {
    err << "error: concentration requires an enumerable toy model\n";
    return 1;
  }
  const ToyModel model = make_toy_model(spec);
  std::vector<Prompt> prompts;
  if (spec.backend == Backend::Analytic2d) {
    prompts.push_back(make_prompt(o.common));
  } else {
    for (const std::string& key : split(o.prompts, ',')) {
      Prompt prompt;
      if (!key.empty()) prompt.key = key;
      prompts.push_back(std::move(prompt));
    }
    if (prompts.empty()) prompts.push_back(Prompt{});
  }
  ConcentrationConfig cfg;
  cfg.k_list = parse_ints(o.k_list, "--k-list");
  cfg.lambdas = parse_doubles(o.lambdas, "--lambdas");
  cfg.trials = o.trials;
  cfg.seed = o.common.seed;
  cfg.sampler = make_sampler(o.common);
  const std::vector<ConcentrationRow> rows = run_concentration(model, prompts, cfg);

  const std::string table =
      o.format == "json" ? concentration_jsonl(rows) : concentration_csv(rows);
  const std::string meta = meta_json(
      "concentrate", spec, o.common.seed, o.common,
      "\"trials\":" + std::to_string(o.trials) + ",\"k_list\":\"" +
          json_escape(o.k_list) + "\",\"lambdas\":\"" + json_escape(o.lambdas) +
          "\"");
  if (o.out_dir.empty()) {
    out << table;
  } else {
    fs::create_directories(o.out_dir);
    const std::string name =
        o.format == "json" ? "concentrate.jsonl" : "concentrate.csv";
    write_file(fs::path(o.out_dir) / name, table);
    write_file(fs::path(o.out_dir) / "concentrate.meta.json", meta + "\n");
  }
  return 0;
}

struct SurfaceOpts {
  CommonOpts common;
  std::string points_file;
  int lattice = 21;
  int grid = 101;
  int k = 2500;
  std::string method = "linear";
  std::string levels = "auto";
  std::string source = "estimate";
  std::string out_dir = ".";
};

struct EmbeddedPoint {
  std::string id;
  std::array<double, 2> uv;
};

std::vector<EmbeddedPoint> load_points_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ParseError("cannot open points file " + path);
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (first && !fields.empty() && fields[0] == "prompt_id") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() < 3) {
      throw ParseError("points file row needs prompt_id plus >= 2 coordinates");
    }
    ids.push_back(fields[0]);
    std::vector<double> row;
    for (std::size_t f = 1; f < fields.size(); ++f) {
      row.push_back(parse_double(fields[f], "points file value"));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("points file rows have inconsistent widths");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("points file " + path + " has no rows");

  std::vector<std::array<double, 2>> coords;
  if (rows.front().size() == 2) {
    for (const std::vector<double>& row : rows) coords.push_back({row[0], row[1]});
  } else {
    coords = pca_2d(rows);  // higher-dimensional embeddings project first
  }
  const std::vector<std::array<double, 2>> unit = normalize_coords(coords);
  std::vector<EmbeddedPoint> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out.push_back({ids[i], unit[i]});
  return out;
}

std::vector<EmbeddedPoint> lattice_points(int lattice) {
  if (lattice < 2) throw DomainError("--lattice must be >= 2");
  std::vector<EmbeddedPoint> out;
  out.reserve(static_cast<std::size_t>(lattice) * lattice);
  for (int i = 0; i < lattice; ++i) {
    for (int j = 0; j < lattice; ++j) {
      EmbeddedPoint p;
      p.id = std::to_string(i) + "_" + std::to_string(j);
      p.uv = {static_cast<double>(i) / (lattice - 1),
              static_cast<double>(j) / (lattice - 1)};
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<double> auto_levels(const SurfaceGrid& grid) {
  std::vector<double> positive;
  for (std::size_t idx = 0; idx < grid.values.size(); ++idx) {
    if (grid.valid[idx] && grid.values[idx] > 0.0) {
      positive.push_back(grid.values[idx]);
    }
  }
  std::vector<double> levels{kBoundaryLevel};
  if (!positive.empty()) {
    std::sort(positive.begin(), positive.end());
    const std::size_t n = positive.size();
    for (std::size_t quartile = 1; quartile <= 3; ++quartile) {
      levels.push_back(positive[quartile * (n - 1) / 4]);
    }
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

int cmd_surface(const SurfaceOpts& o, std::ostream& err) {
  const ModelSpec spec = parse_model_spec(o.common.model);
  if (o.method != "linear" && o.method != "nearest") {
    throw DomainError("--method must be linear or nearest");
  }
  if (o.source != "estimate" && o.source != "exact") {
    throw DomainError("--source must be estimate or exact");
  }
  if (spec.backend == Backend::Remote && o.source == "exact") {
    err << "error: exact surfaces require an enumerable toy model\n";
    return 1;
  }

  std::vector<EmbeddedPoint> embedded;
  if (!o.points_file.empty()) {
    embedded = load_points_file(o.points_file);
  } else {
    if (spec.backend != Backend::Analytic2d) {
      throw DomainError("lattice surfaces need an analytic2d model; pass "
                        "--points for other backends");
    }
    embedded = lattice_points(o.lattice);
  }

  std::optional<ToyModel> model;
  std::optional<RemoteConfig> remote_cfg;
  if (spec.backend == Backend::Remote) {
    remote_cfg = make_remote_config(spec, o.common);
  } else {
    model = make_toy_model(spec);
  }

  std::vector<SamplePoint> points;
  points.reserve(embedded.size());
  for (std::size_t i = 0; i < embedded.size(); ++i) {
    const EmbeddedPoint& p = embedded[i];
    SamplePoint sample;
    sample.prompt_id = p.id;
    sample.u = p.uv[0];
    sample.v = p.uv[1];
    try {
      if (spec.backend == Backend::Remote) {
        sample.phi = remote_k_dpf(*remote_cfg, p.id, o.k).phi_k;
      } else {
        Prompt prompt;
        prompt.key = p.id;
        prompt.coords = p.uv;
        if (o.source == "exact") {
          sample.phi = exact_dpf(*model, prompt).phi_inf;
        } else {
          const SampleSet set =
              draw_sample_set(*model, prompt, o.k, make_sampler(o.common),
                              derive_seed(o.common.seed, {i}));
          sample.phi = k_dpf(set).phi_k;
        }
      }
    } catch (const DegenerateSample&) {
      continue;  // undefined potential at this prompt; leave the node masked
    }
    points.push_back(std::move(sample));
  }

  const InterpMethod method =
      o.method == "linear" ? InterpMethod::Linear : InterpMethod::Nearest;
  const SurfaceGrid grid = interpolate_grid(points, o.grid, o.grid, method);
  const std::vector<double> levels = o.levels == "auto"
                                         ? auto_levels(grid)
                                         : parse_doubles(o.levels, "--levels");
  const std::vector<IsohypseSet> sets = extract_isohypses(grid, levels);

  const std::string meta = meta_json(
      "surface", spec, o.common.seed, o.common,
      "\"grid\":" + std::to_string(o.grid) + ",\"k\":" + std::to_string(o.k) +
          ",\"method\":\"" + o.method + "\",\"source\":\"" + o.source +
          "\",\"points\":" + std::to_string(points.size()));
  SvgStyle style;
  style.metadata_json = meta;

  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  write_file(dir / "grid.csv", grid_csv(grid));
  write_file(dir / "grid.meta.json", meta + "\n");
  write_file(dir / "isohypses.json", isohypses_json(sets) + "\n");
  write_file(dir / "isohypses.meta.json", meta + "\n");
  write_file(dir / "surface.svg", render_svg(grid, sets, style));
  return 0;
}

void add_common_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--model", o.model,
                  "model spec: toy:<path> | analytic2d:alpha=<x> | "
                  "remote:<model-name>")
      ->required();
  cmd->add_option("--seed", o.seed, "root RNG seed (default 0)");
  cmd->add_option("--top-p", o.top_p, "nucleus clipping probability (default 0.9)");
  cmd->add_option("--temperature", o.temperature, "sampling temperature (default 1)");
  cmd->add_option("--prompt", o.prompt,
                  "prompt key (toy) or prompt text (remote); empty selects the "
                  "default prompt");
  cmd->add_option("--coords", o.coords, "prompt coordinates u,v (analytic2d)");
  cmd->add_option("--base-url", o.base_url, "remote server base URL");
  cmd->add_option("--api-key-env", o.api_key_env,
                  "environment variable holding the API key");
  cmd->add_option("--timeout", o.timeout, "remote request timeout in seconds");
  cmd->add_option("--retries", o.retries, "remote retry budget");
  cmd->add_option("--backoff", o.backoff, "remote backoff base in seconds");
  cmd->add_option("--max-in-flight", o.max_in_flight,
                  "max concurrent remote requests");
  cmd->add_option("--n-max", o.n_max, "max draws per remote request");
  cmd->add_option("--max-tokens", o.max_tokens, "remote generation length");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"decision potential surface estimator", "dps"};
  app.require_subcommand(1);

  DpfOpts dpf_opts;
  CLI::App* dpf_cmd = app.add_subcommand("dpf", "estimate the potential from K draws");
  add_common_options(dpf_cmd, dpf_opts.common);
  dpf_cmd->add_option("--k", dpf_opts.k, "number of draws (default 1000)");
  dpf_cmd->add_option("--delta", dpf_opts.delta,
                      "confidence parameter for the absolute bound");
  dpf_cmd->add_option("--lambdas", dpf_opts.lambdas,
                      "comma-separated deviation thresholds");

  OracleOpts oracle_opts;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "exact potential by enumeration");
  add_common_options(oracle_cmd, oracle_opts.common);
  oracle_cmd->add_option("--cap", oracle_opts.cap, "enumeration size cap");

  ConvergeOpts converge_opts;
  CLI::App* converge_cmd =
      app.add_subcommand("converge", "error vs K convergence table");
  add_common_options(converge_cmd, converge_opts.common);
  converge_cmd->add_option("--prompts", converge_opts.prompts,
                           "comma-separated prompt keys");
  converge_cmd->add_option("--k-list", converge_opts.k_list,
                           "comma-separated ascending K values");
  converge_cmd->add_option("--k-ref", converge_opts.k_ref,
                           "reference K when enumeration is infeasible");
  converge_cmd->add_option("--repeats", converge_opts.repeats,
                           "trials per (prompt, K)");
  converge_cmd->add_option("--out", converge_opts.out_dir,
                           "output directory (stdout when omitted)");
  converge_cmd->add_option("--format", converge_opts.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  ConcentrateOpts concentrate_opts;
  CLI::App* concentrate_cmd =
      app.add_subcommand("concentrate", "tail probability vs bound table");
  add_common_options(concentrate_cmd, concentrate_opts.common);
  concentrate_cmd->add_option("--prompts", concentrate_opts.prompts,
                              "comma-separated prompt keys");
  concentrate_cmd->add_option("--k-list", concentrate_opts.k_list,
                              "comma-separated ascending K values");
  concentrate_cmd->add_option("--lambdas", concentrate_opts.lambdas,
                              "comma-separated deviation thresholds");
  concentrate_cmd->add_option("--trials", concentrate_opts.trials,
                              "sample sets per (prompt, K)");
  concentrate_cmd->add_option("--out", concentrate_opts.out_dir,
                              "output directory (stdout when omitted)");
  concentrate_cmd->add_option("--format", concentrate_opts.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  SurfaceOpts surface_opts;
  CLI::App* surface_cmd =
      app.add_subcommand("surface", "potential surface artifacts (CSV/JSON/SVG)");
  add_common_options(surface_cmd, surface_opts.common);
  surface_cmd->add_option("--points", surface_opts.points_file,
                          "points CSV: prompt_id,u,v or prompt_id,e1,...,eD");
  surface_cmd->add_option("--lattice", surface_opts.lattice,
                          "lattice side length when no points file is given");
  surface_cmd->add_option("--grid", surface_opts.grid, "output grid resolution");
  surface_cmd->add_option("--k", surface_opts.k,
                          "draws per prompt for estimated surfaces");
  surface_cmd->add_option("--method", surface_opts.method, "linear or nearest")
      ->check(CLI::IsMember({"linear", "nearest"}));
  surface_cmd->add_option("--levels", surface_opts.levels,
                          "comma-separated contour levels, or auto");
  surface_cmd->add_option("--source", surface_opts.source,
                          "phi per prompt: estimate (K draws) or exact (oracle)")
      ->check(CLI::IsMember({"estimate", "exact"}));
  surface_cmd->add_option("--out", surface_opts.out_dir, "output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(dpf_cmd)) return cmd_dpf(dpf_opts, out);
    if (app.got_subcommand(oracle_cmd)) return cmd_oracle(oracle_opts, out, err);
    if (app.got_subcommand(converge_cmd)) return cmd_converge(converge_opts, out);
    if (app.got_subcommand(concentrate_cmd)) {
      return cmd_concentrate(concentrate_opts, out, err);
    }
    if (app.got_subcommand(surface_cmd)) return cmd_surface(surface_opts, err);
    err << "error: no subcommand selected\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dps::cli
