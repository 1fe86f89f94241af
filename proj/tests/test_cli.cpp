#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  CliResult r;
  r.code = dps::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("dps_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kCoin = "toy:data/coin2.json";

}  // namespace

TEST_CASE("cli usage errors") {
  SUBCASE("unknown subcommand") {
    const CliResult r = run_cli({"frobnicate"});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
  }
  SUBCASE("missing required --model") {
    const CliResult r = run_cli({"dpf"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--model") != std::string::npos);
  }
  SUBCASE("help exits cleanly") {
    const CliResult r = run_cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("dpf") != std::string::npos);
    CHECK(r.out.find("surface") != std::string::npos);
  }
  SUBCASE("no subcommand") {
    const CliResult r = run_cli({});
    CHECK(r.code == 2);
  }
  SUBCASE("malformed model spec") {
    const CliResult r = run_cli({"oracle", "--model", "frob:xyz"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error:", 0) == 0);
  }
}

TEST_CASE("cli oracle") {
  SUBCASE("prints the exact potential") {
    const CliResult r = run_cli({"oracle", "--model", kCoin});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"phi_inf\":0.164401954") != std::string::npos);
    CHECK(r.out.find("\"space_size\":4") != std::string::npos);
  }
  SUBCASE("remote backends are rejected") {
    const CliResult r = run_cli({"oracle", "--model", "remote:gpt-mock"});
    CHECK(r.code == 1);
    CHECK(r.err.find("oracle requires an enumerable toy model") !=
          std::string::npos);
  }
  SUBCASE("analytic2d with coordinates") {
    const CliResult r = run_cli(
        {"oracle", "--model", "analytic2d:alpha=2", "--coords", "1,0"});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"phi_inf\":4") != std::string::npos);
  }
}

TEST_CASE("cli dpf") {
  SUBCASE("event A reproduces the oracle value") {
    const CliResult r = run_cli({"dpf", "--model", kCoin, "--k", "200",
                                 "--seed", "1", "--top-p", "1.0"});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"phi_k\":0.164401954") != std::string::npos);
    CHECK(r.out.find("\"abs_bound\":") != std::string::npos);
    CHECK(r.out.find("\"meta\":") != std::string::npos);
  }
  SUBCASE("clipped sampler degenerates to an error") {
    const CliResult r = run_cli({"dpf", "--model", kCoin, "--k", "50",
                                 "--top-p", "0.5"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error:", 0) == 0);
  }
}

TEST_CASE("cli converge determinism") {
  const fs::path dir_a = fresh_dir("conv_a");
  const fs::path dir_b = fresh_dir("conv_b");
  const std::vector<std::string> base{
      "converge", "--model", kCoin,        "--k-list", "10,100", "--repeats",
      "2",        "--seed",  "7",          "--top-p",  "1.0"};

  auto with_out = [&](const fs::path& dir) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back(dir.string());
    return args;
  };
  REQUIRE(run_cli(with_out(dir_a)).code == 0);
  REQUIRE(run_cli(with_out(dir_b)).code == 0);

  const std::string csv_a = slurp(dir_a / "converge.csv");
  const std::string csv_b = slurp(dir_b / "converge.csv");
  REQUIRE_FALSE(csv_a.empty());
  CHECK(csv_a == csv_b);
  CHECK(csv_a.rfind("prompt_id,K,trial,", 0) == 0);
  // 1 prompt x 2 K values x 2 repeats + header.
  CHECK(std::count(csv_a.begin(), csv_a.end(), '\n') == 5);
  CHECK(slurp(dir_a / "converge.meta.json") == slurp(dir_b / "converge.meta.json"));

  SUBCASE("json format writes jsonl rows") {
    const fs::path dir_j = fresh_dir("conv_j");
    std::vector<std::string> args = with_out(dir_j);
    args.push_back("--format");
    args.push_back("json");
    REQUIRE(run_cli(args).code == 0);
    const std::string jsonl = slurp(dir_j / "converge.jsonl");
    CHECK(jsonl.find("\"prompt_id\":\"default\"") != std::string::npos);
  }
}

TEST_CASE("cli concentrate") {
  const CliResult r = run_cli({"concentrate", "--model", kCoin, "--k-list",
                               "8,16", "--lambdas", "0.1,1", "--trials", "100",
                               "--top-p", "1.0"});
  CHECK(r.code == 0);
  CHECK(r.out.find("K,lambda,trials,exceed_count,empirical_tail,"
                   "theoretical_bound") != std::string::npos);
  SUBCASE("remote backends are rejected") {
    const CliResult rr = run_cli({"concentrate", "--model", "remote:gpt-mock"});
    CHECK(rr.code == 1);
    CHECK(rr.err.find("concentration requires an enumerable toy model") !=
          std::string::npos);
  }
}

TEST_CASE("cli surface") {
  const fs::path dir = fresh_dir("surf");
  const CliResult r =
      run_cli({"surface", "--model", "analytic2d:alpha=4", "--lattice", "5",
               "--grid", "21", "--source", "exact", "--out", dir.string()});
  REQUIRE(r.code == 0);
  for (const char* name :
       {"grid.csv", "grid.meta.json", "isohypses.json", "isohypses.meta.json",
        "surface.svg"}) {
    CHECK(fs::exists(dir / name));
  }
  const std::string grid = slurp(dir / "grid.csv");
  CHECK(grid.rfind("i,j,u,v,phi,valid\n", 0) == 0);
  // 21x21 nodes plus the header line.
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 21 * 21 + 1);
  const std::string iso = slurp(dir / "isohypses.json");
  CHECK(iso.find("\"level\"") != std::string::npos);
  const std::string svg = slurp(dir / "surface.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<metadata id=\"runinfo\">") != std::string::npos);

  SUBCASE("reruns render byte-identical artifacts") {
    const fs::path dir2 = fresh_dir("surf2");
    REQUIRE(run_cli({"surface", "--model", "analytic2d:alpha=4", "--lattice",
                     "5", "--grid", "21", "--source", "exact", "--out",
                     dir2.string()})
                .code == 0);
    CHECK(slurp(dir2 / "surface.svg") == svg);
    CHECK(slurp(dir2 / "grid.csv") == grid);
  }
  SUBCASE("points file with explicit coordinates") {
    const fs::path dir3 = fresh_dir("surf3");
    const fs::path pts = dir3 / "points.csv";
    {
      std::ofstream f(pts);
      f << "0,0,0.5\n1,0,1.5\n0,1,2.5\n1,1,3.5\n";
    }
    const CliResult rp =
        run_cli({"surface", "--model", kCoin, "--points", pts.string(),
                 "--grid", "11", "--source", "exact", "--method", "nearest",
                 "--out", dir3.string()});
    CHECK(rp.code == 0);
    CHECK(fs::exists(dir3 / "grid.csv"));
  }
}
