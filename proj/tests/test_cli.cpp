#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "subnyq/io.hpp"
#include "support.hpp"

using namespace subnyq;
using namespace subnyq::test;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("subnyq_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SUBNYQ_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path small_config(const fs::path& dir, int L = 0) {
  const fs::path p = dir / "config.json";
  io::write_text(p, io::json{{"fs_hz", "25M"},
                             {"t0_s", "2u"},
                             {"L", L},
                             {"sigma_tau_s", "1n"},
                             {"sigma_nu_hz", "5k"},
                             {"ghq_nodes", 5}}
                        .dump(2));
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("engineering numbers", "[cli]") {
  CHECK(io::parse_engineering("25M") == 25e6);
  CHECK_THAT(io::parse_engineering("2u"), WithinRel(2e-6, 1e-15));
  CHECK(io::parse_engineering("5k") == 5e3);
  CHECK(io::parse_engineering("1e-9") == 1e-9);
  CHECK_THAT(io::parse_engineering("3n "), WithinRel(3e-9, 1e-15));
  CHECK(io::parse_engineering("-0.5") == -0.5);
  for (const char* bad : {"", "abc", "5x", "1k2", "M"}) CHECK_THROWS_AS(io::parse_engineering(bad), Error);
}

TEST_CASE("configuration parsing", "[cli]") {
  const io::json base{{"fs_hz", "25M"}, {"t0_s", "2u"}, {"sigma_tau_s", 1e-9}, {"sigma_nu_hz", "5k"}};
  const io::RunConfig rc = io::parse_config(base);
  CHECK(rc.system.L == 0);
  CHECK(rc.system.N == 50);
  CHECK(rc.system.pt == 1.0);
  CHECK(rc.system.n0 == 1.0);
  CHECK(rc.prior.mu_tau == 0.0);
  CHECK(rc.nodes == 15);
  CHECK(rc.code_seed == 1);
  CHECK(rc.source.at("fs_hz") == 25e6);

  io::json j = base;
  j["L"] = 2;
  j["ghq_nodes"] = 7;
  CHECK(io::parse_config(j).system.K == 250);
  CHECK(io::parse_config(j).nodes == 7);

  j = base;
  j["bandwidth"] = 1;
  CHECK_THROWS_AS(io::parse_config(j), Error);
  j = base;
  j.erase("t0_s");
  CHECK_THROWS_AS(io::parse_config(j), Error);
  j = base;
  j["L"] = 1.5;
  CHECK_THROWS_AS(io::parse_config(j), Error);
  j = base;
  j["ghq_nodes"] = 0;
  CHECK_THROWS_AS(io::parse_config(j), Error);
  j = base;
  j["fs_hz"] = true;
  CHECK_THROWS_AS(io::parse_config(j), Error);
  CHECK_THROWS_AS(io::parse_config(io::json::array()), Error);
  try {
    io::parse_config(io::json::array());
  } catch (const Error& e) {
    CHECK(e.is_config_error());
  }
}

TEST_CASE("result files", "[cli]") {
  const fs::path dir = scratch("files");
  std::mt19937_64 rng(131);
  const CVec x = random_cvec(12, rng);
  io::write_text(dir / "x.csv", io::spectrum_csv(x));
  CHECK(io::read_spectrum_csv(dir / "x.csv") == x);
  CHECK(slurp(dir / "x.csv").rfind("index,re,im\n-6,", 0) == 0);

  McReport r;
  r.psnr_dbhz = {40.0, 45.0};
  r.nmse_tau = {1.0, 0.9};
  r.nmse_nu = {1.0, 0.95};
  r.bcrlb_tau = {0.99, 0.8};
  r.bcrlb_nu = {0.99, 0.9};
  r.failures = {0, 1};
  r.trials = 100;
  io::write_text(dir / "report.csv", io::report_csv(r));
  const auto rows = read_csv(dir / "report.csv");
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) CHECK(row.size() == 6);

  const SystemConfig c = default_config(0);
  const FrequencyOps ops(c);
  const ParameterPrior prior = default_prior();
  DesignOptions opt;
  opt.nodes = 5;
  opt.restarts = 1;
  const ReferenceSystem ref = make_reference(ops, prior, opt.nodes);
  const DesignResult d = optimize_design(ops, 0.5, prior, ref, opt);
  const auto files = io::write_design(d, dir, "a_");
  REQUIRE(files.size() == 4);
  for (const auto& f : files) CHECK(fs::exists(f));
  CHECK(io::read_spectrum_csv(dir / "a_g.csv") == d.g);
  const io::json dj = io::json::parse(slurp(dir / "a_design.json"));
  CHECK(dj.at("alpha") == 0.5);
  CHECK(dj.at("iterations") == d.iterations);

  ParetoResult empty;
  CHECK(io::write_pareto(empty, dir / "empty").empty());
  CHECK_FALSE(fs::exists(dir / "empty"));
}

TEST_CASE("command line exit codes", "[cli]") {
  const fs::path dir = scratch("codes");
  const fs::path cfg = small_config(dir);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("simulate --out " + (dir / "o").string()) == 2);
  CHECK(run_cli("optimize --config " + (dir / "missing.json").string() + " --out " + (dir / "o").string()) == 2);
  CHECK(run_cli("optimize --config " + cfg.string() + " --out " + (dir / "o").string() + " --alpha 2") == 2);

  io::write_text(dir / "bad.json", R"({"fs_hz": "25M", "t0_s": "2u", "sigma_tau_s": "1n", "sigma_nu_hz": "5k", "extra": 1})");
  CHECK(run_cli("reference --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()) == 2);
  io::write_text(dir / "broken.json", "{ not json");
  CHECK(run_cli("reference --config " + (dir / "broken.json").string() + " --out " + (dir / "o").string()) == 2);
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " + (dir / "o").string() + " --alpha 0.5 --trials 10") ==
        2);

  // Zero noise level: the covariance cannot be inverted.
  io::write_text(dir / "silent.json",
                 R"({"fs_hz": "25M", "t0_s": "2u", "sigma_tau_s": "1n", "sigma_nu_hz": "5k", "n0": 0, "ghq_nodes": 3})");
  CHECK(run_cli("optimize --alpha 0.5 --config " + (dir / "silent.json").string() + " --out " + (dir / "o").string()) ==
        3);
}

TEST_CASE("reference spectra", "[cli]") {
  const fs::path dir = scratch("reference");
  const fs::path cfg = small_config(dir, 1);
  REQUIRE(run_cli("reference --config " + cfg.string() + " --out " + (dir / "r").string()) == 0);
  for (const char* f : {"rpc.csv", "lfm.csv", "lowpass.csv", "manifest.json"}) CHECK(fs::exists(dir / "r" / f));
  const CVec lp = io::read_spectrum_csv(dir / "r" / "lowpass.csv");
  CHECK(lp.size() == 150);
  CHECK(lp.sum() == cd(50.0, 0.0));
  const io::json m = io::json::parse(slurp(dir / "r" / "manifest.json"));
  CHECK(m.at("command") == "reference");
  CHECK(m.at("config").at("L") == 1);
  CHECK(m.contains("versions"));
}

TEST_CASE("pareto sweep and optimization", "[cli]") {
  const fs::path dir = scratch("pareto");
  const fs::path cfg = small_config(dir);

  REQUIRE(run_cli("pareto --restarts 1 --config " + cfg.string() + " --out " + (dir / "p").string()) == 0);
  const auto rows = read_csv(dir / "p" / "pareto.csv");
  REQUIRE(rows.size() == 22);
  CHECK(rows[0][0] == "alpha");
  CHECK(std::stod(rows[1][0]) == 0.0);
  CHECK(std::stod(rows[21][0]) == 1.0);
  CHECK(fs::exists(dir / "p" / "best_design.json"));
  CHECK(fs::exists(dir / "p" / "alpha_0.5_g.csv"));

  // Delay-only weighting pushes the transmit power to the band edges.
  REQUIRE(run_cli("optimize --alpha 1 --restarts 1 --config " + cfg.string() + " --out " + (dir / "a").string()) == 0);
  for (const char* f : {"design.json", "g.csv", "h.csv", "trace.csv", "manifest.json"}) CHECK(fs::exists(dir / "a" / f));
  const CVec g = io::read_spectrum_csv(dir / "a" / "g.csv");
  const int K = static_cast<int>(g.size());
  double outer = 0.0;
  for (int p = 0; p < K; ++p) {
    if (std::abs(p - K / 2) >= K / 3) outer += std::norm(g[p]);
  }
  CHECK(outer >= 0.7 * g.squaredNorm());
  CHECK_THAT(g.squaredNorm(), WithinRel(1.0, 1e-9));

  // Reruns are byte-identical.
  REQUIRE(run_cli("optimize --alpha 1 --restarts 1 --config " + cfg.string() + " --out " + (dir / "b").string()) == 0);
  for (const char* f : {"design.json", "g.csv", "h.csv", "trace.csv"}) CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
}

TEST_CASE("ambiguity and simulation outputs", "[cli]") {
  const fs::path dir = scratch("outputs");
  const fs::path cfg = small_config(dir);
  REQUIRE(run_cli("ambiguity --alpha 0.5 --restarts 1 --grid 11 --config " + cfg.string() + " --out " +
                  (dir / "a").string()) == 0);
  const auto classic = read_csv(dir / "a" / "ambiguity_classic.csv");
  CHECK(classic.size() == 1 + 11 * 11);
  CHECK(fs::exists(dir / "a" / "ambiguity_map.csv"));

  REQUIRE(run_cli("ambiguity --which classic --system reference --grid 5 --config " + cfg.string() + " --out " +
                  (dir / "r").string()) == 0);
  CHECK(fs::exists(dir / "r" / "ambiguity_classic.csv"));
  CHECK_FALSE(fs::exists(dir / "r" / "ambiguity_map.csv"));
  CHECK(run_cli("ambiguity --which neither --alpha 0.5 --config " + cfg.string() + " --out " + (dir / "x").string()) ==
        2);

  REQUIRE(run_cli("simulate --alpha 0.5 --restarts 1 --trials 100 --psnr-min 40 --psnr-max 60 --psnr-step 10 --config " +
                  cfg.string() + " --out " + (dir / "s").string()) == 0);
  const auto rep = read_csv(dir / "s" / "report.csv");
  REQUIRE(rep.size() == 4);
  CHECK(rep[0][0] == "psnr_dbhz");
  CHECK(fs::exists(dir / "s" / "reference_report.csv"));
}
