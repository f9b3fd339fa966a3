#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "lgsim/errors.hpp"
#include "lgsim/units.hpp"
#include "lgsim_app/acceptance.hpp"
#include "lgsim_app/config.hpp"
#include "lgsim_app/experiments.hpp"

using namespace lgsim;
using namespace lgsim::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / "lgsim_cli_test" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

// Relative path -> content hash for every file below dir.
std::map<std::string, std::size_t> tree_hash(const fs::path& dir) {
  std::map<std::string, std::size_t> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = std::hash<std::string>{}(slurp(e.path()));
  return out;
}

ExperimentConfig small_lg(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.out = out;
  cfg.seed = 11;
  cfg.threads = 2;
  cfg.lg.n_records = 300;
  cfg.lg.acquisition.noise_to_peak = 5.0;
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LGSIM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config JSON round trip and defaults") {
  ExperimentConfig cfg;
  CHECK(cfg.physical.kappa_hz == 30.3e6);
  CHECK(cfg.physical.chi_hz == 1.75e6);
  CHECK(cfg.lg.acquisition.noise_to_peak == 60.0);
  cfg.seed = 99;
  cfg.lg.rabi_hz = 9e6;
  cfg.spectra.nbar = {0.5, 2.0};
  const auto back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.seed == 99);
  CHECK(back.spectra.nbar == std::vector<double>{0.5, 2.0});

  // Partial files override only what they name.
  const auto part = ExperimentConfig::from_json(R"({"physical": {"t2_s": 1.2e-7}, "seed": 3})");
  CHECK(part.physical.t2_s == 1.2e-7);
  CHECK(part.physical.t1_s == 200e-9);
  CHECK(part.seed == 3);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"physical": {"kapa_hz": 1}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"physical": {"t1_s": "long"}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.json"), ConfigError);
  ExperimentConfig cfg;
  cfg.rabi.nbar.clear();
  CHECK_THROWS_AS(cfg.check(), ConfigError);
  cfg = {};
  cfg.lg.model = "classical";
  CHECK_THROWS_AS(cfg.check(), ConfigError);
  CHECK_THROWS_AS(make_source(ExperimentConfig{}, "classical", ExperimentConfig{}.lg.acquisition, 0.01),
                  ConfigError);
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("exit");
  std::ofstream(dir / "bad.json") << R"({"lg": {"unknown_knob": 1}})";
  CHECK(run_cli("lg --config " + (dir / "bad.json").string() + " --out " + dir.string()) == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("lg --model classical") == 2);
  CHECK(run_cli("lg --ideal --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "lg_ideal" / "lg_curve.csv"));
  std::ofstream(dir / "broken.json") << R"({"validate": {"normalization_sets": 5}, "physical": {"t2_s": 1e-7}})";
  // Quick validation with a perturbed Gamma_2 fails (status 1).
  CHECK(run_cli("validate --quick --config " + (dir / "broken.json").string() + " --out " + dir.string()) == 1);
  const auto report = nlohmann::json::parse(slurp(dir / "validate" / "report.json"));
  CHECK(report["all_passed"] == false);
  CHECK(report["failed"].size() >= 1);
}

TEST_CASE("perturbed Gamma_2 fails the criterion that depends on it") {
  std::ostringstream log;
  ExperimentConfig cfg;
  auto ok = run_acceptance(cfg, true, log, {1, 2, 3});
  CHECK(all_passed(ok));
  cfg.physical.t2_s = 120e-9;
  auto bad = run_acceptance(cfg, true, log, {1, 2, 3});
  CHECK_FALSE(all_passed(bad));
  // 120 ns moves the saturated population out of its +-0.001 band while the
  // LG maximum (1.342) stays inside +-0.03.
  CHECK(bad[0].passed);
  CHECK(bad[1].passed);
  CHECK_FALSE(bad[2].passed);
  CHECK(bad[2].name == "saturation population");
  CHECK(format_result(bad[2]).find("criterion  3 FAIL saturation population") == 0);
  CHECK(bad[3].skipped);
}

TEST_CASE("lg command is reproducible and embeds provenance") {
  const auto a = scratch("rep_a"), b = scratch("rep_b"), c = scratch("rep_c");
  std::ostringstream log;
  auto cfg = small_lg(a);
  CHECK(cmd_lg(cfg, log) == 0);
  cfg.out = b;
  cfg.threads = 1;  // thread count must not change any output
  CHECK(cmd_lg(cfg, log) == 0);
  const auto ha = tree_hash(a), hb = tree_hash(b);
  CHECK(ha.size() >= 8);
  CHECK(ha == hb);
  cfg.out = c;
  cfg.seed = 12;
  CHECK(cmd_lg(cfg, log) == 0);
  CHECK(tree_hash(c).at("lg_quantum/lg_curve.csv") != ha.at("lg_quantum/lg_curve.csv"));

  const auto csv = slurp(a / "lg_quantum" / "lg_curve.csv");
  CHECK(csv.rfind("# provenance: ", 0) == 0);
  CHECK(csv.find("\"seed\":\"11\"") != std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(a / "lg_quantum" / "summary.json"));
  CHECK(summary["records_per_tag"] == 300);
  CHECK(summary.contains("significance"));
}

TEST_CASE("ideal curve reaches 1.5 at T_R/6") {
  ExperimentConfig cfg;
  const auto c = ideal_curve(cfg);
  const auto mx = analytic::lg_max(c);
  CHECK(mx.f == doctest::Approx(1.5).epsilon(1e-7));
  CHECK(mx.tau == doctest::Approx(1.0 / (6 * cfg.lg.rabi_hz)).epsilon(1e-4));
}

TEST_CASE("Rabi run without measurement decays at the intrinsic Gamma_2") {
  ExperimentConfig cfg;
  const auto r = simulate_rabi(cfg, 5e6, 0.0, 1.5e-6, 301);
  CHECK(r.fit.gamma2 == doctest::Approx(1.0 / cfg.rabi.t2_s).epsilon(0.01));
  CHECK(units::rad_to_hz(r.fit.omega_rabi) == doctest::Approx(5e6).epsilon(0.01));
  CHECK(r.traj.xyz.front().z == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("spectrum cell agrees with the analytic model at weak measurement") {
  ExperimentConfig cfg;
  const auto c = spectrum_cell(cfg, 0.23, 5e6);
  CHECK(c.l1_error < 0.03);
  CHECK(c.analytic.size() == 308);
  std::size_t peak = 0;
  for (std::size_t k = 0; k < c.numeric.size(); ++k)
    if (c.numeric.density[k] > c.numeric.density[peak]) peak = k;
  CHECK(units::rad_to_hz(c.numeric.freqs[peak]) == doctest::Approx(5e6).epsilon(0.05));
}

TEST_CASE("spectrum cell is converged in the Fock cutoff at nbar = 3.9") {
  ExperimentConfig cfg;
  const auto base = spectrum_cell(cfg, 3.9, 10e6);
  const auto big = spectrum_cell(cfg, 3.9, 10e6, 2 * base.fock_dim);
  double diff = 0, norm = 0;
  for (std::size_t k = 1; k < base.numeric.size(); ++k) {
    diff += std::abs(base.numeric.density[k] - big.numeric.density[k]);
    norm += std::abs(big.numeric.density[k]);
  }
  CHECK(diff / norm < 0.005);
}
