// lgsim command-line front end.
//
//   lgsim rabi|spectra|lg|validate [--config PATH] [--seed N] [--out DIR]
//         [--threads N] [--model NAME] [--ideal] [--quick]
//
// Exit status: 0 success, 1 validation failure or runtime error,
// 2 configuration error.

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "lgsim/errors.hpp"
#include "lgsim_app/acceptance.hpp"
#include "lgsim_app/config.hpp"
#include "lgsim_app/experiments.hpp"

int main(int argc, char** argv) {
  using namespace lgsim::app;
  CLI::App app{"Continuous-measurement Leggett-Garg simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, model;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool ideal = false, quick = false, dump = false;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_flag("--dump-config", dump, "print the effective configuration and exit");

  auto* rabi = app.add_subcommand("rabi", "ensemble Rabi oscillations under measurement");
  auto* spectra = app.add_subcommand("spectra", "analytic vs master-equation spectra");
  auto* lg = app.add_subcommand("lg", "Leggett-Garg detection pipeline");
  lg->add_option("--model", model, "quantum | macrospin | telegraph")
      ->check(CLI::IsMember({"quantum", "macrospin", "telegraph"}));
  lg->add_flag("--ideal", ideal, "noiseless, undamped curve");
  auto* validate = app.add_subcommand("validate", "run the acceptance criteria");
  validate->add_flag("--quick", quick, "fast subset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out = out_dir;
    if (threads) cfg.threads = *threads;
    if (!model.empty()) cfg.lg.model = model;
    if (ideal) cfg.lg.ideal = true;
    if (quick) cfg.validate.quick = true;
    cfg.check();
    if (dump) {
      std::cout << cfg.to_json() << '\n';
      return 0;
    }
    if (*rabi) return cmd_rabi(cfg, std::cout);
    if (*spectra) return cmd_spectra(cfg, std::cout);
    if (*lg) return cmd_lg(cfg, std::cout);
    if (*validate) return cmd_validate(cfg, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const lgsim::ParameterError& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
