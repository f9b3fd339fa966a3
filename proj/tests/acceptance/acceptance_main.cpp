// Acceptance runner: one PASS/FAIL line per criterion on stdout, progress on
// stderr. Exit status 1 when any criterion that ran failed.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lgsim_app/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace lgsim::app;
  CLI::App app{"lgsim acceptance criteria"};
  std::string config_path, out_dir;
  std::vector<int> only;
  bool quick = false;
  unsigned threads = 0;
  app.add_option("--config", config_path)->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "directory for report.json");
  app.add_option("--only", only, "criterion ids to run")->check(CLI::Range(1, 10));
  app.add_option("--threads", threads);
  app.add_flag("--quick", quick);
  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
  if (!out_dir.empty()) cfg.out = out_dir;
  if (threads) cfg.threads = threads;

  const auto results = run_acceptance(cfg, quick, std::cerr, only);
  for (const auto& r : results)
    if (!r.skipped) std::cout << format_result(r) << '\n';
  if (!out_dir.empty()) {
    std::filesystem::create_directories(cfg.out);
    std::ofstream(cfg.out / "report.json") << report_json(cfg, results) << '\n';
  }
  return all_passed(results) ? 0 : 1;
}
