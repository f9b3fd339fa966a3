#pragma once

// Experiment configuration. At this boundary frequencies are in Hz (not
// angular) and times in seconds; conversion to rad/s happens in the
// accessors below.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lgsim/detector.hpp"
#include "lgsim/qubit_dynamics.hpp"

namespace lgsim::app {

// Raised for malformed or inconsistent configuration (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PhysicalConfig {
  double omega_ge_hz = 5.304e9;
  double omega_c_hz = 5.796e9;
  double kappa_hz = 30.3e6;
  double chi_hz = 1.75e6;
  double t1_s = 200e-9;
  double t2_s = 150e-9;
  double lambda = 7e-3;
  double p_e0 = 0.02;
  double n_crit = 100.0;
};

struct RabiConfig {
  double t1_s = 225e-9;
  double t2_s = 150e-9;  // at nbar = 0; sets the intrinsic dephasing
  std::vector<double> rabi_hz{2.5e6, 5e6, 10e6, 20e6};
  std::vector<double> nbar{0, 1, 2, 5, 10, 20};
  double duration_s = 2e-6;
  std::size_t samples = 401;
  double zeno_rabi_hz = 2.5e6;
  std::vector<double> zeno_nbar{5, 10, 20};
  double zeno_duration_s = 2e-6;
  // Use chi(nbar) = chi0 (1 - lambda nbar) in the master equation.
  bool apply_lambda = false;
};

struct SpectraConfig {
  std::vector<double> nbar{0.23, 0.78, 1.56, 3.9, 7.8, 15.6};
  std::vector<double> rabi_hz{2.5e6, 5e6, 10e6, 20e6};
  double window_hz = 30e6;
  double bin_hz = 1.0 / (10e-9 * 1024);
  int calibration_iterations = 6;
};

struct LgConfig {
  double rabi_hz = 10.6e6;
  double nbar = 0.78;
  double window_hz = 30e6;
  double noise_band_lo_hz = 22e6;
  double noise_band_hi_hz = 30e6;
  detector::AcquisitionConfig acquisition{};
  // 0: choose the record count from a pilot run so that the predicted
  // sigma at the maximum reaches target_sigma.
  std::size_t n_records = 0;
  double target_sigma = 0.045;
  std::size_t pilot_records = 4000;
  std::size_t max_records = 10'000'000;
  detector::ErrorBudget budget{};
  std::string line_response_csv;  // empty: flat response with budget.dR_over_R
  std::string model = "quantum";  // quantum | macrospin | telegraph
  bool ideal = false;
  double macrospin_diffusion = 0.0;  // 1/s; 0: use 1 / t2
  double telegraph_rate = 5e6;       // 1/s
};

struct ValidateConfig {
  bool quick = false;
  int control_seeds = 20;
  std::size_t control_records = 20000;
  double control_noise_to_peak = 1.0;
  int mc_reps = 400;
  std::size_t mc_records = 200;
  int normalization_sets = 50;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::filesystem::path out = "lgsim_out";
  unsigned threads = 0;
  PhysicalConfig physical;
  RabiConfig rabi;
  SpectraConfig spectra;
  LgConfig lg;
  ValidateConfig validate;

  // Physical-validity checks are left to the modules; this only rejects
  // values no module could accept (negative counts, empty sweeps, ...).
  void check() const;

  double kappa() const;
  double chi() const;
  double gamma1() const { return 1.0 / physical.t1_s; }
  double gamma2() const { return 1.0 / physical.t2_s; }
  TlsParams tls() const;
  CavityParams cavity() const;

  // Full configuration as JSON text (for provenance and --dump).
  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
};

}  // namespace lgsim::app
