#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lgsim/detector.hpp"
#include "lgsim/lindblad.hpp"
#include "lgsim/qubit_dynamics.hpp"
#include "lgsim/records.hpp"
#include "lgsim_app/config.hpp"

namespace lgsim::app {

Provenance base_provenance(const ExperimentConfig& cfg, const std::string& command);

// ---- Ensemble Rabi oscillations under continuous measurement -------------

struct RabiRun {
  double rabi_hz = 0.0;
  double nbar = 0.0;
  double nbar_measured = 0.0;  // eps^2 / (kappa^2/4 + chi^2)
  int fock_dim = 0;
  SpinTrajectory traj;
  qubit::RabiFit fit;
  std::vector<std::string> warnings;
};

// Master-equation Rabi run from |g> with the cavity in its g pointer state.
RabiRun simulate_rabi(const ExperimentConfig& cfg, double rabi_hz, double nbar,
                      double duration_s, std::size_t samples);

struct DephasingLine {
  double rabi_hz = 0.0;
  std::vector<double> nbar;
  std::vector<double> gamma_phi;  // fitted Gamma_2(nbar) - Gamma_2(0)
  double slope = 0.0;             // least squares with free intercept
  double intercept = 0.0;
  double r_squared = 0.0;
  double predicted_slope = 0.0;   // 8 chi^2 C(wR) / kappa
};

// Uses the runs at nbar <= max_nbar; the nbar = 0 run is the baseline.
DephasingLine dephasing_line(const ExperimentConfig& cfg, const std::vector<RabiRun>& runs,
                             double max_nbar);

// ---- Spectrum cross-oracle ------------------------------------------------

struct SpectrumCell {
  double nbar = 0.0;
  double rabi_hz = 0.0;
  double nbar_measured = 0.0;
  double gamma_phi = 0.0;
  int fock_dim = 0;
  lindblad::RabiCalibration calibration;
  SpectrumRecord analytic;  // spin units, includes C(w)
  SpectrumRecord numeric;   // regression spectrum / (deltaV/2)^2
  double l1_error = 0.0;    // sum |a - n| / sum a over bins 1 .. M-1
  std::vector<std::string> warnings;
};

SpectrumCell spectrum_cell(const ExperimentConfig& cfg, double nbar, double rabi_hz,
                           int fock_dim = 0);

// ---- Leggett-Garg pipeline -------------------------------------------------

// Unfiltered sigma_z spectrum for the operating point on the record grid.
SpectrumRecord lg_target_spectrum(const ExperimentConfig& cfg);
analytic::FiniteBandwidthParams lg_params(const ExperimentConfig& cfg);
// Predicted LG curve on the pipeline grid (spectrum with C(w) removed).
LgCurve lg_prediction(const ExperimentConfig& cfg);
double lg_delta_v(const ExperimentConfig& cfg);
detector::LineResponse lg_line_response(const ExperimentConfig& cfg);

std::unique_ptr<detector::TraceSource> make_source(const ExperimentConfig& cfg,
                                                   const std::string& model,
                                                   const detector::AcquisitionConfig& acq,
                                                   double delta_v);

struct LgRun {
  std::string model;
  detector::LgAnalysis analysis;
  std::size_t n_records = 0;       // per tag
  std::size_t pilot_records = 0;   // 0 when the count was given
  double pilot_sigma = 0.0;
  double delta_v = 0.0;
  double noise_density = 0.0;
  double peak_signal = 0.0;
};

// Full acquisition and analysis. n_records = 0 selects the count from a
// pilot run so that sigma_r at the predicted maximum reaches
// cfg.lg.target_sigma.
LgRun run_lg(const ExperimentConfig& cfg, const std::string& model, std::uint64_t seed,
             std::size_t n_records, std::ostream* log = nullptr);

// f(tau) = 2 cos(wR tau) - cos(2 wR tau) on a 0.1 ns grid up to 100 ns.
LgCurve ideal_curve(const ExperimentConfig& cfg);

// ---- Commands ---------------------------------------------------------------

int cmd_rabi(const ExperimentConfig& cfg, std::ostream& log);
int cmd_spectra(const ExperimentConfig& cfg, std::ostream& log);
int cmd_lg(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace lgsim::app
