#pragma once

// Detector-output emulation and analysis: surrogate I/Q records, ON/OFF
// periodogram averaging, calibration, cavity deconvolution and the
// Leggett-Garg curve with statistical and systematic errors.
//
// Periodogram normalization: for a record x_0..x_{N-1} sampled at dt,
// P_k = |X_k|^2 dt / N with X_k the unnormalized DFT. For real records this
// is a two-sided density per hertz on the bins k = 0 .. N/2, and
// S = P_I + P_Q.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lgsim/analytic_spectrum.hpp"
#include "lgsim/records.hpp"
#include "lgsim/rng.hpp"

namespace lgsim::detector {

struct AcquisitionConfig {
  double dt = 10e-9;
  std::size_t record_len = 1024;
  std::size_t n_records = 1000;  // records per tag
  double t_on = 2.5e-3;
  double t_off = 2.5e-3;
  double t_ss = 5e-6;
  double noise_to_peak = 60.0;
  std::uint64_t seed = 1;
  double iq_angle = 0.6;      // direction of the pointer-state difference in the I/Q plane
  double iq_imbalance = 0.0;  // relative gain error of the Q chain

  void validate() const;
  double bin_hz() const { return 1.0 / (dt * static_cast<double>(record_len)); }
  std::size_t settle_samples() const;
  std::size_t records_per_on_period() const;
  std::size_t records_per_off_period() const;
  std::size_t total_records() const { return 2 * n_records; }
};

enum class RecordTag { on, off };
const char* to_string(RecordTag t);

struct RawRecord {
  std::vector<double> i;
  std::vector<double> q;
  RecordTag tag = RecordTag::on;

  void validate() const;
};

// Tag of the record at `index` in the alternating ON/OFF schedule.
RecordTag schedule_tag(const AcquisitionConfig& cfg, std::size_t index);
// Index of the k-th record carrying `tag`.
std::size_t schedule_index(const AcquisitionConfig& cfg, RecordTag tag, std::size_t k);

struct LineResponse {
  std::vector<double> freqs_hz;
  std::vector<double> r;
  std::vector<double> dr_over_r;

  void validate() const;
  // Linear interpolation, constant beyond the table ends.
  double at(double f_hz) const;
  double relative_uncertainty_at(double f_hz) const;
  static LineResponse flat(double rel_uncertainty = 0.015);
};

struct ErrorBudget {
  double dR_over_R = 0.015;
  double dV2_over_V2 = 0.061;
  double dKappa_over_kappa = 0.026;
  double sigma0 = 0.0;  // 0: measure from the signal-free band

  void validate() const;
  static ErrorBudget zero() { return {0.0, 0.0, 0.0, 0.0}; }
};

// Per-thread synthesis buffers.
class SynthesisScratch;
// Deleter defined next to the (private) scratch type.
struct SynthesisScratchDeleter {
  void operator()(SynthesisScratch* p) const;
};
using ScratchPtr = std::unique_ptr<SynthesisScratch, SynthesisScratchDeleter>;

class TraceSource {
 public:
  explicit TraceSource(AcquisitionConfig cfg);
  virtual ~TraceSource();

  const AcquisitionConfig& config() const { return cfg_; }
  std::size_t size() const { return cfg_.total_records(); }
  RecordTag tag(std::size_t index) const { return schedule_tag(cfg_, index); }

  ScratchPtr make_scratch() const;
  void generate(std::size_t index, RawRecord& out, SynthesisScratch& scratch) const;
  RawRecord generate(std::size_t index) const;

  // Per-channel white-noise density (V^2/Hz).
  double noise_density() const { return noise_density_; }
  // Largest signal density over the record bins (I + Q, V^2/Hz).
  double peak_signal_density() const { return peak_signal_; }

 protected:
  // Writes the noise-free signal quadrature s(t) (volts, before the I/Q
  // projection) for an ON record, drawing from the record's own stream.
  virtual void signal(rng::Xoshiro256pp& gen, std::span<double> out,
                      SynthesisScratch& scratch) const = 0;
  // Signal density on the record bins, used to set the noise level.
  virtual std::vector<double> signal_density_on_bins() const = 0;
  // Initialises the noise level; call from the derived constructor.
  void calibrate_noise();

  AcquisitionConfig cfg_;
  double noise_density_ = 0.0;
  double peak_signal_ = 0.0;
};

// Gaussian surrogate with density (dV/2)^2 S_z(f) C(f) R(f). The target is
// the pre-filter spin spectrum on the record grid (bins 0 .. N/2).
std::unique_ptr<TraceSource> synthesize_quantum_trace(const SpectrumRecord& target,
                                                      double delta_v, double kappa,
                                                      const LineResponse& line,
                                                      const AcquisitionConfig& cfg);

// z(t) = cos(wR t + phi(t)), phi diffusing with rate D (K(tau) = cos(wR tau) e^{-D tau} / 2).
std::unique_ptr<TraceSource> synthesize_macrospin_trace(double omega_rabi,
                                                        double phase_diffusion_rate,
                                                        double delta_v, double kappa,
                                                        const LineResponse& line,
                                                        const AcquisitionConfig& cfg);

// Symmetric random telegraph z = +-1 flipping at `switch_rate` (K = e^{-2 r tau}).
std::unique_ptr<TraceSource> synthesize_telegraph_trace(double switch_rate, double delta_v,
                                                        double kappa, const LineResponse& line,
                                                        const AcquisitionConfig& cfg);

struct PeriodogramPair {
  SpectrumRecord on;   // volts^2, bins 0 .. N/2
  SpectrumRecord off;
  std::size_t n_on = 0;
  std::size_t n_off = 0;
};

// Single-pass running sums of |FFT|^2 for each tag.
class PeriodogramAccumulator {
 public:
  PeriodogramAccumulator(std::size_t record_len, double dt);
  ~PeriodogramAccumulator();
  PeriodogramAccumulator(PeriodogramAccumulator&&) noexcept;
  PeriodogramAccumulator& operator=(PeriodogramAccumulator&&) noexcept;

  void add(const RawRecord& rec);
  void merge(const PeriodogramAccumulator& other);
  PeriodogramPair result() const;
  std::size_t count(RecordTag t) const { return t == RecordTag::on ? n_on_ : n_off_; }

 private:
  struct Fft;
  std::size_t len_;
  double dt_;
  std::unique_ptr<Fft> fft_;
  std::vector<double> sum_on_, sum_off_;
  std::size_t n_on_ = 0, n_off_ = 0;
};

PeriodogramPair accumulate_periodograms(std::span<const RawRecord> records, double dt);

struct ParallelOptions {
  unsigned threads = 0;          // 0: hardware concurrency
  std::size_t chunk_records = 256;  // fixed reduction layout, independent of threads
};

// Records [begin, end) of the source; deterministic for a given chunk size.
PeriodogramPair accumulate_periodograms(const TraceSource& source, std::size_t begin,
                                        std::size_t end, const ParallelOptions& par = {});
PeriodogramPair accumulate_periodograms(const TraceSource& source,
                                        const ParallelOptions& par = {});

// Combines two acquisitions (counts are weights).
PeriodogramPair merge(const PeriodogramPair& a, const PeriodogramPair& b);

// [S_on - S_off] / [R (dV/2)^2], spin units.
SpectrumRecord correct_and_normalize(const SpectrumRecord& s_on, const SpectrumRecord& s_off,
                                     const LineResponse& line, double delta_v);

// S / C(w); GridError when C drops below min_gain inside the band.
SpectrumRecord deconvolve_cavity(const SpectrumRecord& spec, double kappa,
                                 double min_gain = 0.1);

// Keeps the bins with f <= window_hz.
SpectrumRecord crop(const SpectrumRecord& spec, double window_hz);

// Standard deviation of the corrected spectrum over [f_lo, f_hi].
double estimate_sigma0(const SpectrumRecord& corrected, double f_lo_hz, double f_hi_hz);

// sigma_r for r = 0 .. n_points-1 of f(tau_r) = 2K(tau_r) - K(tau_2r) computed
// from M one-sided bins of width df_hz (transform size N = 2M), with
// sigma_k = sigma0 / C(2 pi df k).
std::vector<double> statistical_sigma(double sigma0, double kappa, std::size_t n_bins,
                                      double df_hz, std::size_t n_points);

// Adds systematic bounds: flat dR/R and d(dV/2)^2/(dV/2)^2 plus the exact
// effect of dC/C = 2(dk/k)/[1 + (k/2w)^2] on f, computed from the corrected
// (not yet deconvolved) spectrum.
LgCurve systematic_bounds(const LgCurve& curve, const ErrorBudget& budget,
                          const SpectrumRecord& corrected, double kappa);

// Relative systematic of f at each tau from the three budget terms.
struct SystematicParts {
  std::vector<double> flat;
  std::vector<double> cavity;
  std::vector<double> total;
};
SystematicParts systematic_parts(const LgCurve& curve, const ErrorBudget& budget,
                                 const SpectrumRecord& corrected, double kappa);

struct AnalysisOptions {
  double window_hz = 30e6;
  double noise_band_lo_hz = 22e6;
  double noise_band_hi_hz = 30e6;
  double min_gain = 0.1;
};

struct LgAnalysis {
  SpectrumRecord corrected;    // in the window
  SpectrumRecord deconvolved;
  CorrelatorSeries correlator;
  LgCurve curve;
  analytic::LgMax max;
  double k0 = 0.0;
  double sigma0 = 0.0;
  double sigma_at_max = 0.0;
  double sys_rel_at_max = 0.0;
  // (f - |f| sys_rel - 1) / sigma at the maximum.
  double significance = 0.0;
  std::size_t n_on = 0;
  std::size_t n_off = 0;
};

LgAnalysis run_lg_analysis(const PeriodogramPair& spectra, const LineResponse& line,
                           double delta_v, double kappa, const ErrorBudget& budget,
                           const AnalysisOptions& options = {});
// Entry point for an already corrected spectrum (spin units).
LgAnalysis run_lg_analysis(const SpectrumRecord& corrected, double kappa,
                           const ErrorBudget& budget, const AnalysisOptions& options = {});

}  // namespace lgsim::detector
