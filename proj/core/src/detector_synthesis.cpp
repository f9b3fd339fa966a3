#include <algorithm>
#include <cmath>
#include <numbers>

#include "detector_internal.hpp"
#include "lgsim/errors.hpp"
#include "lgsim/qubit_dynamics.hpp"
#include "lgsim/rng.hpp"
#include "lgsim/units.hpp"

namespace lgsim::detector {

void AcquisitionConfig::validate() const {
  if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
  if (record_len < 2 || (record_len & (record_len - 1)) != 0)
    throw ParameterError("record_len must be a power of two");
  if (n_records < 1) throw ParameterError("n_records must be >= 1");
  if (!(t_ss >= 0.0)) throw ParameterError("t_ss must be >= 0");
  if (!(noise_to_peak >= 0.0)) throw ParameterError("noise_to_peak must be >= 0");
  if (!(std::abs(iq_imbalance) < 1.0)) throw ParameterError("iq_imbalance must be in (-1, 1)");
  if (records_per_on_period() == 0 || records_per_off_period() == 0)
    throw ParameterError("ON/OFF periods too short for one record after settling");
}

std::size_t AcquisitionConfig::settle_samples() const {
  return static_cast<std::size_t>(std::ceil(t_ss / dt - 1e-9));
}

namespace {
std::size_t records_in(double period, const AcquisitionConfig& c) {
  const double samples = std::floor(period / c.dt + 1e-9);
  const double usable = samples - static_cast<double>(c.settle_samples());
  if (usable <= 0.0) return 0;
  return static_cast<std::size_t>(usable) / c.record_len;
}
}  // namespace

std::size_t AcquisitionConfig::records_per_on_period() const { return records_in(t_on, *this); }
std::size_t AcquisitionConfig::records_per_off_period() const { return records_in(t_off, *this); }

const char* to_string(RecordTag t) { return t == RecordTag::on ? "ON" : "OFF"; }

void RawRecord::validate() const {
  if (i.size() != q.size()) throw DataError("I and Q lengths differ");
  for (std::size_t k = 0; k < i.size(); ++k)
    if (!std::isfinite(i[k]) || !std::isfinite(q[k])) throw DataError("non-finite sample");
}

RecordTag schedule_tag(const AcquisitionConfig& cfg, std::size_t index) {
  // Periods alternate ON, OFF, ON, ... until each tag holds n_records.
  const std::size_t a = cfg.records_per_on_period(), b = cfg.records_per_off_period();
  const std::size_t n = cfg.n_records;
  // Interleaved layout while both tags still have records left.
  const std::size_t full_cycles = std::min(n / a, n / b);
  const std::size_t cycle = a + b;
  if (index < full_cycles * cycle) return (index % cycle) < a ? RecordTag::on : RecordTag::off;
  // Remainder: the rest of the ON records, then the rest of the OFF records.
  const std::size_t rest_on = n - full_cycles * a;
  return (index - full_cycles * cycle) < rest_on ? RecordTag::on : RecordTag::off;
}

std::size_t schedule_index(const AcquisitionConfig& cfg, RecordTag tag, std::size_t k) {
  const std::size_t a = cfg.records_per_on_period(), b = cfg.records_per_off_period();
  const std::size_t n = cfg.n_records;
  if (k >= n) throw ParameterError("record number out of range");
  const std::size_t full_cycles = std::min(n / a, n / b);
  const std::size_t cycle = a + b;
  const std::size_t per = tag == RecordTag::on ? a : b;
  if (k < full_cycles * per) {
    const std::size_t c = k / per, j = k % per;
    return c * cycle + (tag == RecordTag::on ? j : a + j);
  }
  const std::size_t base = full_cycles * cycle;
  const std::size_t rest_on = n - full_cycles * a;
  if (tag == RecordTag::on) return base + (k - full_cycles * a);
  return base + rest_on + (k - full_cycles * b);
}

void LineResponse::validate() const {
  if (freqs_hz.empty() || freqs_hz.size() != r.size() || r.size() != dr_over_r.size())
    throw DataError("line response columns must be non-empty and equal length");
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!(r[k] > 0.0)) throw DataError("line response must be > 0");
    if (!(dr_over_r[k] >= 0.0)) throw DataError("line response uncertainty must be >= 0");
    if (k > 0 && !(freqs_hz[k] > freqs_hz[k - 1]))
      throw GridError("line response frequencies must increase");
  }
  if (std::abs(at(0.0) - 1.0) > 1e-9) throw DataError("line response must satisfy R(0) = 1");
}

namespace {
double interp(const std::vector<double>& x, const std::vector<double>& y, double v) {
  if (v <= x.front()) return y.front();
  if (v >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), v);
  const std::size_t j = static_cast<std::size_t>(it - x.begin());
  const double t = (v - x[j - 1]) / (x[j] - x[j - 1]);
  return y[j - 1] + t * (y[j] - y[j - 1]);
}
}  // namespace

double LineResponse::at(double f_hz) const { return interp(freqs_hz, r, std::abs(f_hz)); }
double LineResponse::relative_uncertainty_at(double f_hz) const {
  return interp(freqs_hz, dr_over_r, std::abs(f_hz));
}

LineResponse LineResponse::flat(double rel) { return {{0.0}, {1.0}, {rel}}; }

void ErrorBudget::validate() const {
  if (!(dR_over_R >= 0.0 && dV2_over_V2 >= 0.0 && dKappa_over_kappa >= 0.0 && sigma0 >= 0.0))
    throw ParameterError("error budget entries must be >= 0");
}

TraceSource::TraceSource(AcquisitionConfig cfg) : cfg_(cfg) { cfg_.validate(); }
TraceSource::~TraceSource() = default;

void SynthesisScratchDeleter::operator()(SynthesisScratch* p) const { delete p; }

ScratchPtr TraceSource::make_scratch() const {
  return ScratchPtr(new SynthesisScratch(cfg_.record_len));
}

void TraceSource::calibrate_noise() {
  const auto dens = signal_density_on_bins();
  peak_signal_ = *std::max_element(dens.begin(), dens.end());
  noise_density_ = 0.5 * cfg_.noise_to_peak * peak_signal_;
}

void TraceSource::generate(std::size_t index, RawRecord& out, SynthesisScratch& scratch) const {
  if (index >= size()) throw ParameterError("record index out of range");
  const std::size_t n = cfg_.record_len;
  out.tag = tag(index);
  out.i.assign(n, 0.0);
  out.q.assign(n, 0.0);
  rng::Xoshiro256pp gen = rng::Xoshiro256pp::stream(cfg_.seed, index);

  if (out.tag == RecordTag::on) {
    signal(gen, scratch.signal, scratch);
    const double c = std::cos(cfg_.iq_angle), s = std::sin(cfg_.iq_angle);
    for (std::size_t k = 0; k < n; ++k) {
      out.i[k] = c * scratch.signal[k];
      out.q[k] = s * scratch.signal[k];
    }
  }
  const double sd = std::sqrt(noise_density_ / cfg_.dt);
  scratch.normals.resize(2 * n);
  rng::fill_normal(gen, scratch.normals);
  const double gq = 1.0 + cfg_.iq_imbalance;
  for (std::size_t k = 0; k < n; ++k) {
    out.i[k] += sd * scratch.normals[2 * k];
    out.q[k] = gq * (out.q[k] + sd * scratch.normals[2 * k + 1]);
  }
}

RawRecord TraceSource::generate(std::size_t index) const {
  RawRecord r;
  auto scratch = make_scratch();
  generate(index, r, *scratch);
  return r;
}

namespace {

bool is_flat(const LineResponse& line) {
  return std::all_of(line.r.begin(), line.r.end(), [](double v) { return v == 1.0; });
}

double filter_gain(double omega, double kappa) {
  return std::isinf(kappa) ? 1.0 : qubit::cavity_filter(omega, kappa);
}

// Gaussian process with a prescribed density, synthesized bin by bin.
class QuantumSource final : public TraceSource {
 public:
  QuantumSource(const SpectrumRecord& target, double delta_v, double kappa,
                const LineResponse& line, const AcquisitionConfig& cfg)
      : TraceSource(cfg) {
    if (target.units != SpectralUnits::spin_units)
      throw ConventionError("target spectrum must be in spin units");
    if (target.grid != GridKind::one_sided) throw GridError("target spectrum must be one-sided");
    const double dw = target.step();
    const std::size_t bins = cfg_.record_len / 2 + 1;
    const double want = units::hz_to_rad(cfg_.bin_hz());
    if (std::abs(dw - want) > 1e-9 * want || target.size() < bins)
      throw GridError("target spectrum grid does not match the record grid (resample first)");
    line.validate();
    const double half_v2 = 0.25 * delta_v * delta_v;
    density_.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      const double w = target.freqs[k];
      const double v = target.density[k];
      if (!(v >= 0.0)) throw DataError("target spectrum must be >= 0");
      density_[k] = half_v2 * v * filter_gain(w, kappa) * line.at(units::rad_to_hz(w));
    }
    calibrate_noise();
  }

 protected:
  void signal(rng::Xoshiro256pp& gen, std::span<double> out,
              SynthesisScratch& scratch) const override {
    const std::size_t n = cfg_.record_len, half = n / 2;
    const double scale = static_cast<double>(n) / cfg_.dt;
    auto X = scratch.fft.spectrum_data();
    scratch.normals.resize(2 * (half + 1));
    rng::fill_normal(gen, scratch.normals);
    const double* g = scratch.normals.data();
    X[0] = std::sqrt(density_[0] * scale) * g[0];
    X[half] = std::sqrt(density_[half] * scale) * g[1];
    for (std::size_t k = 1; k < half; ++k) {
      const double a = std::sqrt(0.5 * density_[k] * scale);
      X[k] = {a * g[2 * k], a * g[2 * k + 1]};
    }
    scratch.fft.inverse();
    const auto x = scratch.fft.real_data();
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = x[k] * inv_n;
  }

  std::vector<double> signal_density_on_bins() const override { return density_; }

 private:
  std::vector<double> density_;
};

// Base for models simulated on a 4x oversampled grid and passed through the
// one-pole cavity filter (power response C(w)).
class TimeDomainSource : public TraceSource {
 public:
  TimeDomainSource(double delta_v, double kappa, const LineResponse& line,
                   const AcquisitionConfig& cfg)
      : TraceSource(cfg), half_v_(0.5 * delta_v), kappa_(kappa), line_(line) {
    line_.validate();
    flat_ = is_flat(line_);
  }

 protected:
  static constexpr int kOversample = 4;

  // Fills z on `n_fine` points spaced h.
  virtual void spin(rng::Xoshiro256pp& gen, double h, std::vector<double>& z) const = 0;
  // Bin-averaged spin density (rad/s convention) over [w_lo, w_hi].
  virtual double spin_density_avg(double w_lo, double w_hi) const = 0;

  void signal(rng::Xoshiro256pp& gen, std::span<double> out,
              SynthesisScratch& scratch) const override {
    const std::size_t n = cfg_.record_len;
    const double h = cfg_.dt / kOversample;
    std::size_t warm = 0;
    if (!std::isinf(kappa_)) warm = static_cast<std::size_t>(std::ceil(20.0 / (kappa_ * h)));
    std::vector<double>& z = scratch.fine;
    z.resize(warm + n * kOversample);
    spin(gen, h, z);

    if (std::isinf(kappa_)) {
      for (std::size_t k = 0; k < n; ++k) out[k] = half_v_ * z[k * kOversample];
    } else {
      // Exact one-pole response to a piecewise-linear input.
      const double c = 0.5 * kappa_;
      const double a = std::exp(-c * h);
      const double b = 1.0 - (1.0 - a) / (c * h);
      double y = z[0];
      for (std::size_t j = 0; j + 1 < z.size(); ++j) {
        if (j >= warm && (j - warm) % kOversample == 0) out[(j - warm) / kOversample] = half_v_ * y;
        y = a * y + (1.0 - a) * z[j] + (z[j + 1] - z[j]) * b;
      }
    }

    if (!flat_) {
      auto x = scratch.fft.real_data();
      std::copy(out.begin(), out.end(), x.begin());
      scratch.fft.forward();
      auto X = scratch.fft.spectrum_data();
      for (std::size_t k = 0; k < X.size(); ++k) X[k] *= std::sqrt(line_.at(cfg_.bin_hz() * static_cast<double>(k)));
      scratch.fft.inverse();
      for (std::size_t k = 0; k < n; ++k) out[k] = x[k] / static_cast<double>(n);
    }
  }

  std::vector<double> signal_density_on_bins() const override {
    const std::size_t bins = cfg_.record_len / 2 + 1;
    const double dw = units::hz_to_rad(cfg_.bin_hz());
    std::vector<double> d(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      const double w = dw * static_cast<double>(k);
      d[k] = half_v_ * half_v_ * spin_density_avg(w - 0.5 * dw, w + 0.5 * dw) *
             filter_gain(w, kappa_) * line_.at(cfg_.bin_hz() * static_cast<double>(k));
    }
    return d;
  }

  double half_v_;
  double kappa_;
  LineResponse line_;
  bool flat_ = true;
};

class MacrospinSource final : public TimeDomainSource {
 public:
  MacrospinSource(double wr, double diffusion, double delta_v, double kappa,
                  const LineResponse& line, const AcquisitionConfig& cfg)
      : TimeDomainSource(delta_v, kappa, line, cfg), wr_(wr), d_(diffusion) {
    if (!(wr >= 0.0) || !(diffusion >= 0.0)) throw ParameterError("rates must be >= 0");
    calibrate_noise();
  }

 protected:
  void spin(rng::Xoshiro256pp& gen, double h, std::vector<double>& z) const override {
    double phi = 2.0 * std::numbers::pi * gen.uniform();
    const double step = std::sqrt(2.0 * d_ * h);
    const double rot = wr_ * h;
    for (std::size_t j = 0; j < z.size(); ++j) {
      z[j] = std::cos(phi);
      phi += rot + (step > 0.0 ? step * rng::normal(gen) : 0.0);
    }
  }

  double spin_density_avg(double lo, double hi) const override {
    // 1/2 [L(w - wR) + L(w + wR)], L(u) = D / (D^2 + u^2); bin average.
    auto prim = [&](double u) {
      if (d_ == 0.0) return u > 0.0 ? 0.5 * std::numbers::pi : (u < 0.0 ? -0.5 * std::numbers::pi : 0.0);
      return std::atan(u / d_);
    };
    const double area = prim(hi - wr_) - prim(lo - wr_) + prim(hi + wr_) - prim(lo + wr_);
    return 0.5 * area / (hi - lo);
  }

 private:
  double wr_, d_;
};

class TelegraphSource final : public TimeDomainSource {
 public:
  TelegraphSource(double rate, double delta_v, double kappa, const LineResponse& line,
                  const AcquisitionConfig& cfg)
      : TimeDomainSource(delta_v, kappa, line, cfg), r_(rate) {
    if (!(rate > 0.0)) throw ParameterError("switch_rate must be > 0");
    calibrate_noise();
  }

 protected:
  void spin(rng::Xoshiro256pp& gen, double h, std::vector<double>& z) const override {
    const double p_flip = 0.5 * (1.0 - std::exp(-2.0 * r_ * h));
    double s = gen.uniform() < 0.5 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      z[j] = s;
      if (gen.uniform() < p_flip) s = -s;
    }
  }

  double spin_density_avg(double lo, double hi) const override {
    // 4r / (4r^2 + w^2) integrates to 2 atan(w / 2r).
    return 2.0 * (std::atan(hi / (2.0 * r_)) - std::atan(lo / (2.0 * r_))) / (hi - lo);
  }

 private:
  double r_;
};

}  // namespace

std::unique_ptr<TraceSource> synthesize_quantum_trace(const SpectrumRecord& target,
                                                      double delta_v, double kappa,
                                                      const LineResponse& line,
                                                      const AcquisitionConfig& cfg) {
  return std::make_unique<QuantumSource>(target, delta_v, kappa, line, cfg);
}

std::unique_ptr<TraceSource> synthesize_macrospin_trace(double omega_rabi,
                                                        double phase_diffusion_rate,
                                                        double delta_v, double kappa,
                                                        const LineResponse& line,
                                                        const AcquisitionConfig& cfg) {
  return std::make_unique<MacrospinSource>(omega_rabi, phase_diffusion_rate, delta_v, kappa,
                                           line, cfg);
}

std::unique_ptr<TraceSource> synthesize_telegraph_trace(double switch_rate, double delta_v,
                                                        double kappa, const LineResponse& line,
                                                        const AcquisitionConfig& cfg) {
  return std::make_unique<TelegraphSource>(switch_rate, delta_v, kappa, line, cfg);
}

}  // namespace lgsim::detector
