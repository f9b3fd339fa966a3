#include "lgsim/analytic_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "lgsim/errors.hpp"
#include "lgsim/fourier.hpp"
#include "lgsim/units.hpp"

namespace lgsim {

const char* to_string(SpectralUnits u) {
  switch (u) {
    case SpectralUnits::spin_units: return "spin_units";
    case SpectralUnits::volts_squared: return "volts_squared";
    case SpectralUnits::field_units: return "field_units";
  }
  return "unknown";
}

const char* to_string(GridKind g) {
  return g == GridKind::one_sided ? "one_sided" : "symmetric";
}

namespace {

double uniform_step(const std::vector<double>& x) {
  if (x.size() < 2) throw GridError("grid needs at least two points");
  const double h = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  if (!(h > 0.0)) throw GridError("grid must be increasing");
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double expect = x.front() + h * static_cast<double>(i);
    if (std::abs(x[i] - expect) > 1e-9 * h + 1e-12 * std::abs(expect))
      throw GridError("grid is not uniform");
  }
  return h;
}

}  // namespace

double SpectrumRecord::step() const {
  if (density.size() != freqs.size()) throw GridError("spectrum freqs/density length mismatch");
  const double h = uniform_step(freqs);
  if (grid == GridKind::one_sided) {
    if (std::abs(freqs.front()) > 1e-9 * h) throw GridError("one-sided grid must start at 0");
  } else {
    if (std::abs(freqs.front() + freqs.back()) > 1e-9 * h || freqs.size() % 2 == 0)
      throw GridError("symmetric grid must be centred on 0 with an odd point count");
  }
  return h;
}

void SpectrumRecord::validate() const { (void)step(); }

SpectrumRecord SpectrumRecord::one_sided(double df_hz, std::size_t n_bins, SpectralUnits units) {
  if (!(df_hz > 0.0) || n_bins < 2) throw GridError("one-sided grid needs df > 0 and >= 2 bins");
  SpectrumRecord s;
  s.freqs.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k)
    s.freqs[k] = units::hz_to_rad(df_hz * static_cast<double>(k));
  s.density.assign(n_bins, 0.0);
  s.units = units;
  s.grid = GridKind::one_sided;
  return s;
}

double CorrelatorSeries::step() const {
  if (values.size() != taus.size()) throw GridError("correlator taus/values length mismatch");
  const double h = uniform_step(taus);
  if (std::abs(taus.front()) > 1e-9 * h) throw GridError("correlator grid must start at 0");
  return h;
}

namespace analytic {

double spectrum_steady_z(double omega_rabi, double gamma1, double gamma2) {
  return -1.0 / (1.0 + omega_rabi * omega_rabi / (gamma1 * gamma2));
}

double sigma_z_spectrum(double omega, double wr, double g1, double g2) {
  if (!(g1 > 0.0) || !(g2 >= 0.5 * g1) || !std::isfinite(g2))
    throw UnphysicalRatesError("sigma_z_spectrum needs Gamma_2 >= Gamma_1/2 > 0");
  if (!(wr >= 0.0)) throw ParameterError("omega_rabi must be >= 0");
  const double z = spectrum_steady_z(wr, g1, g2);
  const double pop = 1.0 - z * z;
  const double g = 0.5 * (g1 + g2);
  const double half = 0.5 * (g2 - g1);
  const double v = wr * wr - half * half;
  const double w2 = omega * omega;
  const double a = g * g + v;
  const double den = (a + w2) * (a + w2) - 4.0 * v * w2;
  const double num = g * pop * (a + w2) + (pop * half + wr * wr * z * z / g2) * (a - w2);
  return 2.0 * num / den;
}

void FiniteBandwidthParams::validate() const {
  if (!(omega_rabi >= 0.0)) throw ParameterError("omega_rabi must be >= 0");
  if (!(gamma1 > 0.0)) throw ParameterError("gamma1 must be > 0");
  if (!(gamma_phi >= 0.0)) throw ParameterError("gamma_phi must be >= 0");
  if (!(kappa > 0.0)) throw ParameterError("kappa must be > 0");
}

double FiniteBandwidthParams::gamma2_at(double omega) const {
  const double c = std::isinf(kappa) ? 1.0 : qubit::cavity_filter(omega, kappa);
  return 0.5 * gamma1 + gamma_phi * c;
}

FiniteBandwidthParams FiniteBandwidthParams::from_physical(double omega_rabi, double gamma1,
                                                           double gamma_phi0, double nbar,
                                                           double chi, double kappa) {
  FiniteBandwidthParams p;
  p.omega_rabi = omega_rabi;
  p.gamma1 = gamma1;
  p.gamma_phi = gamma_phi0 + qubit::measurement_dephasing_rate(nbar, chi, kappa);
  p.kappa = kappa;
  p.validate();
  return p;
}

FiniteBandwidthParams FiniteBandwidthParams::from_gamma2_at_rabi(double omega_rabi,
                                                                 double gamma1, double gamma2,
                                                                 double kappa) {
  if (!(gamma2 >= 0.5 * gamma1)) throw UnphysicalRatesError("gamma2 must be >= gamma1/2");
  FiniteBandwidthParams p;
  p.omega_rabi = omega_rabi;
  p.gamma1 = gamma1;
  p.kappa = kappa;
  const double c = std::isinf(kappa) ? 1.0 : qubit::cavity_filter(omega_rabi, kappa);
  p.gamma_phi = (gamma2 - 0.5 * gamma1) / c;
  p.validate();
  return p;
}

double finite_bandwidth_spectrum(double omega, const FiniteBandwidthParams& p) {
  p.validate();
  const double c = std::isinf(p.kappa) ? 1.0 : qubit::cavity_filter(omega, p.kappa);
  return sigma_z_spectrum(omega, p.omega_rabi, p.gamma1, p.gamma2_at(omega)) * c;
}

SpectrumRecord tabulate(const std::function<double(double)>& fn, double df_hz,
                        std::size_t n_bins) {
  SpectrumRecord s = SpectrumRecord::one_sided(df_hz, n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) s.density[k] = fn(s.freqs[k]);
  s.meta.set("df_hz", df_hz);
  s.meta.set("n_bins", n_bins);
  return s;
}

CorrelatorSeries correlator_from_spectrum(const SpectrumRecord& spec) {
  const double dw = spec.step();
  if (spec.units == SpectralUnits::volts_squared)
    throw ConventionError("correlator_from_spectrum expects a normalized spectrum");

  std::size_t m = 0;
  std::vector<std::complex<double>> x;
  if (spec.grid == GridKind::one_sided) {
    m = spec.size();
    x.assign(2 * m, 0.0);
    x[0] = spec.density[0];
    for (std::size_t k = 1; k < m; ++k) x[k] = x[2 * m - k] = spec.density[k];
  } else {
    m = (spec.size() + 1) / 2;
    x.assign(2 * m, 0.0);
    const std::size_t c = m - 1;  // index of w = 0
    x[0] = spec.density[c];
    for (std::size_t k = 1; k < m; ++k) {
      x[k] = spec.density[c + k];
      x[2 * m - k] = spec.density[c - k];
    }
  }
  const std::size_t n = 2 * m;

  fourier::ComplexFft fft(n);
  std::copy(x.begin(), x.end(), fft.data().begin());
  fft.backward();

  const double df = dw / units::two_pi;
  double max_re = 0.0, max_im = 0.0;
  for (const auto& v : fft.data()) {
    max_re = std::max(max_re, std::abs(v.real()));
    max_im = std::max(max_im, std::abs(v.imag()));
  }
  if (max_im > 1e-10 * std::max(max_re, 1e-300))
    throw ConventionError("inverse transform is not real: spectrum is not even");

  CorrelatorSeries out;
  out.units = spec.units;
  out.meta = spec.meta;
  const double dtau = 1.0 / (static_cast<double>(n) * df);
  out.meta.set("dtau_s", dtau);
  out.taus.resize(m + 1);
  out.values.resize(m + 1);
  for (std::size_t r = 0; r <= m; ++r) {
    out.taus[r] = dtau * static_cast<double>(r);
    out.values[r] = df * fft.data()[r].real();
  }
  return out;
}

SpectrumRecord spectrum_from_correlator(const CorrelatorSeries& corr) {
  const double dtau = corr.step();
  const std::size_t m = corr.size() - 1;
  if (m < 1) throw GridError("correlator too short");
  const std::size_t n = 2 * m;
  fourier::ComplexFft fft(n);
  auto d = fft.data();
  d[0] = corr.values[0];
  for (std::size_t r = 1; r < m; ++r) d[r] = d[n - r] = corr.values[r];
  d[m] = corr.values[m];
  fft.forward();

  const double df = 1.0 / (static_cast<double>(n) * dtau);
  SpectrumRecord s = SpectrumRecord::one_sided(df, m, corr.units);
  for (std::size_t k = 0; k < m; ++k) s.density[k] = dtau * d[k].real();
  s.meta = corr.meta;
  return s;
}

LgCurve leggett_garg_curve(const CorrelatorSeries& corr, double max_tau) {
  const double dtau = corr.step();
  const std::size_t n = corr.size();
  std::size_t r_max = (n - 1) / 2;
  LgCurve c;
  if (std::isfinite(max_tau)) {
    const auto wanted = static_cast<std::size_t>(std::floor(max_tau / dtau + 1e-9));
    if (wanted > r_max) {
      c.truncated = true;
    } else {
      r_max = wanted;
    }
  }
  c.meta = corr.meta;
  c.taus.resize(r_max + 1);
  c.f.resize(r_max + 1);
  for (std::size_t r = 0; r <= r_max; ++r) {
    c.taus[r] = corr.taus[r];
    c.f[r] = 2.0 * corr.values[r] - corr.values[2 * r];
  }
  c.sigma_stat.assign(c.f.size(), 0.0);
  c.sys_lo = c.f;
  c.sys_hi = c.f;
  return c;
}

double ideal_lg(double tau, double omega_rabi) {
  if (!(omega_rabi > 0.0)) throw ParameterError("omega_rabi must be > 0");
  const double th = omega_rabi * tau;
  return 2.0 * std::cos(th) - std::cos(2.0 * th);
}

LgMax lg_max(const LgCurve& curve) {
  if (curve.f.empty()) throw DataError("empty curve");
  std::size_t best = curve.f.size();
  for (std::size_t i = 0; i < curve.f.size(); ++i) {
    if (!(curve.taus[i] > 0.0) || std::isnan(curve.f[i])) continue;
    if (best == curve.f.size() || curve.f[i] > curve.f[best]) best = i;
  }
  if (best == curve.f.size()) throw DataError("curve has no finite value at tau > 0");

  LgMax m{curve.taus[best], curve.f[best], best};
  if (best >= 1 && best + 1 < curve.f.size() && curve.taus[best - 1] > 0.0) {
    const double fl = curve.f[best - 1], fc = curve.f[best], fr = curve.f[best + 1];
    const double denom = fl - 2.0 * fc + fr;
    if (std::isfinite(fl) && std::isfinite(fr) && fc > fl && fc > fr && denom < 0.0) {
      const double h = curve.taus[best + 1] - curve.taus[best];
      const double u = 0.5 * (fl - fr) / denom;
      m.tau = curve.taus[best] + u * h;
      m.f = fc - 0.25 * (fl - fr) * u;
    }
  }
  return m;
}

}  // namespace analytic
}  // namespace lgsim
