#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "detector_internal.hpp"
#include "lgsim/errors.hpp"
#include "lgsim/qubit_dynamics.hpp"
#include "lgsim/units.hpp"

namespace lgsim::detector {

struct PeriodogramAccumulator::Fft {
  explicit Fft(std::size_t n) : fft(n) {}
  fourier::RealFft fft;
};

PeriodogramAccumulator::PeriodogramAccumulator(std::size_t record_len, double dt)
    : len_(record_len),
      dt_(dt),
      fft_(std::make_unique<Fft>(record_len)),
      sum_on_(record_len / 2 + 1, 0.0),
      sum_off_(record_len / 2 + 1, 0.0) {
  if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
}
PeriodogramAccumulator::~PeriodogramAccumulator() = default;
PeriodogramAccumulator::PeriodogramAccumulator(PeriodogramAccumulator&&) noexcept = default;
PeriodogramAccumulator& PeriodogramAccumulator::operator=(PeriodogramAccumulator&&) noexcept =
    default;

void PeriodogramAccumulator::add(const RawRecord& rec) {
  if (rec.i.size() != len_ || rec.q.size() != len_)
    throw DataError("record length differs from accumulator length");
  auto& sum = rec.tag == RecordTag::on ? sum_on_ : sum_off_;
  for (const auto* ch : {&rec.i, &rec.q}) {
    auto x = fft_->fft.real_data();
    std::copy(ch->begin(), ch->end(), x.begin());
    fft_->fft.forward();
    const auto X = fft_->fft.spectrum_data();
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += std::norm(X[k]);
  }
  (rec.tag == RecordTag::on ? n_on_ : n_off_) += 1;
}

void PeriodogramAccumulator::merge(const PeriodogramAccumulator& other) {
  if (other.len_ != len_) throw DataError("cannot merge accumulators of different lengths");
  for (std::size_t k = 0; k < sum_on_.size(); ++k) {
    sum_on_[k] += other.sum_on_[k];
    sum_off_[k] += other.sum_off_[k];
  }
  n_on_ += other.n_on_;
  n_off_ += other.n_off_;
}

namespace {

SpectrumRecord density_record(const std::vector<double>& sum, std::size_t count,
                              std::size_t len, double dt) {
  SpectrumRecord s = SpectrumRecord::one_sided(1.0 / (dt * static_cast<double>(len)),
                                               len / 2 + 1, SpectralUnits::volts_squared);
  const double norm = count ? dt / (static_cast<double>(len) * static_cast<double>(count)) : 0.0;
  for (std::size_t k = 0; k < sum.size(); ++k) s.density[k] = sum[k] * norm;
  s.meta.set("records", count);
  return s;
}

}  // namespace

PeriodogramPair PeriodogramAccumulator::result() const {
  if (n_on_ == 0 || n_off_ == 0) throw DataError("need at least one ON and one OFF record");
  PeriodogramPair p;
  p.on = density_record(sum_on_, n_on_, len_, dt_);
  p.off = density_record(sum_off_, n_off_, len_, dt_);
  p.n_on = n_on_;
  p.n_off = n_off_;
  return p;
}

PeriodogramPair accumulate_periodograms(std::span<const RawRecord> records, double dt) {
  if (records.empty()) throw DataError("no records");
  PeriodogramAccumulator acc(records.front().i.size(), dt);
  for (const auto& r : records) acc.add(r);
  return acc.result();
}

namespace {

struct Sums {
  std::vector<double> on, off;
  std::size_t n_on = 0, n_off = 0;
  int level = 0;

  void add(const Sums& o) {
    for (std::size_t k = 0; k < on.size(); ++k) {
      on[k] += o.on[k];
      off[k] += o.off[k];
    }
    n_on += o.n_on;
    n_off += o.n_off;
  }
};

// Pairwise tree reduction over a fixed-size array of partial sums.
Sums reduce_tree(std::vector<Sums>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  Sums a = reduce_tree(parts, lo, mid);
  const Sums b = reduce_tree(parts, mid, hi);
  a.add(b);
  return a;
}

}  // namespace

PeriodogramPair accumulate_periodograms(const TraceSource& source, std::size_t begin,
                                        std::size_t end, const ParallelOptions& par) {
  const auto& cfg = source.config();
  end = std::min(end, source.size());
  if (begin >= end) throw DataError("empty record range");
  const std::size_t bins = cfg.record_len / 2 + 1;
  const std::size_t chunk = std::max<std::size_t>(1, par.chunk_records);
  const std::size_t n_chunks = (end - begin + chunk - 1) / chunk;
  constexpr std::size_t kBlock = 64;  // chunks per reduction block

  unsigned threads = par.threads ? par.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, kBlock));

  // Binary-counter stack of block sums: merging order depends only on the
  // number of blocks, never on scheduling.
  std::vector<Sums> stack;
  std::vector<Sums> parts;

  for (std::size_t b0 = 0; b0 < n_chunks; b0 += kBlock) {
    const std::size_t b1 = std::min(n_chunks, b0 + kBlock);
    parts.assign(b1 - b0, Sums{std::vector<double>(bins, 0.0), std::vector<double>(bins, 0.0)});

    auto work = [&](unsigned t) {
      auto scratch = source.make_scratch();
      fourier::RealFft fft(cfg.record_len);
      RawRecord rec;
      for (std::size_t c = b0 + t; c < b1; c += threads) {
        Sums& s = parts[c - b0];
        const std::size_t r0 = begin + c * chunk, r1 = std::min(end, r0 + chunk);
        for (std::size_t r = r0; r < r1; ++r) {
          source.generate(r, rec, *scratch);
          auto& sum = rec.tag == RecordTag::on ? s.on : s.off;
          for (const auto* ch : {&rec.i, &rec.q}) {
            auto x = fft.real_data();
            std::copy(ch->begin(), ch->end(), x.begin());
            fft.forward();
            const auto X = fft.spectrum_data();
            for (std::size_t k = 0; k < bins; ++k) sum[k] += std::norm(X[k]);
          }
          (rec.tag == RecordTag::on ? s.n_on : s.n_off) += 1;
        }
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    }

    Sums block = reduce_tree(parts, 0, parts.size());
    block.level = 0;
    stack.push_back(std::move(block));
    while (stack.size() >= 2 && stack[stack.size() - 1].level == stack[stack.size() - 2].level) {
      Sums top = std::move(stack.back());
      stack.pop_back();
      stack.back().add(top);
      stack.back().level += 1;
    }
  }
  Sums total = std::move(stack.back());
  stack.pop_back();
  while (!stack.empty()) {
    Sums next = std::move(stack.back());
    stack.pop_back();
    next.add(total);
    total = std::move(next);
  }

  if (total.n_on == 0 || total.n_off == 0)
    throw DataError("record range must contain ON and OFF records");
  PeriodogramPair p;
  p.on = density_record(total.on, total.n_on, cfg.record_len, cfg.dt);
  p.off = density_record(total.off, total.n_off, cfg.record_len, cfg.dt);
  p.n_on = total.n_on;
  p.n_off = total.n_off;
  return p;
}

PeriodogramPair accumulate_periodograms(const TraceSource& source, const ParallelOptions& par) {
  return accumulate_periodograms(source, 0, source.size(), par);
}

PeriodogramPair merge(const PeriodogramPair& a, const PeriodogramPair& b) {
  if (a.on.size() != b.on.size()) throw GridError("cannot merge spectra on different grids");
  PeriodogramPair out = a;
  auto mix = [](SpectrumRecord& dst, const SpectrumRecord& x, std::size_t nx,
                const SpectrumRecord& y, std::size_t ny) {
    const double w = static_cast<double>(nx) / static_cast<double>(nx + ny);
    for (std::size_t k = 0; k < dst.density.size(); ++k)
      dst.density[k] = w * x.density[k] + (1.0 - w) * y.density[k];
    dst.meta.set("records", nx + ny);
  };
  mix(out.on, a.on, a.n_on, b.on, b.n_on);
  mix(out.off, a.off, a.n_off, b.off, b.n_off);
  out.n_on = a.n_on + b.n_on;
  out.n_off = a.n_off + b.n_off;
  return out;
}

SpectrumRecord correct_and_normalize(const SpectrumRecord& s_on, const SpectrumRecord& s_off,
                                     const LineResponse& line, double delta_v) {
  if (s_on.size() != s_off.size()) throw GridError("ON and OFF spectra differ in size");
  const double h = s_on.step();
  for (std::size_t k = 0; k < s_on.size(); ++k)
    if (std::abs(s_on.freqs[k] - s_off.freqs[k]) > 1e-9 * h)
      throw GridError("ON and OFF spectra are on different grids");
  if (!(delta_v > 0.0)) throw ParameterError("deltaV must be > 0");
  const double half_v2 = 0.25 * delta_v * delta_v;
  SpectrumRecord out = s_on;
  out.units = SpectralUnits::spin_units;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double r = line.at(units::rad_to_hz(out.freqs[k]));
    if (!(r > 0.0)) throw DataError("line response vanishes inside the band");
    out.density[k] = (s_on.density[k] - s_off.density[k]) / (r * half_v2);
  }
  out.meta.set("delta_v", delta_v);
  return out;
}

SpectrumRecord deconvolve_cavity(const SpectrumRecord& spec, double kappa, double min_gain) {
  spec.validate();
  if (!(kappa > 0.0)) throw ParameterError("kappa must be > 0");
  SpectrumRecord out = spec;
  if (std::isinf(kappa)) return out;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double c = qubit::cavity_filter(out.freqs[k], kappa);
    if (c < min_gain)
      throw GridError("band extends where the cavity gain is below the deconvolution guard");
    out.density[k] /= c;
  }
  out.meta.set("deconvolved_kappa", kappa);
  return out;
}

SpectrumRecord crop(const SpectrumRecord& spec, double window_hz) {
  const double h = spec.step();
  if (spec.grid != GridKind::one_sided) throw GridError("crop expects a one-sided grid");
  const double wmax = units::hz_to_rad(window_hz);
  std::size_t m = 0;
  while (m < spec.size() && spec.freqs[m] <= wmax + 1e-9 * h) ++m;
  if (m < 2) throw GridError("window keeps fewer than two bins");
  SpectrumRecord out = spec;
  out.freqs.resize(m);
  out.density.resize(m);
  out.meta.set("window_hz", window_hz);
  return out;
}

double estimate_sigma0(const SpectrumRecord& corrected, double f_lo_hz, double f_hi_hz) {
  const double h = corrected.step();
  const double lo = units::hz_to_rad(f_lo_hz) - 1e-9 * h, hi = units::hz_to_rad(f_hi_hz) + 1e-9 * h;
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < corrected.size(); ++k) {
    if (corrected.freqs[k] < lo || corrected.freqs[k] > hi) continue;
    sum += corrected.density[k];
    ++n;
  }
  if (n < 3) throw DataError("signal-free band holds fewer than three bins");
  const double mean = sum / static_cast<double>(n);
  for (std::size_t k = 0; k < corrected.size(); ++k) {
    if (corrected.freqs[k] < lo || corrected.freqs[k] > hi) continue;
    const double d = corrected.density[k] - mean;
    sum2 += d * d;
  }
  return std::sqrt(sum2 / static_cast<double>(n - 1));
}

std::vector<double> statistical_sigma(double sigma0, double kappa, std::size_t n_bins,
                                      double df_hz, std::size_t n_points) {
  if (!(sigma0 >= 0.0)) throw ParameterError("sigma0 must be >= 0");
  if (n_bins < 2 || !(df_hz > 0.0)) throw ParameterError("need >= 2 bins and df > 0");
  const std::size_t n = 2 * n_bins;
  std::vector<double> var_k(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    const double c =
        std::isinf(kappa) ? 1.0 : qubit::cavity_filter(units::hz_to_rad(df_hz * static_cast<double>(k)), kappa);
    var_k[k] = sigma0 * sigma0 / (c * c);
  }
  std::vector<double> out(n_points);
  for (std::size_t r = 0; r < n_points; ++r) {
    double acc = var_k[0];
    for (std::size_t k = 1; k < n_bins; ++k) {
      const double ph = 2.0 * std::numbers::pi * static_cast<double>(r * k % n) / static_cast<double>(n);
      const double g = 2.0 * std::cos(ph) - std::cos(2.0 * ph);
      acc += 4.0 * var_k[k] * g * g;
    }
    out[r] = df_hz * std::sqrt(acc);
  }
  return out;
}

SystematicParts systematic_parts(const LgCurve& curve, const ErrorBudget& budget,
                                 const SpectrumRecord& corrected, double kappa) {
  budget.validate();
  SystematicParts parts;
  const std::size_t n = curve.size();
  parts.flat.assign(n, budget.dR_over_R + budget.dV2_over_V2);
  parts.cavity.assign(n, 0.0);

  if (budget.dKappa_over_kappa > 0.0 && !std::isinf(kappa)) {
    auto f_with = [&](double sign) {
      SpectrumRecord s = corrected;
      for (std::size_t k = 0; k < s.size(); ++k) {
        const double w = s.freqs[k];
        const double c = qubit::cavity_filter(w, kappa);
        double rel = 0.0;
        if (w != 0.0) {
          const double q = kappa / (2.0 * w);
          rel = 2.0 * budget.dKappa_over_kappa / (1.0 + q * q);
        }
        s.density[k] /= c * (1.0 + sign * rel);
      }
      return analytic::leggett_garg_curve(analytic::correlator_from_spectrum(s)).f;
    };
    const SpectrumRecord base = deconvolve_cavity(corrected, kappa, 0.0);
    const auto f0 = analytic::leggett_garg_curve(analytic::correlator_from_spectrum(base)).f;
    const auto fp = f_with(1.0), fm = f_with(-1.0);
    for (std::size_t i = 0; i < n && i < f0.size(); ++i) {
      const double d = std::max(std::abs(fp[i] - f0[i]), std::abs(fm[i] - f0[i]));
      parts.cavity[i] = f0[i] != 0.0 ? d / std::abs(f0[i]) : 0.0;
    }
  }
  parts.total.resize(n);
  for (std::size_t i = 0; i < n; ++i) parts.total[i] = parts.flat[i] + parts.cavity[i];
  return parts;
}

LgCurve systematic_bounds(const LgCurve& curve, const ErrorBudget& budget,
                          const SpectrumRecord& corrected, double kappa) {
  const SystematicParts parts = systematic_parts(curve, budget, corrected, kappa);
  LgCurve out = curve;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = std::abs(out.f[i]) * parts.total[i];
    out.sys_lo[i] = out.f[i] - d;
    out.sys_hi[i] = out.f[i] + d;
  }
  return out;
}

LgAnalysis run_lg_analysis(const SpectrumRecord& corrected, double kappa,
                           const ErrorBudget& budget, const AnalysisOptions& options) {
  budget.validate();
  LgAnalysis a;
  a.corrected = crop(corrected, options.window_hz);
  a.deconvolved = deconvolve_cavity(a.corrected, kappa, options.min_gain);
  a.correlator = analytic::correlator_from_spectrum(a.deconvolved);
  LgCurve curve = analytic::leggett_garg_curve(a.correlator);

  a.sigma0 = budget.sigma0 > 0.0
                 ? budget.sigma0
                 : estimate_sigma0(corrected, options.noise_band_lo_hz, options.noise_band_hi_hz);
  const double df = units::rad_to_hz(a.corrected.step());
  curve.sigma_stat = statistical_sigma(a.sigma0, kappa, a.corrected.size(), df, curve.size());
  a.curve = systematic_bounds(curve, budget, a.corrected, kappa);
  a.curve.meta.set("sigma0", a.sigma0);
  a.curve.meta.set("kappa", kappa);

  a.max = analytic::lg_max(a.curve);
  a.k0 = a.correlator.values.front();
  const std::size_t i = a.max.index;
  a.sigma_at_max = a.curve.sigma_stat[i];
  a.sys_rel_at_max = a.curve.f[i] != 0.0 ? (a.curve.f[i] - a.curve.sys_lo[i]) / std::abs(a.curve.f[i]) : 0.0;
  a.significance = a.sigma_at_max > 0.0 ? (a.curve.sys_lo[i] - 1.0) / a.sigma_at_max
                                        : (a.curve.sys_lo[i] > 1.0 ? INFINITY : -INFINITY);
  return a;
}

LgAnalysis run_lg_analysis(const PeriodogramPair& spectra, const LineResponse& line,
                           double delta_v, double kappa, const ErrorBudget& budget,
                           const AnalysisOptions& options) {
  const SpectrumRecord corrected = correct_and_normalize(spectra.on, spectra.off, line, delta_v);
  LgAnalysis a = run_lg_analysis(corrected, kappa, budget, options);
  a.n_on = spectra.n_on;
  a.n_off = spectra.n_off;
  return a;
}

}  // namespace lgsim::detector
