#include "lgsim_app/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "lgsim/analytic_spectrum.hpp"
#include "lgsim/errors.hpp"
#include "lgsim/io.hpp"
#include "lgsim/units.hpp"
#include "lgsim_app/parallel.hpp"
#include "lgsim_app/plot.hpp"

namespace lgsim::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.10g", v);
  return b;
}

std::string tag(double rabi_hz, double nbar) {
  char b[64];
  std::snprintf(b, sizeof b, "f%gMHz_n%g", rabi_hz / 1e6, nbar);
  return b;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return t;
}

void plot(const fs::path& path, const PlotSpec& spec, std::ostream& log) {
  std::string err;
  if (!write_svg(path, spec, &err)) log << "warning: plot " << path << " not written: " << err << '\n';
}

// CSV table with a provenance comment line.
class Table {
 public:
  Table(const fs::path& path, const Provenance& meta, const std::string& header) : os_(path) {
    if (!os_) throw DataError("cannot open " + path.string());
    os_ << "# provenance: " << io::provenance_json(meta) << '\n' << header << '\n';
  }
  template <class... T>
  void row(const T&... v) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(v), first = false), ...);
    os_ << '\n';
  }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  std::ofstream os_;
};

std::mutex log_mutex;

void say(std::ostream* log, const std::string& msg) {
  if (!log) return;
  std::lock_guard lock(log_mutex);
  *log << msg << std::flush;
}

}  // namespace

Provenance base_provenance(const ExperimentConfig& cfg, const std::string& command) {
  Provenance p;
  p.set("tool", "lgsim 0.3.0");
  p.set("command", command);
  p.set("seed", cfg.seed);
  // Output location and thread count never change results; leaving them out
  // keeps files from identical runs byte-identical.
  auto j = json::parse(cfg.to_json());
  j.erase("out");
  j.erase("threads");
  p.set("config", j.dump());
  return p;
}

// ---------------------------------------------------------------------------

RabiRun simulate_rabi(const ExperimentConfig& cfg, double rabi_hz, double nbar,
                      double duration_s, std::size_t samples) {
  RabiRun run;
  run.rabi_hz = rabi_hz;
  run.nbar = nbar;
  const double kappa = cfg.kappa();
  double chi = cfg.chi();
  if (cfg.rabi.apply_lambda) chi = lindblad::dispersive_correction(chi, cfg.physical.lambda, nbar);
  const double g1 = 1.0 / cfg.rabi.t1_s;
  const TlsParams tls{units::hz_to_rad(cfg.physical.omega_ge_hz), g1, 1.0 / cfg.rabi.t2_s - 0.5 * g1,
                      0.0};
  CavityParams cav = cfg.cavity();
  cav.chi0 = chi;
  const double eps = lindblad::DriveAmplitudes::eps_for_nbar(nbar, kappa);
  run.nbar_measured = eps * eps / (0.25 * kappa * kappa + chi * chi);
  run.fock_dim = std::max(2, lindblad::HilbertConfig::recommended_fock_dim(nbar));
  const lindblad::HilbertConfig hil{run.fock_dim, -2.0 * chi * run.nbar_measured, 0.0};

  const auto idle = lindblad::build_generator(tls, cav, hil, {eps, 0.0});
  const auto rho0 = lindblad::steady_state(idle);
  const auto gen = lindblad::build_generator(tls, cav, hil, {eps, 0.5 * units::hz_to_rad(rabi_hz)});
  run.warnings = gen.warnings;
  const auto t = linspace(0.0, duration_s, samples);
  run.traj = lindblad::bloch_trajectory(rho0, gen, t);
  run.fit = qubit::fit_rabi_decay(run.traj, TlsParams{0.0, g1, 0.0, 0.0});
  return run;
}

DephasingLine dephasing_line(const ExperimentConfig& cfg, const std::vector<RabiRun>& runs,
                             double max_nbar) {
  DephasingLine line;
  const RabiRun* base = nullptr;
  for (const auto& r : runs)
    if (r.nbar == 0.0) base = &r;
  if (!base) throw ParameterError("dephasing line needs an nbar = 0 run");
  line.rabi_hz = base->rabi_hz;
  for (const auto& r : runs) {
    if (r.rabi_hz != base->rabi_hz || r.nbar > max_nbar) continue;
    line.nbar.push_back(r.nbar);
    line.gamma_phi.push_back(r.fit.gamma2 - base->fit.gamma2);
  }
  const double n = static_cast<double>(line.nbar.size());
  if (n < 3) throw ParameterError("dephasing line needs at least three photon numbers");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < line.nbar.size(); ++i) {
    const double x = line.nbar[i], y = line.gamma_phi[i];
    sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  line.slope = cxy / vx;
  line.intercept = (sy - line.slope * sx) / n;
  line.r_squared = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
  const double wr = units::hz_to_rad(line.rabi_hz);
  line.predicted_slope = qubit::rabi_dephasing_rate(wr, 1.0, cfg.chi(), cfg.kappa());
  return line;
}

// ---------------------------------------------------------------------------

SpectrumCell spectrum_cell(const ExperimentConfig& cfg, double nbar, double rabi_hz, int fock_dim) {
  SpectrumCell cell;
  cell.nbar = nbar;
  cell.rabi_hz = rabi_hz;
  const double kappa = cfg.kappa(), chi = cfg.chi(), g1 = cfg.gamma1();
  const double wr = units::hz_to_rad(rabi_hz);
  // Intrinsic dephasing off: the comparison isolates the measurement.
  const TlsParams tls{units::hz_to_rad(cfg.physical.omega_ge_hz), g1, 0.0, 0.0};
  const CavityParams cav = cfg.cavity();
  const double eps = lindblad::DriveAmplitudes::eps_for_nbar(nbar, kappa);
  cell.nbar_measured = eps * eps / (0.25 * kappa * kappa + chi * chi);
  cell.fock_dim = fock_dim > 0 ? fock_dim : lindblad::HilbertConfig::recommended_fock_dim(nbar);
  cell.gamma_phi = 8.0 * cell.nbar_measured * chi * chi / kappa;

  const analytic::FiniteBandwidthParams p{wr, g1, cell.gamma_phi, kappa};
  const double g2r = p.gamma2_at(wr);
  const double target = wr * wr - 0.25 * (g2r - g1) * (g2r - g1);
  const lindblad::HilbertConfig hil{cell.fock_dim, -2.0 * chi * cell.nbar_measured, 0.0};
  auto build = [&](double eps_d) { return lindblad::build_generator(tls, cav, hil, {eps, eps_d}); };
  cell.calibration = lindblad::calibrate_rabi_drive(build, 0.5 * wr, target, 0.5 * (g1 + g2r),
                                                    cfg.spectra.calibration_iterations);
  const auto gen = build(cell.calibration.eps_d);
  cell.warnings = gen.warnings;
  const auto ss = lindblad::steady_state(gen);

  const auto m = static_cast<std::size_t>(std::floor(cfg.spectra.window_hz / cfg.spectra.bin_hz + 1e-9)) + 1;
  cell.analytic = analytic::tabulate([&](double w) { return analytic::finite_bandwidth_spectrum(w, p); },
                                     cfg.spectra.bin_hz, m);
  const auto reg = lindblad::regression_spectrum(ss, gen, cell.analytic.freqs);
  const auto dv = lindblad::simulate_deltaV(tls, cav, {cell.fock_dim, 0.0, 0.0}, eps);
  const double scale = 0.25 * dv.delta_v * dv.delta_v;
  cell.numeric = cell.analytic;
  for (std::size_t k = 0; k < m; ++k) cell.numeric.density[k] = reg.density[k] / scale;

  double num = 0.0, den = 0.0;
  for (std::size_t k = 1; k < m; ++k) {
    num += std::abs(cell.analytic.density[k] - cell.numeric.density[k]);
    den += cell.analytic.density[k];
  }
  cell.l1_error = num / den;
  for (auto* s : {&cell.analytic, &cell.numeric}) {
    s->meta.set("nbar", nbar);
    s->meta.set("rabi_hz", rabi_hz);
    s->meta.set("nbar_measured", cell.nbar_measured);
    s->meta.set("gamma_phi", cell.gamma_phi);
    s->meta.set("kappa", kappa);
  }
  cell.numeric.meta.set("fock_dim", cell.fock_dim);
  cell.numeric.meta.set("eps_d_calibrated", cell.calibration.eps_d);
  cell.numeric.meta.set("delta_v", dv.delta_v);
  return cell;
}

// ---------------------------------------------------------------------------

analytic::FiniteBandwidthParams lg_params(const ExperimentConfig& cfg) {
  return analytic::FiniteBandwidthParams::from_gamma2_at_rabi(units::hz_to_rad(cfg.lg.rabi_hz),
                                                              cfg.gamma1(), cfg.gamma2(), cfg.kappa());
}

SpectrumRecord lg_target_spectrum(const ExperimentConfig& cfg) {
  const auto p = lg_params(cfg);
  p.validate();
  // Gamma_2(w) with the cavity filter removed: the spin spectrum itself.
  auto s = analytic::tabulate(
      [&](double w) {
        return analytic::sigma_z_spectrum(w, p.omega_rabi, p.gamma1, p.gamma2_at(w));
      },
      cfg.lg.acquisition.bin_hz(), cfg.lg.acquisition.record_len / 2 + 1);
  s.meta.set("omega_rabi", p.omega_rabi);
  s.meta.set("gamma1", p.gamma1);
  s.meta.set("gamma_phi", p.gamma_phi);
  s.meta.set("kappa", p.kappa);
  return s;
}

LgCurve lg_prediction(const ExperimentConfig& cfg) {
  const auto p = lg_params(cfg);
  const double df = cfg.lg.acquisition.bin_hz();
  const auto m = static_cast<std::size_t>(std::floor(cfg.lg.window_hz / df + 1e-9)) + 1;
  // The detector filter C(w) is removed, as the pipeline's deconvolution does.
  const auto spec = analytic::tabulate(
      [&](double w) { return analytic::finite_bandwidth_spectrum(w, p) / qubit::cavity_filter(w, p.kappa); },
      df, m);
  return analytic::leggett_garg_curve(analytic::correlator_from_spectrum(spec));
}

double lg_delta_v(const ExperimentConfig& cfg) {
  const double nbar = cfg.lg.nbar;
  const double eps = lindblad::DriveAmplitudes::eps_for_nbar(nbar, cfg.kappa());
  const lindblad::HilbertConfig hil{lindblad::HilbertConfig::recommended_fock_dim(nbar), 0.0, 0.0};
  return lindblad::simulate_deltaV(cfg.tls(), cfg.cavity(), hil, eps).delta_v;
}

detector::LineResponse lg_line_response(const ExperimentConfig& cfg) {
  if (cfg.lg.line_response_csv.empty()) return detector::LineResponse::flat(cfg.lg.budget.dR_over_R);
  return io::read_line_response_csv(cfg.lg.line_response_csv);
}

std::unique_ptr<detector::TraceSource> make_source(const ExperimentConfig& cfg,
                                                   const std::string& model,
                                                   const detector::AcquisitionConfig& acq,
                                                   double delta_v) {
  const auto line = lg_line_response(cfg);
  const double kappa = cfg.kappa();
  if (model == "quantum")
    return detector::synthesize_quantum_trace(lg_target_spectrum(cfg), delta_v, kappa, line, acq);
  if (model == "macrospin") {
    const double d = cfg.lg.macrospin_diffusion > 0.0 ? cfg.lg.macrospin_diffusion : cfg.gamma2();
    return detector::synthesize_macrospin_trace(units::hz_to_rad(cfg.lg.rabi_hz), d, delta_v, kappa,
                                                line, acq);
  }
  if (model == "telegraph")
    return detector::synthesize_telegraph_trace(cfg.lg.telegraph_rate, delta_v, kappa, line, acq);
  throw ConfigError("unknown model '" + model + "'");
}

LgRun run_lg(const ExperimentConfig& cfg, const std::string& model, std::uint64_t seed,
             std::size_t n_records, std::ostream* log) {
  LgRun run;
  run.model = model;
  run.delta_v = lg_delta_v(cfg);
  const auto line = lg_line_response(cfg);
  const detector::AnalysisOptions opts{cfg.lg.window_hz, cfg.lg.noise_band_lo_hz,
                                       cfg.lg.noise_band_hi_hz, 0.1};
  const detector::ParallelOptions par{cfg.threads, 256};
  detector::AcquisitionConfig acq = cfg.lg.acquisition;
  acq.seed = seed;

  auto acquire = [&](std::size_t n) {
    acq.n_records = n;
    const auto src = make_source(cfg, model, acq, run.delta_v);
    run.noise_density = src->noise_density();
    run.peak_signal = src->peak_signal_density();
    const auto spectra = detector::accumulate_periodograms(*src, par);
    return detector::run_lg_analysis(spectra, line, run.delta_v, cfg.kappa(), cfg.lg.budget, opts);
  };

  if (n_records == 0) {
    run.pilot_records = cfg.lg.pilot_records;
    say(log, "pilot acquisition: " + std::to_string(run.pilot_records) + " records per tag\n");
    const auto pilot = acquire(run.pilot_records);
    // sigma at the predicted violation point; the pilot's own maximum sits
    // at a random delay.
    const std::size_t at = analytic::lg_max(lg_prediction(cfg)).index;
    if (at >= pilot.curve.size()) throw ParameterError("window too narrow for the predicted maximum");
    run.pilot_sigma = pilot.curve.sigma_stat[at];
    const double scale = std::pow(run.pilot_sigma / cfg.lg.target_sigma, 2);
    n_records = static_cast<std::size_t>(std::ceil(static_cast<double>(run.pilot_records) * scale));
    n_records = std::clamp(n_records, run.pilot_records, cfg.lg.max_records);
    say(log, "pilot sigma " + num(run.pilot_sigma) + " -> " + std::to_string(n_records) +
                 " records per tag\n");
  }
  run.n_records = n_records;
  run.analysis = acquire(n_records);
  run.analysis.curve.meta.set("model", model);
  run.analysis.curve.meta.set("records_per_tag", n_records);
  run.analysis.curve.meta.set("delta_v", run.delta_v);
  return run;
}

LgCurve ideal_curve(const ExperimentConfig& cfg) {
  const double wr = units::hz_to_rad(cfg.lg.rabi_hz);
  LgCurve c;
  for (int i = 0; i <= 1000; ++i) {
    const double t = 0.1e-9 * i;
    c.taus.push_back(t);
    c.f.push_back(analytic::ideal_lg(t, wr));
  }
  c.sigma_stat.assign(c.size(), 0.0);
  c.sys_lo = c.sys_hi = c.f;
  c.meta.set("model", "ideal");
  c.meta.set("omega_rabi", wr);
  return c;
}

// ---------------------------------------------------------------------------

int cmd_rabi(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path dir = cfg.out / "rabi";
  fs::create_directories(dir);
  const Provenance meta = base_provenance(cfg, "rabi");

  struct Job {
    double rabi_hz, nbar, duration;
  };
  std::vector<Job> jobs;
  for (double f : cfg.rabi.rabi_hz)
    for (double n : cfg.rabi.nbar) jobs.push_back({f, n, cfg.rabi.duration_s});
  for (double n : cfg.rabi.zeno_nbar) jobs.push_back({cfg.rabi.zeno_rabi_hz, n, cfg.rabi.zeno_duration_s});

  std::vector<RabiRun> runs(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    try {
      runs[i] = simulate_rabi(cfg, jobs[i].rabi_hz, jobs[i].nbar, jobs[i].duration, cfg.rabi.samples);
      say(&log, "rabi " + tag(jobs[i].rabi_hz, jobs[i].nbar) + ": Gamma2 = " + num(runs[i].fit.gamma2) +
                    " 1/s\n");
    } catch (const FitError& e) {
      runs[i].rabi_hz = jobs[i].rabi_hz;
      runs[i].nbar = jobs[i].nbar;
      errors[i] = e.what();
      say(&log, "rabi " + tag(jobs[i].rabi_hz, jobs[i].nbar) + ": fit failed: " + e.what() + "\n");
    }
  });
  const std::size_t n_grid = cfg.rabi.rabi_hz.size() * cfg.rabi.nbar.size();

  Table fits(dir / "fits.csv", meta,
             "rabi_hz,nbar,nbar_measured,fock_dim,gamma2_fit,omega_fit_hz,decay_time_s,rms_residual,status");
  for (std::size_t i = 0; i < n_grid; ++i) {
    const auto& r = runs[i];
    if (!r.traj.times.empty()) {
      Provenance m = meta;
      m.set("rabi_hz", r.rabi_hz);
      m.set("nbar", r.nbar);
      m.set("fock_dim", r.fock_dim);
      io::write_trajectory_csv(dir / ("traj_" + tag(r.rabi_hz, r.nbar) + ".csv"), r.traj, m);
    }
    fits.row(r.rabi_hz, r.nbar, r.nbar_measured, r.fock_dim, r.fit.gamma2,
             units::rad_to_hz(r.fit.omega_rabi), r.fit.decay_time, r.fit.rms_residual,
             errors[i].empty() ? std::string("ok") : "fit_failed");
  }

  Table slopes(dir / "slopes.csv", meta, "rabi_hz,slope,predicted_slope,relative_error,r_squared,intercept");
  PlotSpec gplot{"Measurement-induced dephasing", "nbar", "Gamma_phi (1/us)", {}, {}};
  for (double f : cfg.rabi.rabi_hz) {
    std::vector<RabiRun> same;
    bool ok = true;
    for (std::size_t i = 0; i < n_grid; ++i)
      if (runs[i].rabi_hz == f) {
        same.push_back(runs[i]);
        ok = ok && errors[i].empty();
      }
    PlotSpec zplot{"Rabi oscillations, f_R = " + num(f / 1e6) + " MHz", "t (ns)", "<sigma_z>", {}, {}};
    for (const auto& r : same) {
      if (r.traj.times.empty()) continue;
      PlotSeries s{"nbar=" + num(r.nbar), {}, r.traj.z(), {}, {}, {}, false};
      for (double t : r.traj.times) s.x.push_back(units::to_ns(t));
      zplot.series.push_back(std::move(s));
    }
    plot(dir / ("rabi_" + num(f / 1e6) + "MHz.svg"), zplot, log);
    if (!ok) continue;
    try {
      const auto line = dephasing_line(cfg, same, 5.0);
      slopes.row(f, line.slope, line.predicted_slope, line.slope / line.predicted_slope - 1.0,
                 line.r_squared, line.intercept);
      PlotSeries s{num(f / 1e6) + " MHz", line.nbar, {}, {}, {}, {}, true};
      for (double g : line.gamma_phi) s.y.push_back(g * 1e-6);
      gplot.series.push_back(std::move(s));
    } catch (const Error& e) {
      log << "warning: no dephasing line at " << f << " Hz: " << e.what() << '\n';
    }
  }
  plot(dir / "dephasing.svg", gplot, log);

  Table zeno(dir / "zeno.csv", meta, "rabi_hz,nbar,decay_time_s,gamma2_fit,omega_osc_sq,status");
  PlotSpec zp{"Decay time vs nbar at " + num(cfg.rabi.zeno_rabi_hz / 1e6) + " MHz", "nbar", "decay time (ns)", {}, {}};
  PlotSeries zs{"decay time", {}, {}, {}, {}, {}, true};
  for (std::size_t i = n_grid; i < runs.size(); ++i) {
    const auto& r = runs[i];
    zeno.row(r.rabi_hz, r.nbar, r.fit.decay_time, r.fit.gamma2, r.fit.omega_osc_sq,
             errors[i].empty() ? std::string("ok") : "fit_failed");
    if (errors[i].empty()) {
      zs.x.push_back(r.nbar);
      zs.y.push_back(units::to_ns(r.fit.decay_time));
    }
  }
  zp.series.push_back(zs);
  plot(dir / "zeno.svg", zp, log);
  log << "rabi: outputs in " << dir << '\n';
  return 0;
}

int cmd_spectra(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path dir = cfg.out / "spectra";
  fs::create_directories(dir);
  const Provenance meta = base_provenance(cfg, "spectra");
  struct Job {
    double nbar, rabi_hz;
  };
  std::vector<Job> jobs;
  for (double f : cfg.spectra.rabi_hz)
    for (double n : cfg.spectra.nbar) jobs.push_back({n, f});
  std::vector<SpectrumCell> cells(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    cells[i] = spectrum_cell(cfg, jobs[i].nbar, jobs[i].rabi_hz);
    say(&log, "spectra " + tag(jobs[i].rabi_hz, jobs[i].nbar) + ": L1 = " + num(cells[i].l1_error) + "\n");
  });

  Table t(dir / "agreement.csv", meta,
          "nbar,rabi_hz,nbar_measured,fock_dim,eps_d_calibrated,gamma_phi,l1_error,below_3pct");
  for (auto& c : cells) {
    t.row(c.nbar, c.rabi_hz, c.nbar_measured, c.fock_dim, c.calibration.eps_d, c.gamma_phi,
          c.l1_error, c.l1_error < 0.03);
    c.analytic.meta.merge(meta);
    c.numeric.meta.merge(meta);
    io::write_spectrum_csv(dir / ("analytic_" + tag(c.rabi_hz, c.nbar) + ".csv"), c.analytic);
    io::write_spectrum_csv(dir / ("numeric_" + tag(c.rabi_hz, c.nbar) + ".csv"), c.numeric);
    PlotSpec p{"S_z, f_R = " + num(c.rabi_hz / 1e6) + " MHz, nbar = " + num(c.nbar), "f (MHz)",
               "S_z (1/Hz)", {}, {}};
    PlotSeries a{"analytic", {}, c.analytic.density, {}, {}, {}, false};
    PlotSeries n{"master equation", {}, c.numeric.density, {}, {}, {}, true};
    for (double w : c.analytic.freqs) a.x.push_back(units::rad_to_mhz(w));
    n.x = a.x;
    p.series = {a, n};
    plot(dir / ("overlay_" + tag(c.rabi_hz, c.nbar) + ".svg"), p, log);
  }
  // Peak-normalized analytic and numeric families per Rabi frequency.
  for (double f : cfg.spectra.rabi_hz) {
    for (const char* kind : {"analytic", "numeric"}) {
      PlotSpec p{std::string(kind) + " spectra, f_R = " + num(f / 1e6) + " MHz", "f (MHz)",
                 "S_z / max", {}, {}};
      for (const auto& c : cells) {
        if (c.rabi_hz != f) continue;
        const auto& s = std::string(kind) == "analytic" ? c.analytic : c.numeric;
        const double peak = *std::max_element(s.density.begin(), s.density.end());
        PlotSeries ps{"nbar=" + num(c.nbar), {}, {}, {}, {}, {}, false};
        for (std::size_t k = 0; k < s.size(); ++k) {
          ps.x.push_back(units::rad_to_mhz(s.freqs[k]));
          ps.y.push_back(s.density[k] / peak);
        }
        p.series.push_back(std::move(ps));
      }
      plot(dir / (std::string(kind) + "_" + num(f / 1e6) + "MHz.svg"), p, log);
    }
  }
  log << "spectra: outputs in " << dir << '\n';
  return 0;
}

int cmd_lg(const ExperimentConfig& cfg, std::ostream& log) {
  const std::string name = cfg.lg.ideal ? "ideal" : cfg.lg.model;
  const fs::path dir = cfg.out / ("lg_" + name);
  fs::create_directories(dir);
  const Provenance meta = base_provenance(cfg, "lg");
  json summary;
  summary["model"] = name;

  if (cfg.lg.ideal) {
    LgCurve c = ideal_curve(cfg);
    c.meta.merge(meta);
    const auto mx = analytic::lg_max(c);
    io::write_lg_csv(dir / "lg_curve.csv", c);
    io::write_lg_json(dir / "lg_curve.json", c);
    summary["f_max"] = mx.f;
    summary["tau_max_ns"] = units::to_ns(mx.tau);
    PlotSpec p{"Ideal Leggett-Garg function", "tau (ns)", "f_LG", {}, {1.0, 1.5}};
    PlotSeries s{"2cos(wt) - cos(2wt)", {}, c.f, {}, {}, {}, false};
    for (double t : c.taus) s.x.push_back(units::to_ns(t));
    p.series.push_back(s);
    plot(dir / "lg_curve.svg", p, log);
    log << "ideal: f* = " << num(mx.f) << " at " << num(units::to_ns(mx.tau)) << " ns\n";
  } else {
    const auto run = run_lg(cfg, cfg.lg.model, cfg.seed, cfg.lg.n_records, &log);
    const auto& a = run.analysis;
    auto with_meta = [&](auto rec) {
      rec.meta.merge(meta);
      return rec;
    };
    io::write_spectrum_csv(dir / "corrected_spectrum.csv", with_meta(a.corrected));
    io::write_spectrum_csv(dir / "deconvolved_spectrum.csv", with_meta(a.deconvolved));
    io::write_spectrum_json(dir / "deconvolved_spectrum.json", with_meta(a.deconvolved));
    io::write_correlator_csv(dir / "correlator.csv", with_meta(a.correlator));
    io::write_lg_csv(dir / "lg_curve.csv", with_meta(a.curve));
    io::write_lg_json(dir / "lg_curve.json", with_meta(a.curve));

    const std::size_t i = a.max.index;
    summary["records_per_tag"] = run.n_records;
    summary["pilot_records"] = run.pilot_records;
    summary["delta_v"] = run.delta_v;
    summary["K0"] = a.k0;
    summary["f_max"] = a.max.f;
    summary["f_at_grid_max"] = a.curve.f[i];
    summary["tau_max_ns"] = units::to_ns(a.max.tau);
    summary["sigma0"] = a.sigma0;
    summary["sigma_at_max"] = a.sigma_at_max;
    summary["systematic_rel_at_max"] = a.sys_rel_at_max;
    summary["sys_lo_at_max"] = a.curve.sys_lo[i];
    summary["significance"] = a.significance;
    summary["violation"] = a.significance > 0.0;

    PlotSpec sp{"Spin spectrum (" + name + ")", "f (MHz)", "S_z (1/Hz)", {}, {}};
    PlotSeries s1{"corrected", {}, a.corrected.density, {}, {}, {}, false};
    PlotSeries s2{"deconvolved", {}, a.deconvolved.density, {}, {}, {}, false};
    for (double w : a.corrected.freqs) s1.x.push_back(units::rad_to_mhz(w));
    s2.x = s1.x;
    sp.series = {s1, s2};
    plot(dir / "spectrum.svg", sp, log);

    PlotSpec lp{"Leggett-Garg function (" + name + ")", "tau (ns)", "f_LG", {}, {1.0}};
    PlotSeries c{"measured", {}, a.curve.f, a.curve.sigma_stat, a.curve.sys_lo, a.curve.sys_hi, true};
    for (double t : a.curve.taus) c.x.push_back(units::to_ns(t));
    lp.series.push_back(c);
    plot(dir / "lg_curve.svg", lp, log);

    log << name << ": records/tag " << run.n_records << ", K(0) = " << num(a.k0) << ", f* = " << num(a.max.f)
        << " at " << num(units::to_ns(a.max.tau)) << " ns, sigma = " << num(a.sigma_at_max)
        << ", systematic = " << num(100 * a.sys_rel_at_max) << "%, significance = " << num(a.significance)
        << '\n';
  }
  summary["provenance"] = json::parse(io::provenance_json(meta));
  std::ofstream(dir / "summary.json") << summary.dump(1) << '\n';
  log << "lg: outputs in " << dir << '\n';
  return 0;
}

}  // namespace lgsim::app
