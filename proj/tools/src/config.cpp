#include "lgsim_app/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lgsim/units.hpp"

namespace lgsim::app {

using nlohmann::json;

namespace {

// Reads j[key] into v when present; unknown keys are reported by the caller.
template <class T>
void get(const json& j, const char* key, T& v, std::set<std::string>& seen) {
  seen.insert(key);
  if (!j.contains(key)) return;
  try {
    v = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& seen, const std::string& where) {
  for (const auto& [k, _] : j.items())
    if (!seen.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

const json& section(const json& j, const char* key, std::set<std::string>& seen) {
  static const json empty = json::object();
  seen.insert(key);
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return j.at(key);
}

}  // namespace

void ExperimentConfig::check() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be > 0");
  };
  positive(physical.kappa_hz, "physical.kappa_hz");
  positive(physical.t1_s, "physical.t1_s");
  positive(physical.t2_s, "physical.t2_s");
  positive(rabi.t1_s, "rabi.t1_s");
  positive(rabi.t2_s, "rabi.t2_s");
  positive(rabi.duration_s, "rabi.duration_s");
  positive(rabi.zeno_duration_s, "rabi.zeno_duration_s");
  positive(spectra.window_hz, "spectra.window_hz");
  positive(spectra.bin_hz, "spectra.bin_hz");
  positive(lg.window_hz, "lg.window_hz");
  positive(lg.target_sigma, "lg.target_sigma");
  if (rabi.samples < 16) throw ConfigError("rabi.samples must be >= 16");
  if (rabi.rabi_hz.empty() || rabi.nbar.empty()) throw ConfigError("rabi sweeps must not be empty");
  if (spectra.rabi_hz.empty() || spectra.nbar.empty())
    throw ConfigError("spectra sweeps must not be empty");
  if (lg.model != "quantum" && lg.model != "macrospin" && lg.model != "telegraph")
    throw ConfigError("lg.model must be quantum, macrospin or telegraph");
  if (lg.pilot_records < 10) throw ConfigError("lg.pilot_records must be >= 10");
  if (validate.control_seeds < 1 || validate.mc_reps < 2 || validate.normalization_sets < 1)
    throw ConfigError("validate counts must be positive");
  try {
    lg.acquisition.validate();
    lg.budget.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

double ExperimentConfig::kappa() const { return units::hz_to_rad(physical.kappa_hz); }
double ExperimentConfig::chi() const { return units::hz_to_rad(physical.chi_hz); }

TlsParams ExperimentConfig::tls() const {
  return {units::hz_to_rad(physical.omega_ge_hz), gamma1(), gamma2() - 0.5 * gamma1(),
          physical.p_e0};
}

CavityParams ExperimentConfig::cavity() const {
  return {units::hz_to_rad(physical.omega_c_hz), kappa(), chi(), physical.lambda,
          physical.n_crit};
}

std::string ExperimentConfig::to_json() const {
  const auto& a = lg.acquisition;
  json j;
  j["seed"] = seed;
  j["out"] = out.string();
  j["threads"] = threads;
  j["physical"] = {{"omega_ge_hz", physical.omega_ge_hz}, {"omega_c_hz", physical.omega_c_hz},
                   {"kappa_hz", physical.kappa_hz},       {"chi_hz", physical.chi_hz},
                   {"t1_s", physical.t1_s},               {"t2_s", physical.t2_s},
                   {"lambda", physical.lambda},           {"p_e0", physical.p_e0},
                   {"n_crit", physical.n_crit}};
  j["rabi"] = {{"t1_s", rabi.t1_s},
               {"t2_s", rabi.t2_s},
               {"rabi_hz", rabi.rabi_hz},
               {"nbar", rabi.nbar},
               {"duration_s", rabi.duration_s},
               {"samples", rabi.samples},
               {"zeno_rabi_hz", rabi.zeno_rabi_hz},
               {"zeno_nbar", rabi.zeno_nbar},
               {"zeno_duration_s", rabi.zeno_duration_s},
               {"apply_lambda", rabi.apply_lambda}};
  j["spectra"] = {{"nbar", spectra.nbar},
                  {"rabi_hz", spectra.rabi_hz},
                  {"window_hz", spectra.window_hz},
                  {"bin_hz", spectra.bin_hz},
                  {"calibration_iterations", spectra.calibration_iterations}};
  j["lg"] = {{"rabi_hz", lg.rabi_hz},
             {"nbar", lg.nbar},
             {"window_hz", lg.window_hz},
             {"noise_band_lo_hz", lg.noise_band_lo_hz},
             {"noise_band_hi_hz", lg.noise_band_hi_hz},
             {"dt_s", a.dt},
             {"record_len", a.record_len},
             {"t_on_s", a.t_on},
             {"t_off_s", a.t_off},
             {"t_ss_s", a.t_ss},
             {"noise_to_peak", a.noise_to_peak},
             {"iq_angle", a.iq_angle},
             {"iq_imbalance", a.iq_imbalance},
             {"n_records", lg.n_records},
             {"target_sigma", lg.target_sigma},
             {"pilot_records", lg.pilot_records},
             {"max_records", lg.max_records},
             {"dR_over_R", lg.budget.dR_over_R},
             {"dV2_over_V2", lg.budget.dV2_over_V2},
             {"dkappa_over_kappa", lg.budget.dKappa_over_kappa},
             {"sigma0", lg.budget.sigma0},
             {"line_response_csv", lg.line_response_csv},
             {"model", lg.model},
             {"ideal", lg.ideal},
             {"macrospin_diffusion", lg.macrospin_diffusion},
             {"telegraph_rate", lg.telegraph_rate}};
  j["validate"] = {{"quick", validate.quick},
                   {"control_seeds", validate.control_seeds},
                   {"control_records", validate.control_records},
                   {"control_noise_to_peak", validate.control_noise_to_peak},
                   {"mc_reps", validate.mc_reps},
                   {"mc_records", validate.mc_records},
                   {"normalization_sets", validate.normalization_sets}};
  return j.dump(1);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  std::set<std::string> top;
  get(j, "seed", c.seed, top);
  std::string out = c.out.string();
  get(j, "out", out, top);
  c.out = out;
  get(j, "threads", c.threads, top);

  {
    std::set<std::string> s;
    const json& p = section(j, "physical", top);
    auto& x = c.physical;
    get(p, "omega_ge_hz", x.omega_ge_hz, s);
    get(p, "omega_c_hz", x.omega_c_hz, s);
    get(p, "kappa_hz", x.kappa_hz, s);
    get(p, "chi_hz", x.chi_hz, s);
    get(p, "t1_s", x.t1_s, s);
    get(p, "t2_s", x.t2_s, s);
    get(p, "lambda", x.lambda, s);
    get(p, "p_e0", x.p_e0, s);
    get(p, "n_crit", x.n_crit, s);
    reject_unknown(p, s, "physical");
  }
  {
    std::set<std::string> s;
    const json& p = section(j, "rabi", top);
    auto& x = c.rabi;
    get(p, "t1_s", x.t1_s, s);
    get(p, "t2_s", x.t2_s, s);
    get(p, "rabi_hz", x.rabi_hz, s);
    get(p, "nbar", x.nbar, s);
    get(p, "duration_s", x.duration_s, s);
    get(p, "samples", x.samples, s);
    get(p, "zeno_rabi_hz", x.zeno_rabi_hz, s);
    get(p, "zeno_nbar", x.zeno_nbar, s);
    get(p, "zeno_duration_s", x.zeno_duration_s, s);
    get(p, "apply_lambda", x.apply_lambda, s);
    reject_unknown(p, s, "rabi");
  }
  {
    std::set<std::string> s;
    const json& p = section(j, "spectra", top);
    auto& x = c.spectra;
    get(p, "nbar", x.nbar, s);
    get(p, "rabi_hz", x.rabi_hz, s);
    get(p, "window_hz", x.window_hz, s);
    get(p, "bin_hz", x.bin_hz, s);
    get(p, "calibration_iterations", x.calibration_iterations, s);
    reject_unknown(p, s, "spectra");
  }
  {
    std::set<std::string> s;
    const json& p = section(j, "lg", top);
    auto& x = c.lg;
    auto& a = x.acquisition;
    get(p, "rabi_hz", x.rabi_hz, s);
    get(p, "nbar", x.nbar, s);
    get(p, "window_hz", x.window_hz, s);
    get(p, "noise_band_lo_hz", x.noise_band_lo_hz, s);
    get(p, "noise_band_hi_hz", x.noise_band_hi_hz, s);
    get(p, "dt_s", a.dt, s);
    get(p, "record_len", a.record_len, s);
    get(p, "t_on_s", a.t_on, s);
    get(p, "t_off_s", a.t_off, s);
    get(p, "t_ss_s", a.t_ss, s);
    get(p, "noise_to_peak", a.noise_to_peak, s);
    get(p, "iq_angle", a.iq_angle, s);
    get(p, "iq_imbalance", a.iq_imbalance, s);
    get(p, "n_records", x.n_records, s);
    get(p, "target_sigma", x.target_sigma, s);
    get(p, "pilot_records", x.pilot_records, s);
    get(p, "max_records", x.max_records, s);
    get(p, "dR_over_R", x.budget.dR_over_R, s);
    get(p, "dV2_over_V2", x.budget.dV2_over_V2, s);
    get(p, "dkappa_over_kappa", x.budget.dKappa_over_kappa, s);
    get(p, "sigma0", x.budget.sigma0, s);
    get(p, "line_response_csv", x.line_response_csv, s);
    get(p, "model", x.model, s);
    get(p, "ideal", x.ideal, s);
    get(p, "macrospin_diffusion", x.macrospin_diffusion, s);
    get(p, "telegraph_rate", x.telegraph_rate, s);
    reject_unknown(p, s, "lg");
  }
  {
    std::set<std::string> s;
    const json& p = section(j, "validate", top);
    auto& x = c.validate;
    get(p, "quick", x.quick, s);
    get(p, "control_seeds", x.control_seeds, s);
    get(p, "control_records", x.control_records, s);
    get(p, "control_noise_to_peak", x.control_noise_to_peak, s);
    get(p, "mc_reps", x.mc_reps, s);
    get(p, "mc_records", x.mc_records, s);
    get(p, "normalization_sets", x.normalization_sets, s);
    reject_unknown(p, s, "validate");
  }
  reject_unknown(j, top, "config");
  c.check();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

}  // namespace lgsim::app
