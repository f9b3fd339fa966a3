#include "lgsim/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lgsim/errors.hpp"
#include "lgsim/units.hpp"

namespace lgsim::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json meta_json(const Provenance& meta) {
  json j = json::object();
  for (const auto& [k, v] : meta.entries()) j[k] = v;
  return j;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  return is;
}

void write_header(std::ostream& os, const Provenance& meta, const char* columns) {
  os << "# provenance: " << meta_json(meta).dump() << '\n' << columns << '\n';
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& path, std::size_t ncols,
                                               std::string* header = nullptr) {
  std::ifstream is = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool seen_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      seen_header = true;
      if (header) *header = line;
      // A header row is any row whose first field is not a number.
      char* end = nullptr;
      std::strtod(line.c_str(), &end);
      if (end == line.c_str()) continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw DataError("malformed number in " + path.string());
      row.push_back(v);
    }
    if (row.size() != ncols) throw DataError("wrong column count in " + path.string());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string provenance_json(const Provenance& meta) { return meta_json(meta).dump(); }

void write_trajectory_csv(const fs::path& path, const SpinTrajectory& traj,
                          const Provenance& meta) {
  traj.validate();
  auto os = open_out(path);
  write_header(os, meta, "t_s,x,y,z");
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& v = traj.xyz[i];
    os << num(traj.times[i]) << ',' << num(v.x) << ',' << num(v.y) << ',' << num(v.z) << '\n';
  }
}

void write_spectrum_csv(const fs::path& path, const SpectrumRecord& spec) {
  Provenance meta = spec.meta;
  meta.set("units", to_string(spec.units));
  meta.set("grid", to_string(spec.grid));
  auto os = open_out(path);
  write_header(os, meta, "freq_Hz,density");
  for (std::size_t k = 0; k < spec.size(); ++k)
    os << num(units::rad_to_hz(spec.freqs[k])) << ',' << num(spec.density[k]) << '\n';
}

void write_spectrum_json(const fs::path& path, const SpectrumRecord& spec) {
  json j;
  j["meta"] = meta_json(spec.meta);
  j["units"] = to_string(spec.units);
  j["grid"] = to_string(spec.grid);
  std::vector<double> f(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) f[k] = units::rad_to_hz(spec.freqs[k]);
  j["freq_Hz"] = f;
  j["density"] = spec.density;
  auto os = open_out(path);
  os << j.dump(1) << '\n';
}

SpectrumRecord read_spectrum_csv(const fs::path& path, SpectralUnits units) {
  const auto rows = read_csv_rows(path, 2);
  SpectrumRecord s;
  s.units = units;
  for (const auto& r : rows) {
    s.freqs.push_back(units::hz_to_rad(r[0]));
    s.density.push_back(r[1]);
  }
  s.grid = (!s.freqs.empty() && s.freqs.front() < 0.0) ? GridKind::symmetric : GridKind::one_sided;
  s.meta.set("source", path.string());
  return s;
}

void write_correlator_csv(const fs::path& path, const CorrelatorSeries& corr) {
  Provenance meta = corr.meta;
  meta.set("units", to_string(corr.units));
  auto os = open_out(path);
  write_header(os, meta, "tau_ns,K");
  for (std::size_t i = 0; i < corr.size(); ++i)
    os << num(units::to_ns(corr.taus[i])) << ',' << num(corr.values[i]) << '\n';
}

void write_lg_csv(const fs::path& path, const LgCurve& curve) {
  Provenance meta = curve.meta;
  meta.set("truncated", curve.truncated ? "true" : "false");
  auto os = open_out(path);
  write_header(os, meta, "tau_ns,f,sigma,sys_lo,sys_hi");
  for (std::size_t i = 0; i < curve.size(); ++i)
    os << num(units::to_ns(curve.taus[i])) << ',' << num(curve.f[i]) << ','
       << num(curve.sigma_stat[i]) << ',' << num(curve.sys_lo[i]) << ',' << num(curve.sys_hi[i])
       << '\n';
}

void write_lg_json(const fs::path& path, const LgCurve& curve) {
  json j;
  j["meta"] = meta_json(curve.meta);
  j["truncated"] = curve.truncated;
  std::vector<double> t(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) t[i] = units::to_ns(curve.taus[i]);
  j["tau_ns"] = t;
  j["f"] = curve.f;
  j["sigma"] = curve.sigma_stat;
  j["sys_lo"] = curve.sys_lo;
  j["sys_hi"] = curve.sys_hi;
  auto os = open_out(path);
  os << j.dump(1) << '\n';
}

detector::LineResponse read_line_response_csv(const fs::path& path) {
  const auto rows = read_csv_rows(path, 3);
  detector::LineResponse line;
  for (const auto& r : rows) {
    line.freqs_hz.push_back(r[0]);
    line.r.push_back(r[1]);
    line.dr_over_r.push_back(r[2]);
  }
  line.validate();
  return line;
}

void write_line_response_csv(const fs::path& path, const detector::LineResponse& line) {
  line.validate();
  auto os = open_out(path);
  os << "freq_Hz,R,dR_over_R\n";
  for (std::size_t k = 0; k < line.r.size(); ++k)
    os << num(line.freqs_hz[k]) << ',' << num(line.r[k]) << ',' << num(line.dr_over_r[k]) << '\n';
}

namespace {
static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, sizeof u);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  os.write(reinterpret_cast<const char*>(&u), sizeof u);
}

double get_f64(const unsigned char* p) {
  std::uint64_t u;
  std::memcpy(&u, p, sizeof u);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  double v;
  std::memcpy(&v, &u, sizeof v);
  return v;
}
}  // namespace

void write_raw_records(const fs::path& path, std::span<const detector::RawRecord> records,
                       double dt, const Provenance& meta) {
  if (records.empty()) throw DataError("no records to write");
  const std::size_t len = records.front().i.size();
  json layout = json::array();
  {
    auto os = open_out(path);
    for (const auto& r : records) {
      r.validate();
      if (r.i.size() != len) throw DataError("mixed record lengths");
      for (std::size_t k = 0; k < len; ++k) {
        put_f64(os, r.i[k]);
        put_f64(os, r.q[k]);
      }
      const std::string tag = detector::to_string(r.tag);
      if (!layout.empty() && layout.back()["tag"] == tag)
        layout.back()["count"] = layout.back()["count"].get<std::size_t>() + 1;
      else
        layout.push_back({{"tag", tag}, {"count", 1}});
    }
  }
  json side;
  side["format"] = "interleaved IQ float64 little-endian";
  side["dt"] = dt;
  side["record_len"] = len;
  side["n_records"] = records.size();
  side["tags"] = layout;
  side["meta"] = meta_json(meta);
  auto os = open_out(fs::path(path.string() + ".json"));
  os << side.dump(1) << '\n';
}

RawRecordFile read_raw_records(const fs::path& path) {
  json side;
  {
    auto is = open_in(fs::path(path.string() + ".json"));
    try {
      is >> side;
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed sidecar: ") + e.what());
    }
  }
  RawRecordFile out;
  out.dt = side.at("dt").get<double>();
  out.record_len = side.at("record_len").get<std::size_t>();
  const auto n = side.at("n_records").get<std::size_t>();
  std::vector<detector::RecordTag> tags;
  for (const auto& run : side.at("tags")) {
    const auto t = run.at("tag").get<std::string>() == "ON" ? detector::RecordTag::on
                                                            : detector::RecordTag::off;
    tags.insert(tags.end(), run.at("count").get<std::size_t>(), t);
  }
  if (tags.size() != n) throw DataError("sidecar tag layout does not match n_records");

  auto is = open_in(path);
  const std::size_t bytes = 16 * out.record_len;
  std::vector<unsigned char> buf(bytes);
  out.records.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes)))
      throw DataError("record file shorter than announced");
    auto& rec = out.records[r];
    rec.tag = tags[r];
    rec.i.resize(out.record_len);
    rec.q.resize(out.record_len);
    for (std::size_t k = 0; k < out.record_len; ++k) {
      rec.i[k] = get_f64(buf.data() + 16 * k);
      rec.q[k] = get_f64(buf.data() + 16 * k + 8);
    }
  }
  return out;
}

}  // namespace lgsim::io
