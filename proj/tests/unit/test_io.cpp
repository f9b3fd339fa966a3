#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "lgsim/analytic_spectrum.hpp"
#include "lgsim/errors.hpp"
#include "lgsim/io.hpp"
#include "json.hpp"

using namespace lgsim;
namespace fs = std::filesystem;

namespace {
fs::path scratch_dir() {
  auto d = fs::temp_directory_path() / "lgsim_io_test";
  fs::create_directories(d);
  return d;
}
std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  return {std::istreambuf_iterator<char>(is), {}};
}
}  // namespace

TEST_CASE("spectrum CSV round trip carries provenance") {
  auto s = analytic::tabulate([](double w) { return 1.0 / (1.0 + w * w * 1e-14); }, 97656.25, 20);
  s.meta.set("omega_rabi_hz", 10.6e6);
  s.meta.set("seed", std::uint64_t{42});
  const auto path = scratch_dir() / "s.csv";
  io::write_spectrum_csv(path, s);
  const auto text = slurp(path);
  CHECK(text.rfind("# provenance: ", 0) == 0);
  CHECK(text.find("omega_rabi_hz") != std::string::npos);
  CHECK(text.find("freq_Hz,density") != std::string::npos);
  auto back = io::read_spectrum_csv(path);
  REQUIRE(back.size() == s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(back.density[k] == s.density[k]);
    CHECK(back.freqs[k] == doctest::Approx(s.freqs[k]).epsilon(1e-15));
  }
  io::write_spectrum_json(scratch_dir() / "s.json", s);
  auto j = nlohmann::json::parse(slurp(scratch_dir() / "s.json"));
  CHECK(j["units"] == "spin_units");
  CHECK(j["density"].size() == 20);
}

TEST_CASE("LG curve CSV columns") {
  LgCurve c;
  c.taus = {0.0, 16.6e-9};
  c.f = {1.0, 1.3};
  c.sigma_stat = {0.1, 0.05};
  c.sys_lo = {0.92, 1.2};
  c.sys_hi = {1.08, 1.4};
  io::write_lg_csv(scratch_dir() / "lg.csv", c);
  const auto text = slurp(scratch_dir() / "lg.csv");
  CHECK(text.find("tau_ns,f,sigma,sys_lo,sys_hi\n0,1,0.10000000000000001,0.92000000000000004,1.0800000000000001\n16.600000000000001,1.3") !=
        std::string::npos);
  io::write_lg_json(scratch_dir() / "lg.json", c);
  auto j = nlohmann::json::parse(slurp(scratch_dir() / "lg.json"));
  CHECK(j["sys_hi"][1] == 1.4);
}

TEST_CASE("raw records round trip") {
  std::vector<detector::RawRecord> recs(5);
  for (std::size_t r = 0; r < recs.size(); ++r) {
    recs[r].tag = r < 3 ? detector::RecordTag::on : detector::RecordTag::off;
    for (int k = 0; k < 8; ++k) {
      recs[r].i.push_back(r + 0.1 * k);
      recs[r].q.push_back(-1.0 / (k + 1.0));
    }
  }
  const auto path = scratch_dir() / "raw.bin";
  io::write_raw_records(path, recs, 1e-8);
  CHECK(fs::file_size(path) == 5 * 8 * 16);
  auto j = nlohmann::json::parse(slurp(path.string() + ".json"));
  CHECK(j["tags"].size() == 2);
  auto back = io::read_raw_records(path);
  CHECK(back.dt == 1e-8);
  REQUIRE(back.records.size() == 5);
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(back.records[r].tag == recs[r].tag);
    CHECK(back.records[r].i == recs[r].i);
    CHECK(back.records[r].q == recs[r].q);
  }
  recs[4].i.pop_back();
  recs[4].q.pop_back();
  CHECK_THROWS_AS(io::write_raw_records(path, recs, 1e-8), DataError);
}

TEST_CASE("line response CSV") {
  const auto path = scratch_dir() / "line.csv";
  {
    std::ofstream os(path);
    os << "freq_Hz,R,dR_over_R\n0,1,0.01\n1e7,0.9,0.02\n3e7,0.8,0.03\n";
  }
  auto line = io::read_line_response_csv(path);
  CHECK(line.at(5e6) == doctest::Approx(0.95));
  CHECK(line.relative_uncertainty_at(2e7) == doctest::Approx(0.025));
  {
    std::ofstream os(path);
    os << "freq_Hz,R,dR_over_R\n0,1,0.01\n1e7,abc,0.02\n";
  }
  CHECK_THROWS_AS(io::read_line_response_csv(path), DataError);
}
