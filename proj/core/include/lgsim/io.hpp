#pragma once

// File formats.
//   Trajectory CSV:     t_s,x,y,z
//   Spectrum CSV:       freq_Hz,density
//   Correlator CSV:     tau_ns,K
//   LG curve CSV:       tau_ns,f,sigma,sys_lo,sys_hi
//   Line response CSV:  freq_Hz,R,dR_over_R
//   Raw records:        <name>.bin holds, per record, record_len interleaved
//                       (I, Q) little-endian float64 pairs; <name>.bin.json
//                       holds dt, record_len, n_records and the tag layout.
// CSV files start with a "# provenance: {...}" line carrying the parameters
// as JSON; JSON variants carry them under "meta".

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lgsim/detector.hpp"
#include "lgsim/qubit_dynamics.hpp"
#include "lgsim/records.hpp"

namespace lgsim::io {

std::string provenance_json(const Provenance& meta);

void write_trajectory_csv(const std::filesystem::path& path, const SpinTrajectory& traj,
                          const Provenance& meta = {});

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumRecord& spec);
void write_spectrum_json(const std::filesystem::path& path, const SpectrumRecord& spec);
SpectrumRecord read_spectrum_csv(const std::filesystem::path& path,
                                 SpectralUnits units = SpectralUnits::spin_units);

void write_correlator_csv(const std::filesystem::path& path, const CorrelatorSeries& corr);

void write_lg_csv(const std::filesystem::path& path, const LgCurve& curve);
void write_lg_json(const std::filesystem::path& path, const LgCurve& curve);

detector::LineResponse read_line_response_csv(const std::filesystem::path& path);
void write_line_response_csv(const std::filesystem::path& path,
                             const detector::LineResponse& line);

struct RawRecordFile {
  double dt = 0.0;
  std::size_t record_len = 0;
  std::vector<detector::RawRecord> records;
};

void write_raw_records(const std::filesystem::path& path,
                       std::span<const detector::RawRecord> records, double dt,
                       const Provenance& meta = {});
RawRecordFile read_raw_records(const std::filesystem::path& path);

}  // namespace lgsim::io
