#pragma once

#include <vector>

#include "lgsim/detector.hpp"
#include "lgsim/fourier.hpp"

namespace lgsim::detector {

class SynthesisScratch {
 public:
  explicit SynthesisScratch(std::size_t record_len) : fft(record_len), signal(record_len) {}
  fourier::RealFft fft;
  std::vector<double> signal;
  std::vector<double> fine;
  std::vector<double> normals;
};

}  // namespace lgsim::detector
