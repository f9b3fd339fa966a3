#pragma once

// Minimal SVG line plots. Rendering is best effort: failures are reported
// through the return value and never affect the numeric outputs.

#include <filesystem>
#include <string>
#include <vector>

namespace lgsim::app {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional symmetric error bars
  std::vector<double> lo;   // optional band (with hi)
  std::vector<double> hi;
  bool markers = false;
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<PlotSeries> series;
  std::vector<double> hlines;  // dashed horizontal reference lines
};

bool write_svg(const std::filesystem::path& path, const PlotSpec& spec, std::string* error = nullptr);

}  // namespace lgsim::app
