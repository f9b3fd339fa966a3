#include "lgsim_app/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace lgsim::app {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

// 1-2-5 tick spacing.
double tick_step(double span) {
  const double raw = span / 6.0;
  const double p = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * p) return m * p;
  return 10 * p;
}

}  // namespace

bool write_svg(const std::filesystem::path& path, const PlotSpec& spec, std::string* error) {
  try {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : spec.series)
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        const double e = i < s.err.size() ? s.err[i] : 0.0;
        const double lo = i < s.lo.size() ? std::min(s.lo[i], s.y[i] - e) : s.y[i] - e;
        const double hi = i < s.hi.size() ? std::max(s.hi[i], s.y[i] + e) : s.y[i] + e;
        x0 = std::min(x0, s.x[i]);
        x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, lo);
        y1 = std::max(y1, hi);
      }
    for (double h : spec.hlines) y0 = std::min(y0, h), y1 = std::max(y1, h);
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    const double W = 720, H = 450, L = 80, R = 180, T = 40, B = 60;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << esc(spec.title) << "</text>\n";

    const double xs = tick_step(x1 - x0), ys = tick_step(y1 - y0);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
      os << "<line x1=\"" << px(t) << "\" y1=\"" << T << "\" x2=\"" << px(t) << "\" y2=\"" << H - B
         << "\" stroke=\"#eee\"/>\n";
      os << "<text x=\"" << px(t) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
         << fmt(std::abs(t) < 1e-12 * xs ? 0.0 : t) << "</text>\n";
    }
    for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
      os << "<line x1=\"" << L << "\" y1=\"" << py(t) << "\" x2=\"" << W - R << "\" y2=\"" << py(t)
         << "\" stroke=\"#eee\"/>\n";
      os << "<text x=\"" << L - 6 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">"
         << fmt(std::abs(t) < 1e-12 * ys ? 0.0 : t) << "</text>\n";
    }
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
       << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
       << esc(spec.xlabel) << "</text>\n";
    os << "<text transform=\"translate(20," << (T + H - B) / 2
       << ") rotate(-90)\" text-anchor=\"middle\">" << esc(spec.ylabel) << "</text>\n";
    for (double h : spec.hlines)
      os << "<line x1=\"" << L << "\" y1=\"" << py(h) << "\" x2=\"" << W - R << "\" y2=\"" << py(h)
         << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n";

    for (std::size_t si = 0; si < spec.series.size(); ++si) {
      const auto& s = spec.series[si];
      const char* col = kColors[si % (sizeof kColors / sizeof *kColors)];
      const std::size_t n = std::min(s.x.size(), s.y.size());
      if (s.lo.size() >= n && s.hi.size() >= n && n > 1) {
        os << "<polygon fill=\"" << col << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < n; ++i) os << px(s.x[i]) << ',' << py(s.hi[i]) << ' ';
        for (std::size_t i = n; i-- > 0;) os << px(s.x[i]) << ',' << py(s.lo[i]) << ' ';
        os << "\"/>\n";
      }
      os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < n; ++i)
        if (std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      os << "\"/>\n";
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.y[i])) continue;
        if (i < s.err.size() && s.err[i] > 0)
          os << "<line x1=\"" << px(s.x[i]) << "\" y1=\"" << py(s.y[i] - s.err[i]) << "\" x2=\""
             << px(s.x[i]) << "\" y2=\"" << py(s.y[i] + s.err[i]) << "\" stroke=\"" << col << "\"/>\n";
        if (s.markers)
          os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2.5\" fill=\""
             << col << "\"/>\n";
      }
      const double ly = T + 16 + 18 * static_cast<double>(si);
      os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30
         << "\" y2=\"" << ly - 4 << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << W - R + 36 << "\" y=\"" << ly << "\">" << esc(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return true;
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return false;
  }
}

}  // namespace lgsim::app
