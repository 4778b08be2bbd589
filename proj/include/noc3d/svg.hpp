#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "noc3d/core.hpp"

namespace noc3d {

struct Rgb {
  int r = 0, g = 0, b = 0;
};

// Linear ramps sampled at evenly spaced stops.
inline const std::vector<Rgb>& palette_stops(const std::string& name) {
  static const std::vector<Rgb> thermal = {
      {13, 8, 135}, {84, 2, 163}, {156, 23, 158}, {205, 62, 78}, {237, 121, 83},
      {253, 180, 47}, {240, 249, 33}};
  static const std::vector<Rgb> gray = {{0, 0, 0}, {255, 255, 255}};
  if (name == "gray") return gray;
  if (name == "thermal" || name.empty()) return thermal;
  throw input_error("unknown palette: " + name);
}

inline Rgb palette_color(const std::string& palette, double u) {
  const auto& stops = palette_stops(palette);
  u = std::clamp(u, 0.0, 1.0);
  const double pos = u * static_cast<double>(stops.size() - 1);
  const int k = std::min(static_cast<int>(pos), static_cast<int>(stops.size()) - 2);
  const double f = pos - k;
  auto mix = [f](int a, int b) { return static_cast<int>(std::lround(a + f * (b - a))); };
  return Rgb{mix(stops[k].r, stops[k + 1].r), mix(stops[k].g, stops[k + 1].g),
             mix(stops[k].b, stops[k + 1].b)};
}

// One-layer heatmap. `values` is row-major, ny rows of nx values, row 0 drawn
// at the bottom. Deterministic text output: fixed formatting, no timestamps.
inline void emit_heatmap(const std::vector<double>& values, int nx, int ny,
                         const std::string& palette, const std::filesystem::path& out_path,
                         const std::string& title = "") {
  if (nx < 1 || ny < 1 || static_cast<int>(values.size()) != nx * ny)
    throw input_error("emit_heatmap: grid dims do not match value count");
  palette_stops(palette);  // validate name up front

  const double vmin = *std::min_element(values.begin(), values.end());
  const double vmax = *std::max_element(values.begin(), values.end());
  const double span = vmax - vmin;

  const int cell = 12;
  const int legend_w = 120, margin = 10, title_h = title.empty() ? 0 : 20;
  const int wpx = margin * 2 + nx * cell + legend_w;
  const int hpx = margin * 2 + std::max(ny * cell, 140) + title_h;

  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                wpx, hpx, wpx, hpx);
  os << buf;
  if (!title.empty()) {
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-family=\"monospace\" font-size=\"12\">%s</text>\n",
                  margin, margin + 12, title.c_str());
    os << buf;
  }
  const int oy = margin + title_h;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double v = values[j * nx + i];
      const double u = span > 0 ? (v - vmin) / span : 0.5;
      const Rgb c = palette_color(palette, u);
      const int px = margin + i * cell;
      const int py = oy + (ny - 1 - j) * cell;
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"#%02x%02x%02x\"/>\n",
                    px, py, cell, cell, c.r, c.g, c.b);
      os << buf;
    }
  }

  // Legend: vertical ramp with min/max annotations.
  const int lx = margin + nx * cell + 30, lh = 120, lw = 16;
  for (int k = 0; k < lh; ++k) {
    const Rgb c = palette_color(palette, 1.0 - static_cast<double>(k) / (lh - 1));
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"1\" fill=\"#%02x%02x%02x\"/>\n",
                  lx, oy + k, lw, c.r, c.g, c.b);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-family=\"monospace\" font-size=\"10\">%.6g</text>\n",
                lx + lw + 4, oy + 10, vmax);
  os << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-family=\"monospace\" font-size=\"10\">%.6g</text>\n",
                lx + lw + 4, oy + lh, vmin);
  os << buf;
  os << "</svg>\n";

  std::ofstream out(out_path);
  if (!out) throw input_error("cannot write svg: " + out_path.string());
  out << os.str();
}

}  // namespace noc3d
