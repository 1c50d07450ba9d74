#pragma once

#include <algorithm>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace retmap::io {

/// Row-major grid of basin labels. In 3D rows run from the north pole down
/// and columns run east in azimuth from 0, i.e. an equirectangular image; a
/// 2D map is a single row over the angle [0, 2 pi).
struct LabelRaster {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<int> labels;
};

inline constexpr const char* kUnresolvedColor = "#a0a0a0";
inline constexpr const char* kFailedColor = "#000000";

/// Label i always gets palette entry i mod size, so colours line up across
/// runs that share a critical point ordering.
inline const std::vector<std::string>& basin_palette() {
  static const std::vector<std::string> colors = {
      "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
      "#e377c2", "#17becf", "#bcbd22", "#393b79", "#637939", "#843c39",
  };
  return colors;
}

inline std::string label_color(int label) {
  if (label == -2) return kFailedColor;
  if (label < 0) return kUnresolvedColor;
  const auto& p = basin_palette();
  return p[static_cast<std::size_t>(label) % p.size()];
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

/// Writes the raster as runs of equal-label rectangles plus a legend.
/// `legend` names label 0, 1, ...; unresolved and failed entries are
/// appended automatically.
inline void write_basin_svg(std::ostream& os, const LabelRaster& raster,
                            const std::vector<std::string>& legend, const std::string& title) {
  if (raster.labels.size() != raster.rows * raster.cols || raster.rows == 0)
    throw std::invalid_argument("write_basin_svg: raster shape mismatch");
  const int map_w = 800;
  const int cell_h = raster.rows == 1 ? 80 : std::max(1, 400 / static_cast<int>(raster.rows));
  const int map_h = cell_h * static_cast<int>(raster.rows);
  const int top = 30, left = 10;
  const int legend_rows = static_cast<int>(legend.size()) + 2;
  const int height = top + map_h + 20 + 18 * legend_rows;
  const double cell_w = static_cast<double>(map_w) / static_cast<double>(raster.cols);

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << map_w + 2 * left << "\" height=\""
     << height << "\" font-family=\"monospace\" font-size=\"12\">\n";
  os << "<text x=\"" << left << "\" y=\"18\">" << xml_escape(title) << "</text>\n";
  os << "<g shape-rendering=\"crispEdges\">\n";
  for (std::size_t r = 0; r < raster.rows; ++r) {
    std::size_t c = 0;
    while (c < raster.cols) {
      int label = raster.labels[r * raster.cols + c];
      std::size_t end = c + 1;
      while (end < raster.cols && raster.labels[r * raster.cols + end] == label) ++end;
      double x0 = left + cell_w * static_cast<double>(c);
      double x1 = left + cell_w * static_cast<double>(end);
      os << "<rect x=\"" << x0 << "\" y=\"" << top + cell_h * static_cast<int>(r) << "\" width=\""
         << x1 - x0 << "\" height=\"" << cell_h << "\" fill=\"" << label_color(label) << "\"/>\n";
      c = end;
    }
  }
  os << "</g>\n";

  int y = top + map_h + 20;
  auto entry = [&](const std::string& color, const std::string& text) {
    os << "<rect x=\"" << left << "\" y=\"" << y - 10 << "\" width=\"12\" height=\"12\" fill=\""
       << color << "\"/><text x=\"" << left + 18 << "\" y=\"" << y << "\">" << xml_escape(text)
       << "</text>\n";
    y += 18;
  };
  for (std::size_t i = 0; i < legend.size(); ++i) entry(label_color(static_cast<int>(i)), legend[i]);
  entry(kUnresolvedColor, "unresolved");
  entry(kFailedColor, "failed");
  os << "</svg>\n";
}

}  // namespace retmap::io
