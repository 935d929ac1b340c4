#pragma once

// Deterministic SVG drawing of a configuration: particles as <circle>, MST
// edges as <line>, tier legend as <rect>/<text>. 3D input is drawn as its
// orthographic projection onto the x-y plane.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ccshape/shape_core.hpp"
#include "ccshape/structure_analysis.hpp"

namespace ccshape {

struct SvgOptions {
  bool tiers = true;
  double point_radius = 3.0;  // pixels
  double gap = kDefaultTierGap;
  int size = 800;             // plot area edge, pixels
};

struct SvgResult {
  std::string svg;
  bool projected = false;  // input was 3D
  EdgeTierLadder ladder;
};

namespace detail {

inline std::string fmt6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

/// Red -> orange -> yellow; t in [0, 1].
inline std::string tier_color(std::size_t k, std::size_t count) {
  const double t = count > 1 ? static_cast<double>(k) / static_cast<double>(count - 1) : 0.0;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#ff%02x00", static_cast<int>(std::lround(255.0 * t)));
  return buf;
}

inline constexpr const char* kPlainEdgeColor = "#555555";

}  // namespace detail

inline SvgResult render_svg(const MassConfiguration& c, const SvgOptions& opt = {}) {
  SvgResult out;
  out.projected = c.dim() == 3;
  const auto mst = euclidean_mst(c);
  out.ladder = edge_tier_ladder(mst, opt.gap);

  const std::size_t n = c.size();
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    xmin = std::min(xmin, c.coord(i, 0));
    xmax = std::max(xmax, c.coord(i, 0));
    ymin = std::min(ymin, c.coord(i, 1));
    ymax = std::max(ymax, c.coord(i, 1));
  }
  const double margin = 20.0 + opt.point_radius;
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-300});
  const double scale = (opt.size - 2.0 * margin) / span;
  const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
  auto px = [&](std::size_t i) { return 0.5 * opt.size + scale * (c.coord(i, 0) - cx); };
  auto py = [&](std::size_t i) { return 0.5 * opt.size - scale * (c.coord(i, 1) - cy); };

  const int legend_w = 260;
  const int width = opt.size + legend_w;
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
       std::to_string(opt.size) + "\" viewBox=\"0 0 " + std::to_string(width) + " " + std::to_string(opt.size) +
       "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" + std::to_string(opt.size) +
       "\" fill=\"#ffffff\"/>\n";

  s += "<g stroke-width=\"2\" stroke-linecap=\"round\">\n";
  const auto& tiers = out.ladder.tiers;
  for (std::size_t e = 0; e < mst.edges.size(); ++e) {
    const auto& edge = mst.edges[e];
    const std::string color =
        opt.tiers ? detail::tier_color(out.ladder.tier_of(edge.length), tiers.size()) : detail::kPlainEdgeColor;
    s += "<line x1=\"" + detail::fmt6(px(edge.i)) + "\" y1=\"" + detail::fmt6(py(edge.i)) + "\" x2=\"" +
         detail::fmt6(px(edge.j)) + "\" y2=\"" + detail::fmt6(py(edge.j)) + "\" stroke=\"" + color + "\"/>\n";
  }
  s += "</g>\n<g fill=\"#1a1a1a\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    s += "<circle cx=\"" + detail::fmt6(px(i)) + "\" cy=\"" + detail::fmt6(py(i)) + "\" r=\"" +
         detail::fmt6(opt.point_radius) + "\"/>\n";
  }
  s += "</g>\n";

  // legend
  const int lx = opt.size + 10;
  int ly = 24;
  s += "<g font-family=\"monospace\" font-size=\"12\">\n";
  s += "<text x=\"" + std::to_string(lx) + "\" y=\"" + std::to_string(ly) + "\">N = " + std::to_string(n) +
       (out.projected ? " (x-y projection)" : "") + "</text>\n";
  ly += 20;
  if (opt.tiers) {
    for (std::size_t k = 0; k < tiers.size(); ++k) {
      s += "<rect x=\"" + std::to_string(lx) + "\" y=\"" + std::to_string(ly - 10) +
           "\" width=\"14\" height=\"10\" fill=\"" + detail::tier_color(k, tiers.size()) + "\"/>\n";
      s += "<text x=\"" + std::to_string(lx + 20) + "\" y=\"" + std::to_string(ly) + "\">tier " +
           std::to_string(k + 1) + ": " + std::to_string(tiers[k].lengths.size()) + " edges, mean " +
           detail::fmt6(tiers[k].mean) + "</text>\n";
      ly += 16;
    }
  } else {
    s += "<rect x=\"" + std::to_string(lx) + "\" y=\"" + std::to_string(ly - 10) +
         "\" width=\"14\" height=\"10\" fill=\"" + detail::kPlainEdgeColor + "\"/>\n";
    s += "<text x=\"" + std::to_string(lx + 20) + "\" y=\"" + std::to_string(ly) + "\">MST edges: " +
         std::to_string(mst.edges.size()) + "</text>\n";
  }
  s += "</g>\n</svg>\n";
  out.svg = std::move(s);
  return out;
}

}  // namespace ccshape
