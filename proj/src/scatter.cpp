// SVG biplot of the oriented first two components.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "lexstab/error.hpp"
#include "lexstab/report.hpp"

namespace lexstab {
namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 700.0;
constexpr double kMargin = 70.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  return s == "-0.00" ? "0.00" : s;
}

std::string escape(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Point {
  double x;
  double y;
};

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Andrew's monotone chain; counter-clockwise, no repeated endpoint.
std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

std::string emit_scatter(const PcaResult& oriented, const ClusterAssignment& clusters, const SuitabilityRanking& ranking) {
  const std::size_t n = oriented.rows.size();
  if (n < 3) throw DomainError("scatter needs >= 3 points");
  if (oriented.scores.cols() < 2) throw DomainError("scatter needs two components");
  if (clusters.labels.size() != n) throw DomainError("cluster labels do not match PCA rows");

  double max_abs_x = 0.0;
  double max_abs_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_abs_x = std::max(max_abs_x, std::fabs(oriented.scores(i, 0)));
    max_abs_y = std::max(max_abs_y, std::fabs(oriented.scores(i, 1)));
  }
  // Symmetric ranges keep the origin (quadrant boundaries) centred.
  const double half_x = max_abs_x > 0.0 ? 1.1 * max_abs_x : 1.0;
  const double half_y = max_abs_y > 0.0 ? 1.1 * max_abs_y : 1.0;
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  auto sx = [&](double x) { return kMargin + (x + half_x) / (2 * half_x) * plot_w; };
  auto sy = [&](double y) { return kMargin + (half_y - y) / (2 * half_y) * plot_h; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\">\n";
  svg += "<defs><marker id=\"arrow\" markerWidth=\"8\" markerHeight=\"8\" refX=\"7\" refY=\"4\" orient=\"auto\">"
         "<path d=\"M0,0 L8,4 L0,8 z\" fill=\"#444444\"/></marker></defs>\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"30.00\" text-anchor=\"middle\" font-size=\"18\">"
         "PCA of meaning classes</text>\n";

  // Axes through the origin.
  svg += "<g class=\"axes\" stroke=\"#999999\" stroke-dasharray=\"4,4\">\n";
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(sy(0)) + "\" x2=\"" + num(kWidth - kMargin) + "\" y2=\"" + num(sy(0)) + "\"/>\n";
  svg += "<line x1=\"" + num(sx(0)) + "\" y1=\"" + num(kMargin) + "\" x2=\"" + num(sx(0)) + "\" y2=\"" + num(kHeight - kMargin) + "\"/>\n";
  svg += "</g>\n";
  svg += "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" + num(plot_w) + "\" height=\"" + num(plot_h) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
  char caption[96];
  std::snprintf(caption, sizeof caption, "Dim1 (%.1f%%)", 100.0 * oriented.explained.at(0));
  svg += "<text class=\"caption\" x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 25) +
         "\" text-anchor=\"middle\" font-size=\"14\">" + caption + "</text>\n";
  std::snprintf(caption, sizeof caption, "Dim2 (%.1f%%)", 100.0 * oriented.explained.at(1));
  svg += "<text class=\"caption\" x=\"25.00\" y=\"" + num(kHeight / 2) + "\" text-anchor=\"middle\" font-size=\"14\" "
         "transform=\"rotate(-90 25.00 " + num(kHeight / 2) + ")\">" + caption + "</text>\n";

  // Cluster hulls.
  svg += "<g class=\"hulls\">\n";
  for (std::size_t c = 0; c < clusters.k; ++c) {
    std::vector<Point> members;
    for (std::size_t i = 0; i < n; ++i)
      if (clusters.labels[i] == c) members.push_back({sx(oriented.scores(i, 0)), sy(oriented.scores(i, 1))});
    if (members.size() < 3) continue;
    const auto hull = convex_hull(members);
    std::string pts;
    for (const Point& p : hull) pts += (pts.empty() ? "" : " ") + num(p.x) + "," + num(p.y);
    const char* color = kPalette[c % std::size(kPalette)];
    svg += "<polygon class=\"hull\" data-cluster=\"" + std::to_string(c) + "\" points=\"" + pts + "\" fill=\"" + color +
           "\" fill-opacity=\"0.12\" stroke=\"" + color + "\"/>\n";
  }
  svg += "</g>\n";

  // Loading arrows, scaled so the longest reaches 80% of the shorter half-axis.
  double max_load = 0.0;
  for (std::size_t v = 0; v < oriented.variables.size(); ++v)
    max_load = std::max(max_load, std::hypot(oriented.loadings(v, 0), oriented.loadings(v, 1)));
  const double arrow_scale = max_load > 0.0 ? 0.8 * std::min(half_x, half_y) / max_load : 0.0;
  svg += "<g class=\"loadings\" stroke=\"#444444\">\n";
  for (std::size_t v = 0; v < oriented.variables.size(); ++v) {
    const double x = oriented.loadings(v, 0) * arrow_scale;
    const double y = oriented.loadings(v, 1) * arrow_scale;
    svg += "<line class=\"loading\" x1=\"" + num(sx(0)) + "\" y1=\"" + num(sy(0)) + "\" x2=\"" + num(sx(x)) + "\" y2=\"" +
           num(sy(y)) + "\" marker-end=\"url(#arrow)\"/>\n";
    svg += "<text class=\"loading-label\" x=\"" + num(sx(1.08 * x)) + "\" y=\"" + num(sy(1.08 * y)) +
           "\" font-size=\"11\" fill=\"#444444\" stroke=\"none\" text-anchor=\"middle\">" + escape(oriented.variables[v]) +
           "</text>\n";
  }
  svg += "</g>\n";

  // Points; title carries the rank for hover tooltips.
  std::vector<std::size_t> rank_of(n, 0);
  for (const auto& e : ranking.entries) {
    const auto it = std::find(oriented.rows.begin(), oriented.rows.end(), e.concept_id);
    if (it != oriented.rows.end()) rank_of[static_cast<std::size_t>(it - oriented.rows.begin())] = e.rank;
  }
  svg += "<g class=\"points\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sx(oriented.scores(i, 0));
    const double y = sy(oriented.scores(i, 1));
    const char* color = kPalette[clusters.labels[i] % std::size(kPalette)];
    svg += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"4\" fill=\"" + color + "\"><title>" +
           escape(oriented.rows[i]) + " (rank " + std::to_string(rank_of[i]) + ")</title></circle>\n";
    svg += "<text class=\"point-label\" x=\"" + num(x + 6) + "\" y=\"" + num(y - 6) + "\" font-size=\"10\">" +
           escape(oriented.rows[i]) + "</text>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace lexstab
