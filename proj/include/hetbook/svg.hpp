#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "hetbook/realize.hpp"

namespace hetbook {

// Deterministic SVG emitters: fixed viewport mapping, %.4f coordinates, no
// timestamps. One panel per page (2D) or per pair subspace (3D transverse
// view).

namespace svg_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

struct Mapper {
  double x0, x1, y0, y1;  // world window
  double W = 900, H = 480, pad = 40;
  double X(double x) const {
    return pad + (x - x0) / (x1 - x0) * (W - 2 * pad);
  }
  double Y(double y) const {
    return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad);
  }
};

inline void polyline(std::ostringstream& os, const Mapper& mp,
                     const std::vector<std::array<double, 2>>& pts,
                     const std::string& stroke, double width,
                     const std::string& dash = "") {
  os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
     << width << "\"";
  if (!dash.empty()) os << " stroke-dasharray=\"" << dash << "\"";
  os << " points=\"";
  for (const auto& p : pts)
    os << num(mp.X(p[0])) << "," << num(mp.Y(p[1])) << " ";
  os << "\"/>\n";
}

inline const char* palette(int i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};
  return colors[i % 8];
}

}  // namespace svg_detail

// Page panel of a book embedding: spine horizontal, arcs as semicircles, one
// half-plane above and one below.
inline std::string svg_embedding_page(const HetNet& net,
                                      const BookEmbedding& emb, int page) {
  using namespace svg_detail;
  const int n = net.num_nodes();
  Mapper mp{-0.8, (n - 1) * emb.spine.spacing + 0.8, -1.6, 1.6};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << mp.W
     << "\" height=\"" << mp.H << "\">\n";
  os << "<line x1=\"" << num(mp.X(mp.x0)) << "\" y1=\"" << num(mp.Y(0))
     << "\" x2=\"" << num(mp.X(mp.x1)) << "\" y2=\"" << num(mp.Y(0))
     << "\" stroke=\"#888\" stroke-width=\"1\"/>\n";
  for (int v = 0; v < n; ++v) {
    const double x = emb.spine.rho(v);
    os << "<circle cx=\"" << num(mp.X(x)) << "\" cy=\"" << num(mp.Y(0))
       << "\" r=\"4\" fill=\"#000\"/>\n";
    os << "<text x=\"" << num(mp.X(x)) << "\" y=\"" << num(mp.Y(0) + 18)
       << "\" font-size=\"12\" text-anchor=\"middle\">" << net.nodes[v]
       << "</text>\n";
  }
  for (int e = 0; e < net.num_edges(); ++e) {
    if (emb.placements[e].page != page) continue;
    const double xs = emb.spine.rho(net.edges[e].first);
    const double xt = emb.spine.rho(net.edges[e].second);
    const double cx = 0.5 * (xs + xt);
    const double r = 0.5 * std::abs(xt - xs);
    const int half = emb.placements[e].half;
    std::vector<std::array<double, 2>> pts;
    for (int s = 0; s <= 48; ++s) {
      const double th = 3.14159265358979 * s / 48.0;
      const double x = cx - (xs < xt ? r : -r) * std::cos(th);
      pts.push_back({xs < xt ? cx - r * std::cos(th) : cx + r * std::cos(th),
                     half * r * std::sin(th)});
      (void)x;
    }
    polyline(os, mp, pts, palette(e), 1.8);
  }
  os << "</svg>\n";
  return os.str();
}

// Realized page: the arcs of one 2D subspace plus trajectory projections
// (u, v) = (x_0, x_j - x_0).
inline std::string svg_realization_page(
    const Realization& R, const SubspaceId& sub,
    const std::vector<Trajectory>& trajectories) {
  using namespace svg_detail;
  double umin = 1e300, umax = -1e300, vmax = 0.0;
  for (double r : R.rho) {
    umin = std::min(umin, r);
    umax = std::max(umax, r);
  }
  for (const auto& arc : R.arcs)
    if (arc.dim == 2 && arc.subspace == sub)
      for (const auto& p : arc.way) {
        umin = std::min(umin, p[0]);
        umax = std::max(umax, p[0]);
        vmax = std::max(vmax, std::abs(p[1]));
      }
  Mapper mp{umin - 0.5, umax + 0.5, -vmax - 0.3, vmax + 0.3};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << mp.W
     << "\" height=\"" << mp.H << "\">\n";
  os << "<line x1=\"" << num(mp.X(mp.x0)) << "\" y1=\"" << num(mp.Y(0))
     << "\" x2=\"" << num(mp.X(mp.x1)) << "\" y2=\"" << num(mp.Y(0))
     << "\" stroke=\"#888\" stroke-width=\"1\"/>\n";
  // kappa band
  for (int s : {+1, -1}) {
    std::vector<std::array<double, 2>> band{
        {mp.x0, s * R.cfg.kappa}, {mp.x1, s * R.cfg.kappa}};
    polyline(os, mp, band, "#ddd", 0.8, "4,4");
  }
  for (int v = 0; v < R.net.num_nodes(); ++v) {
    os << "<circle cx=\"" << num(mp.X(R.rho[v])) << "\" cy=\"" << num(mp.Y(0))
       << "\" r=\"4\" fill=\"#000\"/>\n";
    os << "<text x=\"" << num(mp.X(R.rho[v])) << "\" y=\""
       << num(mp.Y(0) + 18) << "\" font-size=\"12\" text-anchor=\"middle\">"
       << R.net.nodes[v] << "</text>\n";
  }
  int ci = 0;
  for (const auto& arc : R.arcs) {
    if (arc.dim != 2 || !(arc.subspace == sub)) continue;
    std::vector<std::array<double, 2>> pts;
    for (const auto& s : arc.samples) pts.push_back({s.point[0], s.point[1]});
    polyline(os, mp, pts, palette(ci++), 1.2);
  }
  const int j = sub.j1;
  for (const auto& traj : trajectories) {
    std::vector<std::array<double, 2>> pts;
    for (const auto& x : traj.states) pts.push_back({x[0], x[j] - x[0]});
    polyline(os, mp, pts, "#000", 0.8, "2,3");
  }
  os << "</svg>\n";
  return os.str();
}

// Transverse view of a pair subspace: the two transverse coordinates, the
// prism cross-section of the hub, arc traces and trajectory projections.
inline std::string svg_realization_pair(
    const Realization& R, int hub, const std::vector<Trajectory>& trajectories) {
  using namespace svg_detail;
  const SubspaceId sub = R.assignment[hub];
  const double lim = R.cfg.lane3_base() + 4 * R.cfg.lane_step;
  Mapper mp{-lim, lim, -lim, lim};
  mp.W = 560;
  mp.H = 560;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << mp.W
     << "\" height=\"" << mp.H << "\">\n";
  // Coincidence-plane traces.
  const double pi = std::acos(-1.0);
  for (int t = 0; t < 6; ++t) {
    const double ang = pi / 6.0 + t * pi / 3.0;
    std::vector<std::array<double, 2>> ray{
        {0, 0}, {lim * std::cos(ang), lim * std::sin(ang)}};
    polyline(os, mp, ray, "#eee", 1.0);
  }
  // Prism cross-section.
  int fan = 0;
  for (const auto& arc : R.arcs)
    if (arc.dim == 3 && arc.source == hub) fan = arc.fan;
  if (fan >= 3) {
    std::vector<std::array<double, 2>> poly;
    double base = 0.0;
    for (const auto& arc : R.arcs)
      if (arc.dim == 3 && arc.source == hub) base = arc.sector_angle;
    for (int s = 0; s <= fan; ++s) {
      const double th = base + pi / fan + 2.0 * pi * s / fan;
      poly.push_back({R.cfg.eps * std::cos(th), R.cfg.eps * std::sin(th)});
    }
    polyline(os, mp, poly, "#c33", 1.2, "5,3");
  }
  auto transverse = [&](const Vec& x) {
    // Project the ambient state into the pair's transverse plane.
    const double xc = x[0], yc = x[sub.j1], zc = x[sub.j2];
    const double m = (xc + yc + zc) / 3.0;
    static const double s2 = std::sqrt(2.0), s6 = std::sqrt(6.0);
    const double a = (xc - m) / s2 - (yc - m) / s2;
    const double b = (xc - m) / s6 + (yc - m) / s6 - 2.0 * (zc - m) / s6;
    return std::array<double, 2>{a, b};
  };
  int ci = 0;
  for (const auto& arc : R.arcs) {
    if (arc.dim != 3 || arc.source != hub) continue;
    std::vector<std::array<double, 2>> pts;
    for (const auto& s : arc.samples) {
      Vec x{s.point[0], s.point[1], s.point[2]};
      const double m = (x[0] + x[1] + x[2]) / 3.0;
      static const double s2 = std::sqrt(2.0), s6 = std::sqrt(6.0);
      pts.push_back({(x[0] - m) / s2 - (x[1] - m) / s2,
                     (x[0] - m) / s6 + (x[1] - m) / s6 - 2 * (x[2] - m) / s6});
    }
    polyline(os, mp, pts, palette(ci++), 1.2);
  }
  for (const auto& traj : trajectories) {
    std::vector<std::array<double, 2>> pts;
    for (const auto& x : traj.states) pts.push_back(transverse(x));
    polyline(os, mp, pts, "#000", 0.8, "2,3");
  }
  os << "<circle cx=\"" << num(mp.X(0)) << "\" cy=\"" << num(mp.Y(0))
     << "\" r=\"3\" fill=\"#000\"/>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace hetbook
