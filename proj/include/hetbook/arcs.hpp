#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetbook/ccn.hpp"
#include "hetbook/common.hpp"

namespace hetbook {

struct RealizationConfig {
  double spacing = 1.0;
  double eps = 0.2;          // local region radius (outer radius is 2*eps)
  double kappa = 0.04;       // tube clip band around the full-sync line
  double tube_radius = 0.05; // transverse tube radius, ambient units
  double lane_base = 0.5;    // first arc height / radial band
  double lane_step = 0.25;
  double bump_inner_fraction = 0.5;
  std::uint64_t seed = 0;

  void check() const {
    if (!(0.0 < kappa && kappa < eps && eps < spacing / 4.0))
      throw input_error("config: require 0 < kappa < eps < spacing/4");
    if (!(tube_radius > 0.0 && tube_radius < lane_step / 2.0))
      throw input_error("config: require 0 < tube_radius < lane_step/2");
    if (!(lane_base > 2.0 * eps + tube_radius))
      throw input_error("config: lane_base must clear the local regions");
    if (!(bump_inner_fraction > 0.0 && bump_inner_fraction < 1.0))
      throw input_error("config: bump_inner_fraction must be in (0,1)");
  }

  // Derived geometry. Transverse moves are fast inside the local-region band
  // (limits drift from the linear terms) and slow in the lane band (limits
  // the kick a crossing tube imparts on a transiting trajectory).
  double clip_fade() const { return 0.5 * kappa; }
  double plane_gate() const { return 0.6 * kappa; }
  double stub_height() const { return 2.0 * kappa; }
  double corner_radius() const { return 0.06 * spacing; }
  double crossing_floor() const { return lane_base - 2.0 * tube_radius; }
  double speed_run() const { return 8.0; }
  double speed_transverse_fast() const { return 16.0; }
  double speed_transverse_slow() const { return 1.5; }
  double lane3_base() const { return lane_base + 2.0 * lane_step; }
  double sample_step() const { return tube_radius / 4.0; }
  double lane_height(int lane) const { return lane_base + lane * lane_step; }
  // Arrivals at a 3D-realized node detour around its funnel: drop far out on
  // the side whose transit signs match the half-plane, approach low in a
  // shared corridor under the funnel's radial clip, release close in.
  double hub_drop() const { return 1.875 * eps; }
  double hub_release() const { return 0.5 * eps; }
  double hub_approach() const { return 1.6 * kappa; }
};

struct ArcSample {
  double t = 0.0;
  std::array<double, 3> point{};  // 2D arcs use the first two components
  std::array<double, 3> deriv{};
};

struct Arc {
  int dim = 2;
  int edge = -1;
  int source = -1;
  int target = -1;
  SubspaceId subspace;
  int half = 0;              // 2D only
  double sector_angle = 0.0; // 3D only
  int fan = 0;               // 3D only: outgoing count of the source hub
  int lane = 0;
  bool duplicate = false;    // mirror copy of a single-outgoing connection
  std::vector<std::array<double, 2>> way;  // 2D: (u,v); 3D: (u,r) at the angle
  std::vector<ArcSample> samples;

  double way_length() const {
    double s = 0.0;
    for (size_t i = 1; i < way.size(); ++i)
      s += std::hypot(way[i][0] - way[i - 1][0], way[i][1] - way[i - 1][1]);
    return s;
  }
};

// ---------------------------------------------------------------------------
// 2D arc construction.
//
// The arc leaves the band |v| = kappa along the local unstable direction
// (slope du/d|v| = eigen_slope), turns vertical, climbs to its lane, runs
// above the spine and descends into the target's band crossing |v| = kappa
// exactly once at each end.

struct Arc2DPlan {
  int edge = -1;
  int source = -1, target = -1;
  SubspaceId subspace;
  int half = +1;
  double rho_s = 0.0, rho_t = 0.0;
  double eigen_slope = 0.0;  // du/d|v| of the unstable direction at the source
  double source_nudge = 0.0;
  double target_nudge = 0.0;
  int lane = 0;
  bool duplicate = false;
  // Hub-arrival detour (0 when the target carries no funnel).
  double approach_v = 0.0;
  double release_nudge = 0.0;
};

inline Arc build_arc2d(const Arc2DPlan& plan, const RealizationConfig& cfg) {
  Arc arc;
  arc.dim = 2;
  arc.edge = plan.edge;
  arc.source = plan.source;
  arc.target = plan.target;
  arc.subspace = plan.subspace;
  arc.half = plan.half;
  arc.lane = plan.lane;
  arc.duplicate = plan.duplicate;
  const double h = plan.half;
  const double L = cfg.lane_height(plan.lane);
  const double vs = cfg.stub_height();
  // The escape stub follows the local unstable ray: u = rho + slope * v with
  // v signed by the half-plane.
  const double u0 = plan.rho_s + h * plan.eigen_slope * cfg.kappa + plan.source_nudge;
  const double u1 = plan.rho_s + h * plan.eigen_slope * vs + plan.source_nudge;
  const double u2 = plan.rho_t + plan.target_nudge;
  if (plan.approach_v <= 0.0) {
    arc.way = {{u0, h * cfg.kappa},
               {u1, h * vs},
               {u1, h * L},
               {u2, h * L},
               {u2, h * cfg.kappa}};
  } else {
    const double u3 = plan.rho_t + plan.release_nudge;
    arc.way = {{u0, h * cfg.kappa},
               {u1, h * vs},
               {u1, h * L},
               {u2, h * L},
               {u2, h * plan.approach_v},
               {u3, h * plan.approach_v},
               {u3, h * cfg.kappa}};
  }
  return arc;
}

// ---------------------------------------------------------------------------
// Overlay planning: lane ordering and per-node vertical nudges chosen so that
// the only crossings left between overlaid pages are ones whose transit
// speeds already agree in sign.

struct OverlaySpec {
  int edge = -1;
  int source = -1, target = -1;
  SubspaceId subspace;
  int half = +1;
  double rho_s = 0.0, rho_t = 0.0;
  double eigen_slope = 0.0;
  bool duplicate = false;
  bool target_is_hub = false;  // widen the arrival nudge away from 3D funnels
};

struct OverlayPlanned {
  Arc2DPlan plan;
};

inline std::vector<Arc2DPlan> plan_overlay(std::vector<OverlaySpec> specs,
                                           const RealizationConfig& cfg) {
  const int n = static_cast<int>(specs.size());
  // Departure verticals are pinned by the escape ray; arrival verticals sit
  // on the side of the target the arc comes from at an adjustable offset.
  std::vector<int> dir(n), side(n);
  std::vector<double> u_dep(n), base_delta(n), delta(n);
  for (int i = 0; i < n; ++i) {
    dir[i] = specs[i].rho_t > specs[i].rho_s ? +1 : -1;
    // Funnel targets are entered from the side whose corridor and drop
    // transit with one sign (upper half: from the right, lower: from the
    // left); ordinary targets from the travel side.
    side[i] = specs[i].target_is_hub ? specs[i].half : -dir[i];
    u_dep[i] = specs[i].rho_s +
               specs[i].half * specs[i].eigen_slope * cfg.stub_height();
    base_delta[i] = specs[i].target_is_hub ? cfg.hub_drop() : 0.6 * cfg.eps;
    delta[i] = base_delta[i];
  }
  auto u_arr = [&](int i) { return specs[i].rho_t + side[i] * delta[i]; };

  // A vertical of one arc may only pierce a run whose transit speed carries
  // the same sign: a climb transits at sign(half), a descent at -sign(half),
  // and a run at sign(dir). Conflicting pairs order the vertical's arc below
  // the run's arc.
  std::vector<std::vector<int>> above(n);
  std::vector<int> indeg(n, 0);
  auto add_edge = [&](int below, int up) {
    for (int u : above[below])
      if (u == up) return;
    above[below].push_back(up);
    ++indeg[up];
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || specs[i].half != specs[j].half) continue;
      const double lo = std::min(u_dep[j], u_arr(j));
      const double hi = std::max(u_dep[j], u_arr(j));
      auto check_vertical = [&](double u, int wsign) {
        if (u > lo + 1e-9 && u < hi - 1e-9 && wsign * dir[j] < 0)
          add_edge(i, j);
      };
      check_vertical(u_dep[i], specs[i].half);
      check_vertical(u_arr(i), -specs[i].half);
    }
  std::vector<int> lane(n, 0);
  for (int half : {+1, -1}) {
    std::vector<int> ready, order;
    std::vector<int> deg = indeg;
    for (int i = 0; i < n; ++i)
      if (specs[i].half == half && deg[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
      std::sort(ready.begin(), ready.end(), [&](int a, int b) {
        const double la = std::abs(specs[a].rho_t - specs[a].rho_s);
        const double lb = std::abs(specs[b].rho_t - specs[b].rho_s);
        if (la != lb) return la < lb;  // shorter spans lower
        return a < b;
      });
      int v = ready.front();
      ready.erase(ready.begin());
      order.push_back(v);
      for (int u : above[v])
        if (--deg[u] == 0) ready.push_back(u);
    }
    for (int i = 0; i < n; ++i)
      if (specs[i].half == half &&
          std::find(order.begin(), order.end(), i) == order.end())
        order.push_back(i);  // constraint cycle: adjust_crossings takes over
    for (size_t r = 0; r < order.size(); ++r)
      lane[order[r]] = static_cast<int>(r);
  }

  // Arrival offsets per (target, side, half): higher lanes descend closer to
  // the node so lower runs end before the higher descents. Hub arrivals get
  // the detour: closer drops pair with higher low-approach altitudes so the
  // final drops never pierce one another's approaches.
  std::vector<double> approach_v(n, 0.0), release(n, 0.0);
  std::map<std::tuple<int, int, int>, std::vector<int>> groups;
  for (int i = 0; i < n; ++i)
    groups[{specs[i].target, side[i], specs[i].half}].push_back(i);
  for (auto& [key, arcs] : groups) {
    const bool hub_group = !arcs.empty() && specs[arcs.front()].target_is_hub;
    // Runs of hub arrivals extend past their drops, so lower lanes must drop
    // closer in; ordinary descents end their runs, so higher lanes sit
    // closer to the node.
    std::sort(arcs.begin(), arcs.end(), [&](int a, int b) {
      if (lane[a] != lane[b])
        return hub_group ? lane[a] < lane[b] : lane[a] > lane[b];
      return a < b;
    });
    for (size_t r = 0; r < arcs.size(); ++r) {
      const int i = arcs[r];
      delta[i] = base_delta[i] + 0.025 * static_cast<double>(r);
      if (hub_group) {
        approach_v[i] = cfg.hub_approach();
        release[i] = cfg.hub_release() + 0.0125 * static_cast<double>(r);
      }
    }
  }

  std::vector<Arc2DPlan> plans(n);
  for (int i = 0; i < n; ++i) {
    Arc2DPlan& p = plans[i];
    p.edge = specs[i].edge;
    p.source = specs[i].source;
    p.target = specs[i].target;
    p.subspace = specs[i].subspace;
    p.half = specs[i].half;
    p.rho_s = specs[i].rho_s;
    p.rho_t = specs[i].rho_t;
    p.eigen_slope = specs[i].eigen_slope;
    p.source_nudge = 0.0;
    p.target_nudge = side[i] * delta[i];
    p.lane = lane[i];
    p.duplicate = specs[i].duplicate;
    p.approach_v = approach_v[i];
    p.release_nudge = side[i] * release[i];
  }
  return plans;
}

// ---------------------------------------------------------------------------
// Crossing adjustment over the page overlay.

struct CrossingRecord {
  int arc_a = -1, arc_b = -1;
  std::array<double, 2> point{};
  double wa = 0.0, wb = 0.0;  // transit speeds d(u+v)/ds at the crossing
};

namespace detail {

struct Hit {
  size_t seg_a, seg_b;
  double fa, fb;  // fractions along the segments
  std::array<double, 2> p;
};

inline std::optional<Hit> segment_hit(const std::array<double, 2>& a0,
                                      const std::array<double, 2>& a1,
                                      const std::array<double, 2>& b0,
                                      const std::array<double, 2>& b1) {
  const double rx = a1[0] - a0[0], ry = a1[1] - a0[1];
  const double sx = b1[0] - b0[0], sy = b1[1] - b0[1];
  const double den = rx * sy - ry * sx;
  if (std::abs(den) < 1e-12) return std::nullopt;
  const double qx = b0[0] - a0[0], qy = b0[1] - a0[1];
  const double t = (qx * sy - qy * sx) / den;
  const double u = (qx * ry - qy * rx) / den;
  const double tol = 1e-9;
  if (t <= tol || t >= 1.0 - tol || u <= tol || u >= 1.0 - tol)
    return std::nullopt;
  return Hit{0, 0, t, u, {a0[0] + t * rx, a0[1] + t * ry}};
}

inline double transit_speed(const std::array<double, 2>& p0,
                            const std::array<double, 2>& p1) {
  const double du = p1[0] - p0[0], dv = p1[1] - p0[1];
  const double len = std::hypot(du, dv);
  return (du + dv) / (len > 0 ? len : 1.0);
}

// Walk to the point at arclength s along the polyline; returns (index, point).
inline std::pair<size_t, std::array<double, 2>> at_arclength(
    const std::vector<std::array<double, 2>>& way, double s) {
  double acc = 0.0;
  for (size_t i = 1; i < way.size(); ++i) {
    const double len =
        std::hypot(way[i][0] - way[i - 1][0], way[i][1] - way[i - 1][1]);
    if (acc + len >= s || i + 1 == way.size()) {
      const double f = len > 0 ? std::clamp((s - acc) / len, 0.0, 1.0) : 0.0;
      return {i - 1,
              {way[i - 1][0] + f * (way[i][0] - way[i - 1][0]),
               way[i - 1][1] + f * (way[i][1] - way[i - 1][1])}};
    }
    acc += len;
  }
  return {way.size() - 2, way.back()};
}

inline double arclength_of(const std::vector<std::array<double, 2>>& way,
                           size_t seg, double frac) {
  double acc = 0.0;
  for (size_t i = 1; i <= seg; ++i)
    acc += std::hypot(way[i][0] - way[i - 1][0], way[i][1] - way[i - 1][1]);
  acc += frac * std::hypot(way[seg + 1][0] - way[seg][0],
                           way[seg + 1][1] - way[seg][1]);
  return acc;
}

// Replace the stretch [s0, s1] of the polyline by the given interior points.
inline void splice(std::vector<std::array<double, 2>>& way, double s0,
                   double s1, const std::vector<std::array<double, 2>>& mid) {
  auto [i0, p0] = at_arclength(way, s0);
  auto [i1, p1] = at_arclength(way, s1);
  std::vector<std::array<double, 2>> out(way.begin(), way.begin() + i0 + 1);
  out.push_back(p0);
  for (const auto& p : mid) out.push_back(p);
  out.push_back(p1);
  out.insert(out.end(), way.begin() + i1 + 1, way.end());
  // Drop degenerate vertices.
  std::vector<std::array<double, 2>> clean;
  for (const auto& p : out)
    if (clean.empty() || std::hypot(p[0] - clean.back()[0],
                                    p[1] - clean.back()[1]) > 1e-9)
      clean.push_back(p);
  way = clean;
}

}  // namespace detail

// Makes the overlaid arcs compatible at every residual crossing: the
// coordinate transit speeds of the two arcs through a shared tube region must
// agree in sign. Crossings that already agree are kept (case a). Otherwise
// the later arc is rewritten locally: if its two velocity components disagree
// in sign the u-profile is reshaped inside the window (case b), else a
// three-segment reroute inverts the u-component near the crossing and then
// the reshaped slope fixes the sign (case c).
inline std::vector<CrossingRecord> adjust_crossings(std::vector<Arc>& arcs) {
  std::vector<CrossingRecord> records;
  const int max_rounds = 12;
  for (int round = 0;; ++round) {
    records.clear();
    struct Bad {
      int i, j;
      detail::Hit hit;
      double wi, wj;
    };
    std::optional<Bad> bad;
    for (size_t i = 0; i < arcs.size() && !bad; ++i)
      for (size_t j = i + 1; j < arcs.size() && !bad; ++j) {
        if (arcs[i].half != arcs[j].half) continue;
        const auto& A = arcs[i].way;
        const auto& B = arcs[j].way;
        for (size_t a = 0; a + 1 < A.size(); ++a)
          for (size_t b = 0; b + 1 < B.size(); ++b) {
            auto hit = detail::segment_hit(A[a], A[a + 1], B[b], B[b + 1]);
            if (!hit) continue;
            hit->seg_a = a;
            hit->seg_b = b;
            const double wi = detail::transit_speed(A[a], A[a + 1]);
            const double wj = detail::transit_speed(B[b], B[b + 1]);
            if (wi * wj > 1e-9) {
              records.push_back({static_cast<int>(i), static_cast<int>(j),
                                 hit->p, wi, wj});
            } else {
              bad = Bad{static_cast<int>(i), static_cast<int>(j), *hit, wi, wj};
              break;
            }
          }
      }
    if (!bad) return records;
    if (round >= max_rounds)
      throw synthesis_error(
          "adjust_crossings: arcs " + std::to_string(bad->i) + " and " +
          std::to_string(bad->j) +
          " still intersect incompatibly after retries (non-generic overlay)");

    // Rewrite the later arc around the crossing.
    Arc& tilde = arcs[bad->j];
    const auto& keep = arcs[bad->i].way;
    const double target_sign = detail::transit_speed(
        keep[bad->hit.seg_a], keep[bad->hit.seg_a + 1]) > 0 ? 1.0 : -1.0;
    const double s_hit =
        detail::arclength_of(tilde.way, bad->hit.seg_b, bad->hit.fb);
    const double total = tilde.way_length();
    const double W = std::min(0.22, 0.25 * total);
    const double s0 = std::max(0.0, s_hit - W);
    const double s1 = std::min(total, s_hit + W);
    auto [i0, P3] = detail::at_arclength(tilde.way, s0);
    auto [i1, P4] = detail::at_arclength(tilde.way, s1);
    (void)i0;
    (void)i1;
    const double du = P4[0] - P3[0], dv = P4[1] - P3[1];
    const auto& seg0 = tilde.way[bad->hit.seg_b];
    const auto& seg1 = tilde.way[bad->hit.seg_b + 1];
    const double lu = seg1[0] - seg0[0], lv = seg1[1] - seg0[1];

    std::vector<std::array<double, 2>> mid;
    if (lu * lv < -1e-12) {
      // Case b: components disagree; reshape the u-profile so the middle
      // stretch dominates in u with the compatible sign. The v-profile and
      // window endpoints are unchanged.
      const double a = target_sign * std::max(1.5 * std::abs(0.5 * dv), 0.12);
      const double outer = 0.5 * (du - a);
      mid.push_back({P3[0] + outer, P3[1] + 0.25 * dv});
      mid.push_back({P3[0] + outer + a, P3[1] + 0.75 * dv});
    } else {
      // Case c: same-sign components (or a vertical stretch); reroute so the
      // u-direction inverts across the crossing. The middle stretch runs
      // from (P4_u - ov, P3_v) to (P3_u + ov, P4_v), so its u-motion is
      // -du + 2*ov; the overshoot is sized to dominate dv with the
      // compatible sign.
      const double ov_signed =
          target_sign * (std::max(1.5 * std::abs(dv), 0.15) + 0.5 * std::abs(du));
      mid.push_back({P4[0] - ov_signed, P3[1]});
      mid.push_back({P3[0] + ov_signed, P4[1]});
    }
    detail::splice(tilde.way, s0, s1, mid);
  }
}

// ---------------------------------------------------------------------------
// Sampling: corner fillets plus the speed profile.

namespace detail {

inline void emit_samples(Arc& arc,
                         const std::vector<std::array<double, 2>>& pts,
                         const std::vector<std::array<double, 2>>& tans,
                         const std::vector<double>& speeds) {
  arc.samples.clear();
  double t = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) {
      const double ds = std::hypot(pts[i][0] - pts[i - 1][0],
                                   pts[i][1] - pts[i - 1][1]);
      t += ds / (0.5 * (speeds[i] + speeds[i - 1]));
    }
    ArcSample s;
    s.t = t;
    s.point = {pts[i][0], pts[i][1], 0.0};
    s.deriv = {tans[i][0] * speeds[i], tans[i][1] * speeds[i], 0.0};
    arc.samples.push_back(s);
  }
}

}  // namespace detail

// Fillets every interior corner (quadratic blend, C^1) and samples the arc at
// steps <= cfg.sample_step(). `transverse_is_lane` marks the chart whose
// second coordinate is a lane height (2D pages and 3D (u,r) charts alike).
inline void sample_arc(Arc& arc, const RealizationConfig& cfg) {
  const auto& way = arc.way;
  if (way.size() < 2) throw synthesis_error("sample_arc: degenerate arc");
  // Build the filleted point list.
  std::vector<std::array<double, 2>> pts;
  std::vector<std::array<double, 2>> tans;
  auto push_line = [&](std::array<double, 2> a, std::array<double, 2> b) {
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    if (len < 1e-12) return;
    const std::array<double, 2> tan{(b[0] - a[0]) / len, (b[1] - a[1]) / len};
    const int steps = std::max(1, static_cast<int>(std::ceil(len / cfg.sample_step())));
    for (int s = 0; s <= steps; ++s) {
      if (!pts.empty() && s == 0) continue;
      if (s == steps) {
        pts.push_back(b);  // endpoints exactly, no interpolation residue
      } else {
        const double f = static_cast<double>(s) / steps;
        pts.push_back({a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])});
      }
      tans.push_back(tan);
    }
    if (pts.empty()) {
      pts.push_back(a);
      tans.push_back(tan);
    }
  };
  std::vector<std::array<double, 2>> cut = way;  // with fillet cut points
  // Compute fillet cut distances per corner.
  std::vector<double> cutlen(way.size(), 0.0);
  for (size_t i = 1; i + 1 < way.size(); ++i) {
    const double l0 = std::hypot(way[i][0] - way[i - 1][0], way[i][1] - way[i - 1][1]);
    const double l1 = std::hypot(way[i + 1][0] - way[i][0], way[i + 1][1] - way[i][1]);
    cutlen[i] = std::min({cfg.corner_radius(), 0.4 * l0, 0.4 * l1});
  }
  pts.clear();
  tans.clear();
  std::array<double, 2> cursor = way.front();
  for (size_t i = 1; i < way.size(); ++i) {
    std::array<double, 2> seg_end = way[i];
    if (i + 1 < way.size() && cutlen[i] > 1e-9) {
      const double len = std::hypot(way[i][0] - cursor[0], way[i][1] - cursor[1]);
      const double f = std::max(0.0, 1.0 - cutlen[i] / std::max(len, 1e-12));
      seg_end = {cursor[0] + f * (way[i][0] - cursor[0]),
                 cursor[1] + f * (way[i][1] - cursor[1])};
    }
    push_line(cursor, seg_end);
    if (i + 1 < way.size() && cutlen[i] > 1e-9) {
      // Quadratic blend from seg_end through way[i] toward the next segment.
      const double len1 = std::hypot(way[i + 1][0] - way[i][0], way[i + 1][1] - way[i][1]);
      const double f1 = cutlen[i] / std::max(len1, 1e-12);
      const std::array<double, 2> exit{
          way[i][0] + f1 * (way[i + 1][0] - way[i][0]),
          way[i][1] + f1 * (way[i + 1][1] - way[i][1])};
      const int steps = std::max(
          2, static_cast<int>(std::ceil(2.0 * cutlen[i] / cfg.sample_step())));
      for (int s = 1; s <= steps; ++s) {
        const double q = static_cast<double>(s) / steps;
        const double a0 = (1 - q) * (1 - q), a1 = 2 * q * (1 - q), a2 = q * q;
        pts.push_back({a0 * seg_end[0] + a1 * way[i][0] + a2 * exit[0],
                       a0 * seg_end[1] + a1 * way[i][1] + a2 * exit[1]});
        // Derivative of the quadratic blend.
        double dx = 2 * (1 - q) * (way[i][0] - seg_end[0]) + 2 * q * (exit[0] - way[i][0]);
        double dy = 2 * (1 - q) * (way[i][1] - seg_end[1]) + 2 * q * (exit[1] - way[i][1]);
        const double dn = std::hypot(dx, dy);
        tans.push_back({dx / dn, dy / dn});
      }
      cursor = exit;
    } else {
      cursor = seg_end;
    }
  }
  // Speed profile: blend by tangent direction; transverse moves are fast in
  // the local band and slow in the lane band, runs are uniformly fast.
  std::vector<double> speeds(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    const double vv = std::abs(pts[i][1]);
    const double v_speed = vv < cfg.crossing_floor()
                               ? cfg.speed_transverse_fast()
                               : cfg.speed_transverse_slow();
    const double c2 = tans[i][0] * tans[i][0];
    speeds[i] = cfg.speed_run() * c2 + v_speed * (1.0 - c2);
  }
  detail::emit_samples(arc, pts, tans, speeds);
}

// ---------------------------------------------------------------------------
// 3D arcs: constant transverse angle, trapezoid radial profile in the (u, r)
// chart, sector angles away from the traces of the three coincidence planes.

// The traces of {x=y}, {y=z}, {x=z} on the transverse plane sit at
// 30 + 60*m degrees in the (E1, E2) chart with E1 = (1,-1,0)/sqrt(2) and
// E2 = (1,1,-2)/sqrt(6).
inline std::vector<double> sector_angles(int k, double min_gap_deg = 5.0) {
  if (k < 3) throw input_error("sector_angles: need k >= 3 outgoing arcs");
  const double pi = std::acos(-1.0);
  auto gap_to_traces = [&](double ang) {
    double best = 1e9;
    for (int m = 0; m < 6; ++m) {
      double tr = pi / 6.0 + m * pi / 3.0;
      double d = std::abs(std::remainder(ang - tr, 2.0 * pi));
      best = std::min(best, d);
    }
    return best;
  };
  double best_rot = 0.0, best_gap = -1.0;
  for (int step = 0; step < 360; ++step) {
    const double rot = step * pi / 180.0 / 3.0;  // scan one third of a turn
    double gap = 1e9;
    for (int j = 0; j < k; ++j)
      gap = std::min(gap, gap_to_traces(rot + 2.0 * pi * j / k));
    if (gap > best_gap) {
      best_gap = gap;
      best_rot = rot;
    }
  }
  if (best_gap < min_gap_deg * pi / 180.0)
    throw synthesis_error(
        "sector_angles: not enough angular room between coincidence planes "
        "for " + std::to_string(k) + " arcs");
  std::vector<double> out(k);
  for (int j = 0; j < k; ++j) out[j] = best_rot + 2.0 * pi * j / k;
  return out;
}

struct Arc3DPlan {
  int edge = -1;
  int source = -1, target = -1;
  SubspaceId subspace;  // the pair subspace of the source hub
  double rho_s = 0.0, rho_t = 0.0;
  double angle = 0.0;
  int lane = 0;  // radial band index within the hub
  int fan_size = 3;
};

inline Arc build_arc3d(const Arc3DPlan& plan, const RealizationConfig& cfg) {
  Arc arc;
  arc.dim = 3;
  arc.edge = plan.edge;
  arc.source = plan.source;
  arc.target = plan.target;
  arc.subspace = plan.subspace;
  arc.sector_angle = plan.angle;
  arc.fan = plan.fan_size;
  arc.lane = plan.lane;
  const double pi = std::acos(-1.0);
  const double r_face = cfg.eps * std::cos(pi / plan.fan_size);
  const double r_start = 0.8 * r_face;
  const double r_end = 0.8 * cfg.eps;
  const double R = cfg.lane3_base() + plan.lane * cfg.lane_step;
  const int dir = plan.rho_t > plan.rho_s ? +1 : -1;
  const double u_t = plan.rho_t - dir * 0.75 * cfg.eps;
  arc.way = {{plan.rho_s, r_start},
             {plan.rho_s, R},
             {u_t, R},
             {u_t, r_end}};
  return arc;
}

// Transverse frame of a pair subspace in its (x,y,z) chart.
inline std::array<double, 3> transverse_dir(double angle) {
  static const double s2 = std::sqrt(2.0), s6 = std::sqrt(6.0);
  const std::array<double, 3> e1{1.0 / s2, -1.0 / s2, 0.0};
  const std::array<double, 3> e2{1.0 / s6, 1.0 / s6, -2.0 / s6};
  return {std::cos(angle) * e1[0] + std::sin(angle) * e2[0],
          std::cos(angle) * e1[1] + std::sin(angle) * e2[1],
          std::cos(angle) * e1[2] + std::sin(angle) * e2[2]};
}

// Sample a 3D arc: run the 2D sampler on the (u,r) chart, then map samples
// into the (x,y,z) chart of the pair subspace at the fixed transverse angle.
inline void sample_arc3d(Arc& arc, const RealizationConfig& cfg) {
  Arc chart = arc;  // (u, r) polyline
  sample_arc(chart, cfg);
  const auto w = transverse_dir(arc.sector_angle);
  arc.samples.clear();
  for (const auto& s : chart.samples) {
    const double u = s.point[0], r = s.point[1];
    const double du = s.deriv[0], dr = s.deriv[1];
    ArcSample out;
    out.t = s.t;
    out.point = {u + r * w[0], u + r * w[1], u + r * w[2]};
    out.deriv = {du + dr * w[0], du + dr * w[1], du + dr * w[2]};
    arc.samples.push_back(out);
  }
}

}  // namespace hetbook
