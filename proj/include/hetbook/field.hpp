#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hetbook/arcs.hpp"
#include "hetbook/book.hpp"
#include "hetbook/ccn.hpp"
#include "hetbook/common.hpp"
#include "hetbook/eigs.hpp"
#include "hetbook/graph.hpp"

namespace hetbook {

// ---------------------------------------------------------------------------
// Partial-derivative targets at the equilibria.

struct AlphaTable {
  std::vector<Vec> rows;  // rows[node][l], l = 0..types
};

// Book realization: a_0 = -1; a_j = -2k on pages carrying one of the node's
// outgoing edges, +1 elsewhere. The sum stays negative and the page direction
// is unstable exactly on the outgoing pages.
inline AlphaTable choose_alphas_bookembed(const HetNet& net,
                                          const BookEmbedding& emb) {
  const int k = emb.pages;
  AlphaTable table;
  table.rows.assign(net.num_nodes(), Vec(k + 1, 1.0));
  for (int v = 0; v < net.num_nodes(); ++v) {
    table.rows[v][0] = -1.0;
    bool has_out = false;
    for (int e = 0; e < net.num_edges(); ++e)
      if (net.edges[e].first == v) {
        table.rows[v][emb.placements[e].page] = -2.0 * k;
        has_out = true;
      }
    if (!has_out)
      throw synthesis_error("node without outgoing edge cannot be realized");
    double sum = 0.0;
    for (double a : table.rows[v]) sum += a;
    if (sum >= 0.0) throw synthesis_error("alpha row must sum negative");
  }
  return table;
}

// Pair/page realization: a_0 = -1; the node's own slot(s) get -2, everything
// else 0. Every sign condition is re-derived from the closed forms before the
// table is returned.
inline AlphaTable choose_alphas_q(const CCN& ccn, const DegreeProfile& profile,
                                  const std::vector<SubspaceId>& assignment) {
  if (assignment.size() != profile.out_degree.size())
    throw input_error("choose_alphas_q: one subspace per node required");
  for (size_t i = 0; i < assignment.size(); ++i) {
    const bool needs_pair = profile.out_degree[i] >= 3;
    if (needs_pair != (assignment[i].kind == SubspaceId::Kind::ThreeD))
      throw input_error(
          "choose_alphas_q: nodes with three or more outgoing connections "
          "need a pair subspace, others a page");
    for (size_t j = i + 1; j < assignment.size(); ++j)
      if (assignment[i] == assignment[j])
        throw input_error("choose_alphas_q: assignments must be distinct");
  }
  AlphaTable table;
  table.rows.assign(assignment.size(), Vec(ccn.types + 1, 0.0));
  for (size_t v = 0; v < assignment.size(); ++v) {
    Vec& row = table.rows[v];
    row[0] = -1.0;
    const SubspaceId& sub = assignment[v];
    if (sub.kind == SubspaceId::Kind::TwoD) {
      row[sub.j1] = -2.0;
    } else if (sub.kind == SubspaceId::Kind::ThreeD) {
      row[sub.j1] = -2.0;
      row[sub.j2] = -2.0;
    } else {
      throw input_error("choose_alphas_q: node assignment must be 2D or 3D");
    }
    double sum = 0.0;
    for (double a : row) sum += a;
    if (sum >= 0.0) throw synthesis_error("alpha row must sum negative");
    // The node must be a source exactly in its own subspace, a sink in all
    // other minimal subspaces.
    for (const auto& other : minimal_synchrony(ccn)) {
      const bool own = other == sub;
      if (other.kind == SubspaceId::Kind::TwoD) {
        const double lat = row[0] - row[other.j1];
        if (own ? lat <= 0.0 : lat >= 0.0)
          throw synthesis_error("2D eigenvalue sign check failed");
      } else {
        double b = 0.0;
        for (int l = 1; l <= ccn.types; ++l)
          if (l != other.j1 && l != other.j2) b += row[l];
        Eig3DPair eig = eig_3d_pair(row[0], b, row[other.j1], row[other.j2]);
        const double re1 = eig.lateral1.real(), re2 = eig.lateral2.real();
        if (own ? (re1 <= 0.0 || re2 <= 0.0) : (re1 >= 0.0 || re2 >= 0.0))
          throw synthesis_error("pair eigenvalue sign check failed");
      }
    }
  }
  return table;
}

// Slope du/d|v| of the unstable direction of the page-restricted
// linearization at a node; arcs launch along this ray.
inline double unstable_slope(const Vec& alphas, int page) {
  double sum = 0.0;
  for (double a : alphas) sum += a;
  const double lu = alphas[0] - alphas[page];
  return alphas[page] / (lu - sum);
}

// ---------------------------------------------------------------------------
// Flow tubes. A tube lives in the linear span of one argument pattern (its
// lift plane): weight = (off-plane gate) x (in-plane profile around the
// center polyline) x (clip near the full-sync line / inside the local radial
// shell). The imposed value is the stored coordinate speed at the nearest
// center parameter.

struct Tube {
  int arc_index = -1;
  bool is3d = false;
  std::string name;
  std::vector<Vec> plane;                   // orthonormal rows
  std::vector<std::array<double, 2>> line;  // centers: (u,v) page / (u,r) chart
  std::vector<double> flow;
  std::vector<double> tpar;
  std::vector<Vec> check_points;            // strided ambient centers
  std::vector<double> check_flows;
  double gate_in = 0.0, gate_out = 0.0;
  int mcells = 0;

  // 2D page tubes.
  double radius_in = 0.0, radius_out = 0.0;
  double kamb = 0.0;
  double vscale = 1.0;

  // 3D slab tubes.
  std::array<double, 3> rad{}, tau{};
  std::array<std::array<double, 3>, 3> chart_from_c{};
  double wu_in = 0, wu_out = 0, wr_in = 0, wr_out = 0, we_in = 0, we_out = 0;
  double r_on = 0.0;

  double b0lo = 0, b0hi = 0, b1lo = 0, b1hi = 0;

  void finish_bbox(double margin0, double margin1) {
    b0lo = b1lo = 1e300;
    b0hi = b1hi = -1e300;
    for (const auto& p : line) {
      b0lo = std::min(b0lo, p[0]);
      b0hi = std::max(b0hi, p[0]);
      b1lo = std::min(b1lo, p[1]);
      b1hi = std::max(b1hi, p[1]);
    }
    b0lo -= margin0;
    b0hi += margin0;
    b1lo -= margin1;
    b1hi += margin1;
  }

  // Nearest point on the center polyline; ties resolve to the smaller
  // parameter. Coarse scan, then exact projection on nearby segments.
  void project(double a0, double a1, double* dist, int* seg,
               double* frac) const {
    const int n = static_cast<int>(line.size());
    int best = 0;
    double bestd = 1e300;
    const int stride = std::max(1, n / 24);
    for (int i = 0; i < n; i += stride) {
      const double d = std::hypot(a0 - line[i][0], a1 - line[i][1]);
      if (d < bestd - 1e-15) {
        bestd = d;
        best = i;
      }
    }
    const int lo = std::max(0, best - 2 * stride);
    const int hi = std::min(n - 2, best + 2 * stride);
    *dist = 1e300;
    *seg = lo;
    *frac = 0.0;
    for (int i = lo; i <= hi; ++i) {
      const double ex = line[i + 1][0] - line[i][0];
      const double ey = line[i + 1][1] - line[i][1];
      const double len2 = ex * ex + ey * ey;
      double f =
          len2 > 0 ? ((a0 - line[i][0]) * ex + (a1 - line[i][1]) * ey) / len2
                   : 0.0;
      f = std::clamp(f, 0.0, 1.0);
      const double px = line[i][0] + f * ex, py = line[i][1] + f * ey;
      const double d = std::hypot(a0 - px, a1 - py);
      if (d < *dist - 1e-15) {
        *dist = d;
        *seg = i;
        *frac = f;
      }
    }
  }

  double flow_at(int seg, double frac) const {
    return flow[seg] + frac * (flow[seg + 1] - flow[seg]);
  }

  // Weight and imposed flow at an argument point; returns the weight and
  // stores the flow value. ynorm2 and d0 are shared per-evaluation scalars.
  double weight_flow(std::span<const double> y, double ynorm2, double d0,
                     double* flow_out) const {
    *flow_out = 0.0;
    double c[3] = {0, 0, 0};
    double csum2 = 0.0;
    for (size_t r = 0; r < plane.size(); ++r) {
      double d = 0.0;
      const Vec& row = plane[r];
      for (size_t i = 0; i < row.size(); ++i) d += row[i] * y[i];
      c[r] = d;
      csum2 += d * d;
    }
    const double res = std::sqrt(std::max(0.0, ynorm2 - csum2));
    if (res >= gate_out) return 0.0;
    const double gate = bump(res, gate_in, gate_out);

    if (!is3d) {
      const double v = c[1] / vscale;
      const double u = (c[0] * std::sqrt(static_cast<double>(mcells)) - v) /
                       mcells;
      if (u < b0lo || u > b0hi || v < b1lo || v > b1hi) return 0.0;
      if (d0 <= kamb) return 0.0;
      const double clip = smoothstep5((d0 - kamb) / (0.5 * kamb));
      double dist, frac;
      int seg;
      project(u, v, &dist, &seg, &frac);
      if (dist >= radius_out) return 0.0;
      *flow_out = flow_at(seg, frac);
      return gate * clip * bump(dist, radius_in, radius_out);
    }

    double q[3];
    for (int i = 0; i < 3; ++i)
      q[i] = chart_from_c[i][0] * c[0] + chart_from_c[i][1] * c[1] +
             chart_from_c[i][2] * c[2];
    const double u = (q[0] + q[1] + q[2]) / 3.0;
    const double ox = q[0] - u, oy = q[1] - u, oz = q[2] - u;
    const double ee = ox * tau[0] + oy * tau[1] + oz * tau[2];
    if (std::abs(ee) >= we_out) return 0.0;
    const double rr = ox * rad[0] + oy * rad[1] + oz * rad[2];
    if (u < b0lo || u > b0hi || rr < b1lo || rr > b1hi) return 0.0;
    const double rmag = std::sqrt(ox * ox + oy * oy + oz * oz);
    if (rmag <= r_on) return 0.0;
    const double clip = smoothstep5((rmag - r_on) / (0.3 * r_on));
    double dist, frac;
    int seg;
    project(u, rr, &dist, &seg, &frac);
    const double pu =
        u - (line[seg][0] + frac * (line[seg + 1][0] - line[seg][0]));
    const double pr =
        rr - (line[seg][1] + frac * (line[seg + 1][1] - line[seg][1]));
    if (std::abs(pu) >= wu_out || std::abs(pr) >= wr_out) return 0.0;
    *flow_out = flow_at(seg, frac);
    return gate * clip * bump(std::abs(pu), wu_in, wu_out) *
           bump(std::abs(pr), wr_in, wr_out) * bump(std::abs(ee), we_in, we_out);
  }

  double weight(std::span<const double> y) const {
    double yn = 0.0;
    for (double v : y) yn += v * v;
    double fl;
    return weight_flow(y, yn, dist_to_diagonal(y), &fl);
  }
};

namespace detail {

inline std::vector<Vec> orthonormal_rows(std::vector<Vec> raw) {
  std::vector<Vec> rows;
  for (auto& v : raw) {
    Vec w = v;
    for (const auto& b : rows) {
      double d = 0.0;
      for (size_t i = 0; i < w.size(); ++i) d += w[i] * b[i];
      for (size_t i = 0; i < w.size(); ++i) w[i] -= d * b[i];
    }
    const double n = norm2(w);
    if (n < 1e-9)
      throw synthesis_error(
          "degenerate tube plane (pair subspaces need at least one cell "
          "outside the pair and cell 0)");
    for (auto& x : w) x /= n;
    rows.push_back(std::move(w));
  }
  return rows;
}

inline Vec unit_axis(int m, int slot) {
  Vec e(m, 0.0);
  e[slot] = 1.0;
  return e;
}

}  // namespace detail

// Builds the flow tubes of one arc. 2D arcs produce (A, B): A around the page
// lift (slot j carries u+v), B around the permuted lift (slot 0 carries u+v);
// flows are the u and u+v speeds. 3D arcs produce (A, B, C) around the three
// argument-pattern lifts of the pair subspace with the three coordinate
// speeds; their entry face width is set from the fan size.
inline std::vector<Tube> lift_and_tube(const Arc& arc, int arc_index,
                                       const CCN& ccn,
                                       const RealizationConfig& cfg) {
  const int m = ccn.cells;
  std::vector<Tube> out;
  const int check_stride = 6;

  if (arc.dim == 2) {
    const int j = arc.subspace.j1;
    if (j < 1 || j >= m) throw synthesis_error("bad page subspace index");
    for (int which : {0, 1}) {
      Tube t;
      t.arc_index = arc_index;
      t.mcells = m;
      t.is3d = false;
      t.plane = detail::orthonormal_rows(
          {Vec(m, 1.0), detail::unit_axis(m, which == 0 ? j : 0)});
      t.gate_out = cfg.plane_gate();
      t.gate_in = 0.5 * t.gate_out;
      t.vscale = std::sqrt(1.0 - 1.0 / m);
      t.kamb = cfg.kappa * t.vscale;
      t.radius_out = cfg.tube_radius;
      t.radius_in = cfg.bump_inner_fraction * cfg.tube_radius;
      for (size_t s = 0; s < arc.samples.size(); ++s) {
        const auto& smp = arc.samples[s];
        t.line.push_back({smp.point[0], smp.point[1]});
        t.flow.push_back(which == 0 ? smp.deriv[0]
                                    : smp.deriv[0] + smp.deriv[1]);
        t.tpar.push_back(smp.t);
        if (s % check_stride == 0) {
          Vec y(m, smp.point[0]);
          y[which == 0 ? j : 0] = smp.point[0] + smp.point[1];
          t.check_points.push_back(std::move(y));
          t.check_flows.push_back(t.flow.back());
        }
      }
      t.finish_bbox(cfg.tube_radius, cfg.tube_radius);
      std::ostringstream nm;
      nm << (which == 0 ? "A" : "B") << "[e" << arc.edge << " "
         << arc.subspace.str() << (arc.half > 0 ? "+" : "-")
         << (arc.duplicate ? " dup" : "") << "]";
      t.name = nm.str();
      out.push_back(std::move(t));
    }
    return out;
  }

  const int a = arc.subspace.j1, b = arc.subspace.j2;
  const double pi = std::acos(-1.0);
  const std::array<double, 3> radv = transverse_dir(arc.sector_angle);
  const std::array<double, 3> tauv =
      transverse_dir(arc.sector_angle + pi / 2.0);
  for (int which : {0, 1, 2}) {
    // Argument pattern of the cells outside the pair (A), of cell a (B) and
    // of cell b (C) along a pair-subspace state (x, y, z).
    auto lift = [&](double x, double y, double z) {
      Vec v(m, x);
      if (which == 0) {
        v[a] = y;
        v[b] = z;
      } else if (which == 1) {
        v[0] = y;
        v[a] = z;
        v[b] = z;
      } else {
        v[0] = z;
        v[b] = y;
      }
      return v;
    };
    Tube t;
    t.arc_index = arc_index;
    t.mcells = m;
    t.is3d = true;
    t.plane = detail::orthonormal_rows(
        {lift(1, 0, 0), lift(0, 1, 0), lift(0, 0, 1)});
    t.gate_out = cfg.plane_gate();
    t.gate_in = 0.5 * t.gate_out;
    t.rad = radv;
    t.tau = tauv;
    std::array<std::array<double, 3>, 3> M{};
    const std::array<Vec, 3> units = {lift(1, 0, 0), lift(0, 1, 0),
                                      lift(0, 0, 1)};
    for (int col = 0; col < 3; ++col)
      for (int row = 0; row < 3; ++row) {
        double d = 0.0;
        for (int i = 0; i < m; ++i) d += t.plane[row][i] * units[col][i];
        M[row][col] = d;
      }
    const double det = M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                       M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                       M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
    if (std::abs(det) < 1e-9)
      throw synthesis_error("singular pair chart (network too small)");
    auto cof = [&](int r, int c) {
      // Cyclic index choice yields the signed cofactor directly.
      const int r1 = (r + 1) % 3, r2 = (r + 2) % 3;
      const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
      return M[r1][c1] * M[r2][c2] - M[r1][c2] * M[r2][c1];
    };
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t.chart_from_c[r][c] = cof(c, r) / det;

    for (size_t s = 0; s < arc.samples.size(); ++s) {
      const auto& smp = arc.samples[s];
      const double u = (smp.point[0] + smp.point[1] + smp.point[2]) / 3.0;
      const double ox = smp.point[0] - u, oy = smp.point[1] - u,
                   oz = smp.point[2] - u;
      const double rr = ox * radv[0] + oy * radv[1] + oz * radv[2];
      t.line.push_back({u, rr});
      t.flow.push_back(smp.deriv[which]);
      t.tpar.push_back(smp.t);
      if (s % check_stride == 0) {
        t.check_points.push_back(lift(smp.point[0], smp.point[1],
                                      smp.point[2]));
        t.check_flows.push_back(t.flow.back());
      }
    }
    t.wu_in = 0.06;
    t.wu_out = 0.10;
    t.wr_in = 0.06;
    t.wr_out = 0.10;
    const double fh = cfg.eps * std::sin(pi / std::max(3, arc.fan));
    t.we_out = 0.95 * fh;
    t.we_in = 0.75 * fh;
    t.r_on = cfg.eps;
    t.finish_bbox(t.wu_out, t.wr_out);
    std::ostringstream nm;
    nm << (which == 0 ? "A" : which == 1 ? "B" : "C") << "[e" << arc.edge
       << " " << arc.subspace.str() << "]";
    t.name = nm.str();
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// The assembled scalar function.

struct LocalRegion {
  int node = -1;
  double rho = 0.0;
  Vec alphas;
  bool cylinder = false;  // balls on the book path, cylinders on the pair path
};

class SynthesizedField final : public ScalarField {
 public:
  SynthesizedField() = default;
  SynthesizedField(int cells, RealizationConfig cfg)
      : m_(cells), cfg_(cfg) {}

  int arity() const override { return m_; }
  const RealizationConfig& config() const { return cfg_; }
  std::vector<LocalRegion>& locals() { return locals_; }
  const std::vector<LocalRegion>& locals() const { return locals_; }
  std::vector<Tube>& tubes() { return tubes_; }
  const std::vector<Tube>& tubes() const { return tubes_; }

  double operator()(std::span<const double> y) const override {
    const double mu = mean(y);
    double yn2 = 0.0;
    for (double v : y) yn2 += v * v;
    const double d0 =
        std::sqrt(std::max(0.0, yn2 - m_ * mu * mu));
    double val = 0.0;
    const double sqm = std::sqrt(static_cast<double>(m_));
    for (const auto& loc : locals_) {
      const double axial = sqm * std::abs(mu - loc.rho);
      double w;
      if (loc.cylinder) {
        if (axial >= 2.0 * cfg_.eps || d0 >= 2.0 * cfg_.eps) continue;
        w = bump(d0, cfg_.eps, 2.0 * cfg_.eps) *
            bump(axial, cfg_.eps, 2.0 * cfg_.eps);
      } else {
        const double dist2 = d0 * d0 + axial * axial;
        if (dist2 >= 4.0 * cfg_.eps * cfg_.eps) continue;
        w = bump(std::sqrt(dist2), cfg_.eps, 2.0 * cfg_.eps);
      }
      double lin = 0.0;
      for (int l = 0; l < m_; ++l) lin += loc.alphas[l] * (y[l] - loc.rho);
      val += w * lin;
    }
    double fl;
    for (const auto& t : tubes_) val += t.weight_flow(y, yn2, d0, &fl) * fl;
    return val;
  }

 private:
  int m_ = 0;
  RealizationConfig cfg_;
  std::vector<LocalRegion> locals_;
  std::vector<Tube> tubes_;
};

// Assembles the field and enforces the support rules: local regions pairwise
// disjoint; a tube's center may carry weight of another arc's tube only when
// both lie in the same lift plane and their flows agree in sign there (the
// crossing handoffs); any cross-plane overlap is an error.
inline SynthesizedField assemble(const CCN& ccn, const AlphaTable& alphas,
                                 const Vec& rho, std::vector<Tube> tubes,
                                 const RealizationConfig& cfg,
                                 bool cylinders) {
  cfg.check();
  if (alphas.rows.size() != rho.size())
    throw input_error("assemble: one alpha row and one position per node");
  SynthesizedField field(ccn.cells, cfg);
  const double sqm = std::sqrt(static_cast<double>(ccn.cells));
  for (size_t i = 0; i < rho.size(); ++i)
    for (size_t j = i + 1; j < rho.size(); ++j)
      if (sqm * std::abs(rho[i] - rho[j]) <= 4.0 * cfg.eps)
        throw synthesis_error("local regions overlap: nodes " +
                              std::to_string(i) + ", " + std::to_string(j));
  for (size_t v = 0; v < rho.size(); ++v)
    field.locals().push_back(
        {static_cast<int>(v), rho[v], alphas.rows[v], cylinders});

  for (size_t i = 0; i < tubes.size(); ++i)
    for (size_t j = 0; j < tubes.size(); ++j) {
      if (i == j || tubes[i].arc_index == tubes[j].arc_index) continue;
      const bool same_plane = tubes[i].plane == tubes[j].plane;
      for (size_t s = 0; s < tubes[i].check_points.size(); ++s) {
        const Vec& y = tubes[i].check_points[s];
        double yn2 = 0.0;
        for (double v : y) yn2 += v * v;
        double fj;
        const double w =
            tubes[j].weight_flow(y, yn2, dist_to_diagonal(y), &fj);
        if (w < 1e-6) continue;
        if (!same_plane)
          throw synthesis_error("tube overlap across planes: " +
                                tubes[i].name + " inside " + tubes[j].name);
        if (tubes[i].check_flows[s] * fj < 0.0)
          throw synthesis_error("conflicting flows where tubes overlap: " +
                                tubes[i].name + " vs " + tubes[j].name +
                                " (increase lane separation)");
      }
    }
  field.tubes() = std::move(tubes);
  return field;
}

}  // namespace hetbook
