#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetbook/arcs.hpp"
#include "hetbook/book.hpp"
#include "hetbook/ccn.hpp"
#include "hetbook/common.hpp"
#include "hetbook/dynamics.hpp"
#include "hetbook/field.hpp"
#include "hetbook/graph.hpp"

namespace hetbook {

enum class RealMode { Book, AlmostComplete };

struct Realization {
  HetNet net;
  CCN ccn;
  RealizationConfig cfg;
  RealMode mode = RealMode::Book;
  BookEmbedding emb;                        // book mode
  std::vector<SubspaceId> assignment;        // pair mode: own subspace per node
  std::vector<std::vector<SubspaceId>> unstable;  // per node
  AlphaTable alphas;
  Vec rho;  // per node
  std::vector<Arc> arcs;
  std::vector<CrossingRecord> crossings;
  SynthesizedField field;
};

struct RealizationReport {
  std::vector<EquilibriumReport> equilibria;
  std::vector<ConnectionReport> connections;
  std::vector<RayProbe> probes;
  std::vector<BasinReport> basins;
  std::vector<RobustnessTrial> robustness;
  std::string grade;  // complete | almost_complete | partial

  bool all_connections_passed() const {
    for (const auto& c : connections)
      if (!c.passed) return false;
    return !connections.empty();
  }
};

// ---------------------------------------------------------------------------
// Book-embedding realization.

inline Realization realize_book(const HetNet& net, const BookEmbedding& emb,
                                const RealizationConfig& cfg) {
  cfg.check();
  auto violations = validate_embedding(net, emb);
  if (!violations.empty())
    throw input_error("embedding invalid: " + violations.front().rule + " (" +
                      violations.front().detail + ")");
  Realization R;
  R.net = net;
  R.cfg = cfg;
  R.mode = RealMode::Book;
  R.emb = emb;
  R.emb.spine.spacing = cfg.spacing;
  const int k = emb.pages;
  R.ccn = build_pn(k);
  R.rho.resize(net.num_nodes());
  for (int v = 0; v < net.num_nodes(); ++v) R.rho[v] = R.emb.spine.rho(v);
  R.alphas = choose_alphas_bookembed(net, emb);

  DegreeProfile prof = degree_profile(net);
  std::vector<OverlaySpec> specs;
  auto push_spec = [&](int e, int half, bool dup) {
    OverlaySpec s;
    s.edge = e;
    s.source = net.edges[e].first;
    s.target = net.edges[e].second;
    s.subspace = SubspaceId::two_d(emb.placements[e].page);
    s.half = half;
    s.rho_s = R.rho[s.source];
    s.rho_t = R.rho[s.target];
    s.eigen_slope =
        unstable_slope(R.alphas.rows[s.source], emb.placements[e].page);
    s.duplicate = dup;
    s.target_is_hub = false;
    specs.push_back(s);
  };
  for (int e = 0; e < net.num_edges(); ++e)
    push_spec(e, emb.placements[e].half, false);
  // A single outgoing connection occupies both half-planes of its page so the
  // whole 1D unstable set lands in the network.
  for (int e = 0; e < net.num_edges(); ++e)
    if (prof.out_degree[net.edges[e].first] == 1)
      push_spec(e, -emb.placements[e].half, true);

  auto plans = plan_overlay(specs, cfg);
  for (const auto& p : plans) R.arcs.push_back(build_arc2d(p, cfg));
  R.crossings = adjust_crossings(R.arcs);
  for (auto& a : R.arcs) sample_arc(a, cfg);

  std::vector<Tube> tubes;
  for (size_t i = 0; i < R.arcs.size(); ++i) {
    auto ts = lift_and_tube(R.arcs[i], static_cast<int>(i), R.ccn, cfg);
    for (auto& t : ts) tubes.push_back(std::move(t));
  }
  R.field = assemble(R.ccn, R.alphas, R.rho, std::move(tubes), cfg, false);

  R.unstable.assign(net.num_nodes(), {});
  for (int v = 0; v < net.num_nodes(); ++v) {
    std::vector<int> pages;
    for (int e = 0; e < net.num_edges(); ++e)
      if (net.edges[e].first == v) pages.push_back(emb.placements[e].page);
    std::sort(pages.begin(), pages.end());
    pages.erase(std::unique(pages.begin(), pages.end()), pages.end());
    for (int p : pages) R.unstable[v].push_back(SubspaceId::two_d(p));
  }
  return R;
}

// ---------------------------------------------------------------------------
// Almost-complete realization on the pair family.

inline Realization realize_almost_complete(const HetNet& net,
                                           const RealizationConfig& cfg) {
  cfg.check();
  Realization R;
  R.net = net;
  R.cfg = cfg;
  R.mode = RealMode::AlmostComplete;
  DegreeProfile prof = degree_profile(net);
  for (int v = 0; v < net.num_nodes(); ++v)
    if (prof.out_degree[v] == 0)
      throw input_error("node without outgoing edge cannot be realized");
  R.ccn = build_q(prof.n1, prof.n2);

  // Low-degree nodes first; each gets its own page, each hub its own pair.
  std::vector<int> low, hubs;
  for (int v = 0; v < net.num_nodes(); ++v)
    (prof.out_degree[v] <= 2 ? low : hubs).push_back(v);
  R.assignment.assign(net.num_nodes(), SubspaceId::full());
  for (size_t i = 0; i < low.size(); ++i)
    R.assignment[low[i]] = SubspaceId::two_d(static_cast<int>(i) + 1);
  for (size_t p = 0; p < hubs.size(); ++p)
    R.assignment[hubs[p]] = SubspaceId::three_d(
        prof.n1 + 2 * static_cast<int>(p) + 1, prof.n1 + 2 * static_cast<int>(p) + 2);
  R.rho.resize(net.num_nodes());
  for (int v = 0; v < net.num_nodes(); ++v) R.rho[v] = v * cfg.spacing;
  R.alphas = choose_alphas_q(R.ccn, prof, R.assignment);
  R.unstable.assign(net.num_nodes(), {});
  for (int v = 0; v < net.num_nodes(); ++v)
    R.unstable[v].push_back(R.assignment[v]);

  // 2D arcs of the low-degree nodes, overlaid across their pages.
  std::vector<OverlaySpec> specs;
  for (int v : low) {
    std::vector<int> outs = net.out_edges(v);
    const int page = R.assignment[v].j1;
    for (size_t i = 0; i < outs.size(); ++i) {
      OverlaySpec s;
      s.edge = outs[i];
      s.source = v;
      s.target = net.edges[outs[i]].second;
      s.subspace = R.assignment[v];
      s.half = i == 0 ? +1 : -1;
      s.rho_s = R.rho[v];
      s.rho_t = R.rho[s.target];
      s.eigen_slope = unstable_slope(R.alphas.rows[v], page);
      s.duplicate = false;
      s.target_is_hub = prof.out_degree[s.target] >= 3;
      specs.push_back(s);
      if (outs.size() == 1) {
        OverlaySpec d = s;
        d.half = -1;
        d.duplicate = true;
        specs.push_back(d);
      }
    }
  }
  auto plans = plan_overlay(specs, cfg);
  for (const auto& p : plans) R.arcs.push_back(build_arc2d(p, cfg));
  R.crossings = adjust_crossings(R.arcs);
  for (auto& a : R.arcs) sample_arc(a, cfg);

  // 3D arcs of the hubs: one sector angle per outgoing connection, radial
  // bands stacked per hub.
  for (int v : hubs) {
    std::vector<int> outs = net.out_edges(v);
    const int kfan = static_cast<int>(outs.size());
    auto angles = sector_angles(kfan);
    for (int j = 0; j < kfan; ++j) {
      Arc3DPlan plan;
      plan.edge = outs[j];
      plan.source = v;
      plan.target = net.edges[outs[j]].second;
      plan.subspace = R.assignment[v];
      plan.rho_s = R.rho[v];
      plan.rho_t = R.rho[plan.target];
      plan.angle = angles[j];
      plan.lane = j;
      plan.fan_size = kfan;
      Arc arc = build_arc3d(plan, cfg);
      sample_arc3d(arc, cfg);
      // The arc must pierce its own prism face exactly once near the source.
      int crossings = 0;
      const double pi = std::acos(-1.0);
      const double r_face = cfg.eps * std::cos(pi / kfan);
      for (size_t i = 1; i < arc.way.size(); ++i) {
        if (std::abs(arc.way[i][0] - R.rho[v]) > 2.0 * cfg.eps &&
            std::abs(arc.way[i - 1][0] - R.rho[v]) > 2.0 * cfg.eps)
          continue;
        if ((arc.way[i - 1][1] - r_face) * (arc.way[i][1] - r_face) < 0.0)
          ++crossings;
      }
      if (crossings != 1)
        throw synthesis_error("3D arc must cross its prism face exactly once");
      R.arcs.push_back(std::move(arc));
    }
  }

  std::vector<Tube> tubes;
  for (size_t i = 0; i < R.arcs.size(); ++i) {
    auto ts = lift_and_tube(R.arcs[i], static_cast<int>(i), R.ccn, cfg);
    for (auto& t : ts) tubes.push_back(std::move(t));
  }
  R.field = assemble(R.ccn, R.alphas, R.rho, std::move(tubes), cfg, true);
  return R;
}

// ---------------------------------------------------------------------------
// Verification.

namespace detail {

inline Vec sync_point(int m, double rho) { return Vec(m, rho); }

inline Vec pair_offset(int m, const SubspaceId& sub,
                       const std::array<double, 3>& xyz) {
  Vec v(m, xyz[0]);
  v[sub.j1] = xyz[1];
  v[sub.j2] = xyz[2];
  return v;
}

// Newton refinement of an equilibrium of the admissible system.
inline Vec refine_equilibrium(const CCN& ccn, const ScalarField& f, Vec x) {
  AdmissibleSystem sys(ccn, f);
  const int m = ccn.cells;
  Vec fx(m);
  for (int it = 0; it < 8; ++it) {
    sys.rhs(x, fx);
    if (norm2(fx) < 1e-13) break;
    auto J = jacobian(ccn, f, x);
    Eigen::MatrixXd M(m, m);
    Eigen::VectorXd b(m);
    for (int r = 0; r < m; ++r) {
      b(r) = -fx[r];
      for (int c = 0; c < m; ++c) M(r, c) = J[r][c];
    }
    Eigen::VectorXd dx = M.partialPivLu().solve(b);
    for (int i = 0; i < m; ++i) x[i] += dx(i);
  }
  return x;
}

inline std::vector<std::complex<double>> closed_form_spectrum(
    const Realization& R, int node) {
  const Vec& row = R.alphas.rows[node];
  std::vector<std::complex<double>> out;
  if (R.mode == RealMode::Book) {
    for (double ev : eig_full_sync_pn(row, R.ccn.types)) out.push_back(ev);
    return out;
  }
  double sum = 0.0;
  for (double a : row) sum += a;
  out.push_back(sum);
  const int n1 = R.ccn.family_n1;
  for (int j = 1; j <= n1; ++j) out.push_back(row[0] - row[j]);
  for (int p = 1; p <= R.ccn.family_n2; ++p) {
    const int a = n1 + 2 * p - 1, b = n1 + 2 * p;
    double bsum = 0.0;
    for (int l = 1; l <= R.ccn.types; ++l)
      if (l != a && l != b) bsum += row[l];
    Eig3DPair eig = eig_3d_pair(row[0], bsum, row[a], row[b]);
    out.push_back(eig.lateral1);
    out.push_back(eig.lateral2);
  }
  return out;
}

}  // namespace detail

// Launch task for one arc: start point, designated target, deviation basis.
inline ConnectionTask connection_task(const Realization& R, const Arc& arc,
                                      const VerifyOptions& opt,
                                      const ScalarField& field,
                                      std::vector<Vec>* jac_cache_keyed) {
  (void)jac_cache_keyed;
  const int m = R.ccn.cells;
  const double delta = opt.start_delta_factor * R.cfg.spacing;
  ConnectionTask task;
  task.basis = subspace_basis(arc.subspace, m);
  task.target = detail::sync_point(m, R.rho[arc.target]);
  Vec ps = detail::sync_point(m, R.rho[arc.source]);
  if (arc.dim == 2) {
    const int j = arc.subspace.j1;
    auto J = jacobian(R.ccn, field, ps);
    Vec dir = unstable_direction(J, task.basis, [&](const Vec& d) {
      return arc.half * (d[j] - d[0]);
    });
    task.start.resize(m);
    for (int i = 0; i < m; ++i) task.start[i] = ps[i] + delta * dir[i];
  } else {
    const auto w = transverse_dir(arc.sector_angle);
    Vec off = detail::pair_offset(m, arc.subspace, {w[0], w[1], w[2]});
    const double n = norm2(off);
    task.start.resize(m);
    for (int i = 0; i < m; ++i) task.start[i] = ps[i] + delta * off[i] / n;
  }
  return task;
}

inline ConnectionReport verify_connection(const Realization& R, const Arc& arc,
                                          const VerifyOptions& opt,
                                          const ScalarField& field) {
  ConnectionTask task = connection_task(R, arc, opt, field, nullptr);
  const double h = opt.step_factor * R.cfg.spacing;
  const double blowup = 10.0 * (max_abs(R.rho) + R.cfg.spacing);
  ConnectionReport rep =
      run_connection(R.ccn, field, task, opt, h, blowup);
  rep.edge = arc.edge;
  rep.subspace = arc.subspace;
  rep.direction = arc.dim == 2 ? arc.half : arc.lane;
  rep.angle = arc.sector_angle;
  rep.duplicate = arc.duplicate;
  return rep;
}

// Classify a single launch: which node's arrival ball the trajectory settles
// in, if any.
inline std::optional<int> classify_launch(const Realization& R,
                                          const ScalarField& field,
                                          const Vec& start,
                                          const VerifyOptions& opt) {
  const int m = R.ccn.cells;
  const double h = opt.step_factor * R.cfg.spacing;
  const double blowup = 10.0 * (max_abs(R.rho) + R.cfg.spacing);
  int hit = -1;
  double entry = -1.0;
  Vec last = start;
  int stall_ticks = 0;
  long long steps = 0;
  StopPredicate stop = [&](double t, std::span<const double> x) {
    ++steps;
    int nearest = -1;
    for (int v = 0; v < R.net.num_nodes(); ++v) {
      double d2 = 0.0;
      for (int i = 0; i < m; ++i) {
        const double d = x[i] - R.rho[v];
        d2 += d * d;
      }
      if (std::sqrt(d2) < opt.arrival_tol) nearest = v;
    }
    if (nearest >= 0) {
      if (hit != nearest) {
        hit = nearest;
        entry = t;
      }
      if (t - entry >= opt.basin_residence) return true;
    } else {
      hit = -1;
    }
    if (steps % 512 == 0) {
      double moved = 0.0;
      for (int i = 0; i < m; ++i) moved += std::abs(x[i] - last[i]);
      if (moved < 1e-12) {
        stall_ticks++;
        if (stall_ticks >= 2) return true;  // frozen outside every ball
      } else {
        stall_ticks = 0;
      }
      last.assign(x.begin(), x.end());
    }
    return false;
  };
  Trajectory traj = integrate(R.ccn, field, start, h, opt.basin_horizon, stop,
                              1 << 20, blowup);
  if (traj.termination == Trajectory::Termination::ReachedTarget && hit >= 0 &&
      traj.times.back() - entry >= opt.basin_residence - 1e-9)
    return hit;
  return std::nullopt;
}

// Radial fan of launches around a 3D-realized node; classifies each endpoint.
inline BasinReport basin_sample(const Realization& R, const ScalarField& field,
                                int node, int rays, const VerifyOptions& opt) {
  if (rays < 12) throw input_error("basin_sample: need at least 12 rays");
  const SubspaceId sub = R.assignment.empty() ? SubspaceId::full()
                                              : R.assignment[node];
  if (sub.kind != SubspaceId::Kind::ThreeD)
    throw input_error("basin_sample: node is not realized in a 3D subspace");
  BasinReport rep;
  rep.node = node;
  rep.rays = rays;
  const int m = R.ccn.cells;
  const double delta = opt.start_delta_factor * R.cfg.spacing;
  const double pi = std::acos(-1.0);
  for (int r = 0; r < rays; ++r) {
    const double ang = 2.0 * pi * r / rays;
    const auto w = transverse_dir(ang);
    Vec off = detail::pair_offset(m, sub, {w[0], w[1], w[2]});
    const double n = norm2(off);
    Vec start(m);
    for (int i = 0; i < m; ++i)
      start[i] = R.rho[node] + delta * off[i] / n;
    auto target = classify_launch(R, field, start, opt);
    if (target)
      rep.target_counts[*target]++;
    else
      rep.unresolved++;
  }
  return rep;
}

inline RealizationReport verify_all(const Realization& R,
                                    const VerifyOptions& opt) {
  RealizationReport report;
  const int m = R.ccn.cells;
  AdmissibleSystem sys(R.ccn, R.field);

  for (int v = 0; v < R.net.num_nodes(); ++v) {
    EquilibriumReport er;
    er.node = v;
    er.rho = R.rho[v];
    Vec p = detail::sync_point(m, R.rho[v]);
    Vec f(m);
    sys.rhs(p, f);
    er.residual = norm2(f);
    auto J = jacobian(R.ccn, R.field, p);
    er.numeric = numeric_eigenvalues(J);
    er.closed_form = detail::closed_form_spectrum(R, v);
    er.eig_deviation = spectrum_deviation(er.numeric, er.closed_form);
    std::string cls = "source:";
    for (const auto& s : R.unstable[v]) cls += s.str() + " ";
    er.classification = cls + "| sink elsewhere";
    report.equilibria.push_back(std::move(er));
  }

  for (const auto& arc : R.arcs)
    report.connections.push_back(verify_connection(R, arc, opt, R.field));

  // Unpaired 2D rays (book mode): classify the opposite half-plane direction
  // of pages that carry a single outgoing arc of the node.
  if (R.mode == RealMode::Book) {
    for (int v = 0; v < R.net.num_nodes(); ++v)
      for (const auto& sub : R.unstable[v])
        for (int half : {+1, -1}) {
          bool carried = false;
          for (const auto& arc : R.arcs)
            if (arc.source == v && arc.subspace == sub && arc.half == half)
              carried = true;
          if (carried) continue;
          RayProbe probe;
          probe.node = v;
          probe.subspace = sub;
          probe.half = half;
          Vec p = detail::sync_point(m, R.rho[v]);
          auto J = jacobian(R.ccn, R.field, p);
          auto basis = subspace_basis(sub, m);
          Vec dir = unstable_direction(J, basis, [&](const Vec& d) {
            return half * (d[sub.j1] - d[0]);
          });
          Vec start(m);
          const double delta = opt.start_delta_factor * R.cfg.spacing;
          for (int i = 0; i < m; ++i) start[i] = p[i] + delta * dir[i];
          auto target = classify_launch(R, R.field, start, opt);
          probe.resolved = target.has_value();
          probe.target = target.value_or(-1);
          report.probes.push_back(probe);
        }
  }

  if (R.mode == RealMode::AlmostComplete) {
    for (int v = 0; v < R.net.num_nodes(); ++v)
      if (R.assignment[v].kind == SubspaceId::Kind::ThreeD)
        report.basins.push_back(
            basin_sample(R, R.field, v, opt.basin_rays, opt));
  }

  if (opt.robustness_trials > 0) {
    const double lo = *std::min_element(R.rho.begin(), R.rho.end()) - 1.0;
    const double hi = *std::max_element(R.rho.begin(), R.rho.end()) + 1.0;
    for (int trial = 1; trial <= opt.robustness_trials; ++trial) {
      PerturbedField pert(R.field, opt.robustness_eta,
                          R.cfg.seed + static_cast<std::uint64_t>(trial), lo,
                          hi);
      RobustnessTrial rt;
      rt.seed = R.cfg.seed + static_cast<std::uint64_t>(trial);
      rt.eta = opt.robustness_eta;
      for (const auto& arc : R.arcs) {
        // Verify against the perturbed equilibria: both endpoints move by
        // O(eta), so refine them before launching.
        ConnectionTask task = connection_task(R, arc, opt, pert, nullptr);
        Vec pt = detail::refine_equilibrium(R.ccn, pert, task.target);
        Vec ps0 = detail::sync_point(m, R.rho[arc.source]);
        Vec ps = detail::refine_equilibrium(R.ccn, pert, ps0);
        Vec shift(m);
        for (int i = 0; i < m; ++i) shift[i] = ps[i] - ps0[i];
        for (int i = 0; i < m; ++i) task.start[i] += shift[i];
        task.target = pt;
        const double h = opt.step_factor * R.cfg.spacing;
        const double blowup = 10.0 * (max_abs(R.rho) + R.cfg.spacing);
        ConnectionReport rep = run_connection(R.ccn, pert, task, opt, h, blowup);
        if (!rep.passed) rt.failures++;
      }
      rt.all_passed = rt.failures == 0;
      report.robustness.push_back(rt);
    }
  }

  const bool conn_ok = report.all_connections_passed();
  bool probes_ok = true;
  for (const auto& p : report.probes) probes_ok &= p.resolved;
  bool basins_complete = true, basins_almost = true;
  for (const auto& b : report.basins) {
    if (b.unresolved > 0) basins_complete = false;
    if (b.unresolved > 0.05 * b.rays) basins_almost = false;
  }
  if (conn_ok && probes_ok && basins_complete)
    report.grade = "complete";
  else if (conn_ok && basins_almost)
    report.grade = "almost_complete";
  else
    report.grade = "partial";
  return report;
}

}  // namespace hetbook
