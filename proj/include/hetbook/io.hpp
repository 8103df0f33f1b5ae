#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetbook/realize.hpp"

namespace hetbook {

inline nlohmann::json to_json(const SubspaceId& s) {
  switch (s.kind) {
    case SubspaceId::Kind::Full: return {{"kind", "full"}};
    case SubspaceId::Kind::TwoD: return {{"kind", "2d"}, {"j", s.j1}};
    default: return {{"kind", "3d"}, {"j1", s.j1}, {"j2", s.j2}};
  }
}

inline SubspaceId subspace_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "full") return SubspaceId::full();
  if (kind == "2d") return SubspaceId::two_d(j.at("j").get<int>());
  return SubspaceId::three_d(j.at("j1").get<int>(), j.at("j2").get<int>());
}

inline nlohmann::json config_to_json(const RealizationConfig& c) {
  return {{"spacing", c.spacing},
          {"eps", c.eps},
          {"kappa", c.kappa},
          {"tube_radius", c.tube_radius},
          {"lane_base", c.lane_base},
          {"lane_step", c.lane_step},
          {"bump_inner_fraction", c.bump_inner_fraction},
          {"seed", c.seed}};
}

inline RealizationConfig config_from_json(const nlohmann::json& j) {
  RealizationConfig c;
  c.spacing = j.at("spacing").get<double>();
  c.eps = j.at("eps").get<double>();
  c.kappa = j.at("kappa").get<double>();
  c.tube_radius = j.at("tube_radius").get<double>();
  c.lane_base = j.at("lane_base").get<double>();
  c.lane_step = j.at("lane_step").get<double>();
  c.bump_inner_fraction = j.at("bump_inner_fraction").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline nlohmann::json arc_to_json(const Arc& a) {
  nlohmann::json j;
  j["dim"] = a.dim;
  j["edge"] = a.edge;
  j["source"] = a.source;
  j["target"] = a.target;
  j["subspace"] = to_json(a.subspace);
  j["half"] = a.half;
  j["sector_angle"] = a.sector_angle;
  j["fan"] = a.fan;
  j["lane"] = a.lane;
  j["duplicate"] = a.duplicate;
  auto way = nlohmann::json::array();
  for (const auto& p : a.way) way.push_back({p[0], p[1]});
  j["way"] = way;
  auto samples = nlohmann::json::array();
  for (const auto& s : a.samples)
    samples.push_back({{"t", s.t},
                       {"p", {s.point[0], s.point[1], s.point[2]}},
                       {"d", {s.deriv[0], s.deriv[1], s.deriv[2]}}});
  j["samples"] = samples;
  return j;
}

inline Arc arc_from_json(const nlohmann::json& j) {
  Arc a;
  a.dim = j.at("dim").get<int>();
  a.edge = j.at("edge").get<int>();
  a.source = j.at("source").get<int>();
  a.target = j.at("target").get<int>();
  a.subspace = subspace_from_json(j.at("subspace"));
  a.half = j.at("half").get<int>();
  a.sector_angle = j.at("sector_angle").get<double>();
  a.fan = j.at("fan").get<int>();
  a.lane = j.at("lane").get<int>();
  a.duplicate = j.at("duplicate").get<bool>();
  for (const auto& p : j.at("way"))
    a.way.push_back({p[0].get<double>(), p[1].get<double>()});
  for (const auto& s : j.at("samples")) {
    ArcSample smp;
    smp.t = s.at("t").get<double>();
    for (int i = 0; i < 3; ++i) {
      smp.point[i] = s.at("p")[i].get<double>();
      smp.deriv[i] = s.at("d")[i].get<double>();
    }
    a.samples.push_back(smp);
  }
  return a;
}

// Everything needed to rebuild the field bit-identically: doubles survive the
// JSON round-trip exactly (shortest-round-trip formatting).
inline std::string realization_to_json(const Realization& R) {
  nlohmann::json j;
  j["mode"] = R.mode == RealMode::Book ? "book" : "almost_complete";
  j["net"] = nlohmann::json::parse(to_json(R.net));
  j["config"] = config_to_json(R.cfg);
  if (R.mode == RealMode::Book)
    j["embedding"] = nlohmann::json::parse(to_json(R.emb, R.net));
  auto assign = nlohmann::json::array();
  for (const auto& s : R.assignment) assign.push_back(to_json(s));
  j["assignment"] = assign;
  auto alphas = nlohmann::json::array();
  for (const auto& row : R.alphas.rows) alphas.push_back(row);
  j["alphas"] = alphas;
  j["rho"] = R.rho;
  auto arcs = nlohmann::json::array();
  for (const auto& a : R.arcs) arcs.push_back(arc_to_json(a));
  j["arcs"] = arcs;
  auto unstable = nlohmann::json::array();
  for (const auto& subs : R.unstable) {
    auto row = nlohmann::json::array();
    for (const auto& s : subs) row.push_back(to_json(s));
    unstable.push_back(row);
  }
  j["unstable"] = unstable;
  return j.dump(2);
}

inline Realization realization_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("bad realization JSON: ") + e.what());
  }
  Realization R;
  R.mode = j.at("mode").get<std::string>() == "book" ? RealMode::Book
                                                     : RealMode::AlmostComplete;
  R.net = parse_hetnet(j.at("net").dump());
  R.cfg = config_from_json(j.at("config"));
  if (R.mode == RealMode::Book) {
    R.emb = parse_embedding(j.at("embedding").dump(), R.net);
    R.emb.spine.spacing = R.cfg.spacing;
    R.ccn = build_pn(R.emb.pages);
  } else {
    DegreeProfile prof = degree_profile(R.net);
    R.ccn = build_q(prof.n1, prof.n2);
  }
  for (const auto& s : j.at("assignment"))
    R.assignment.push_back(subspace_from_json(s));
  for (const auto& row : j.at("alphas"))
    R.alphas.rows.push_back(row.get<Vec>());
  R.rho = j.at("rho").get<Vec>();
  for (const auto& a : j.at("arcs")) R.arcs.push_back(arc_from_json(a));
  for (const auto& subs : j.at("unstable")) {
    std::vector<SubspaceId> row;
    for (const auto& s : subs) row.push_back(subspace_from_json(s));
    R.unstable.push_back(row);
  }
  std::vector<Tube> tubes;
  for (size_t i = 0; i < R.arcs.size(); ++i) {
    auto ts = lift_and_tube(R.arcs[i], static_cast<int>(i), R.ccn, R.cfg);
    for (auto& t : ts) tubes.push_back(std::move(t));
  }
  R.field = assemble(R.ccn, R.alphas, R.rho, std::move(tubes), R.cfg,
                     R.mode == RealMode::AlmostComplete);
  return R;
}

// ---------------------------------------------------------------------------
// Report serialization (schema-stable).

inline nlohmann::json report_to_json(const RealizationReport& rep,
                                     const HetNet& net) {
  nlohmann::json j;
  auto eqs = nlohmann::json::array();
  for (const auto& e : rep.equilibria) {
    nlohmann::json je;
    je["node"] = net.nodes[e.node];
    je["rho"] = e.rho;
    je["residual"] = e.residual;
    je["eig_deviation"] = e.eig_deviation;
    auto evs = nlohmann::json::array();
    for (const auto& ev : e.numeric) evs.push_back({ev.real(), ev.imag()});
    je["eigenvalues"] = evs;
    auto cf = nlohmann::json::array();
    for (const auto& ev : e.closed_form) cf.push_back({ev.real(), ev.imag()});
    je["closed_form"] = cf;
    je["classification"] = e.classification;
    eqs.push_back(je);
  }
  j["equilibria"] = eqs;

  auto conns = nlohmann::json::array();
  for (const auto& c : rep.connections) {
    nlohmann::json jc;
    jc["edge"] = {net.nodes[net.edges[c.edge].first],
                  net.nodes[net.edges[c.edge].second]};
    jc["subspace"] = to_json(c.subspace);
    jc["direction"] = c.direction;
    jc["angle"] = c.angle;
    jc["duplicate"] = c.duplicate;
    jc["start_offset"] = c.start_offset;
    jc["hit_time"] = c.hit_time;
    jc["final_distance"] = c.final_distance;
    jc["max_off_subspace"] = c.max_off_subspace;
    jc["passed"] = c.passed;
    if (!c.note.empty()) jc["note"] = c.note;
    conns.push_back(jc);
  }
  j["connections"] = conns;

  auto probes = nlohmann::json::array();
  for (const auto& p : rep.probes)
    probes.push_back({{"node", net.nodes[p.node]},
                      {"subspace", to_json(p.subspace)},
                      {"half", p.half},
                      {"resolved", p.resolved},
                      {"target", p.target >= 0 ? net.nodes[p.target] : ""}});
  j["probes"] = probes;

  auto basins = nlohmann::json::array();
  for (const auto& b : rep.basins) {
    nlohmann::json jb;
    jb["node"] = net.nodes[b.node];
    jb["rays"] = b.rays;
    jb["unresolved"] = b.unresolved;
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [target, count] : b.target_counts)
      counts[net.nodes[target]] = count;
    jb["targets"] = counts;
    basins.push_back(jb);
  }
  j["basins"] = basins;

  auto rob = nlohmann::json::array();
  for (const auto& r : rep.robustness)
    rob.push_back({{"seed", r.seed},
                   {"eta", r.eta},
                   {"failures", r.failures},
                   {"all_passed", r.all_passed}});
  j["robustness"] = rob;
  j["grade"] = rep.grade;
  return j;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write " + path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace hetbook
