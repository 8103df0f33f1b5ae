#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetbook/common.hpp"

namespace hetbook {

// Directed graph of equilibrium nodes and connections. Node identity is the
// label string; indices follow input order (that order is also the default
// spine). Self-loops and duplicate parallel edges are rejected; strong
// connectivity is enforced unless allow_weak is set.
struct HetNet {
  std::vector<std::string> nodes;
  std::vector<std::pair<int, int>> edges;  // (src, dst) node indices
  bool weak_allowed = false;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  int index_of(const std::string& label) const {
    for (int i = 0; i < num_nodes(); ++i)
      if (nodes[i] == label) return i;
    throw input_error("unknown node label: " + label);
  }

  std::vector<int> out_edges(int node) const {
    std::vector<int> r;
    for (int e = 0; e < num_edges(); ++e)
      if (edges[e].first == node) r.push_back(e);
    return r;
  }

  bool operator==(const HetNet& o) const {
    return nodes == o.nodes && edges == o.edges;
  }
};

struct DegreeProfile {
  std::vector<int> out_degree;
  int n1 = 0;  // nodes with out-degree <= 2
  int n2 = 0;  // nodes with out-degree >= 3
};

inline bool strongly_connected(const HetNet& net) {
  const int n = net.num_nodes();
  if (n == 0) return false;
  auto reach = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (auto [s, d] : net.edges) {
        int from = forward ? s : d, to = forward ? d : s;
        if (from == v && !seen[to]) {
          seen[to] = 1;
          stack.push_back(to);
        }
      }
    }
    return std::count(seen.begin(), seen.end(), 1) == n;
  };
  return reach(true) && reach(false);
}

inline void validate(const HetNet& net) {
  std::map<std::pair<int, int>, int> seen;
  for (auto [s, d] : net.edges) {
    if (s == d)
      throw input_error("homoclinic connection unsupported (self-loop at '" +
                        net.nodes[s] + "')");
    if (++seen[{s, d}] > 1)
      throw input_error("duplicate parallel edge " + net.nodes[s] + " -> " +
                        net.nodes[d]);
  }
  if (!net.weak_allowed && !strongly_connected(net))
    throw input_error("graph is not strongly connected");
}

inline HetNet parse_hetnet(const std::string& text, bool allow_weak = false) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("bad graph JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
    throw input_error("graph JSON must be {\"nodes\":[...],\"edges\":[...]}");
  HetNet net;
  net.weak_allowed = allow_weak;
  for (const auto& n : j["nodes"]) {
    if (!n.is_string()) throw input_error("node labels must be strings");
    net.nodes.push_back(n.get<std::string>());
  }
  for (size_t i = 0; i + 1 < net.nodes.size(); ++i)
    for (size_t k = i + 1; k < net.nodes.size(); ++k)
      if (net.nodes[i] == net.nodes[k])
        throw input_error("duplicate node label: " + net.nodes[i]);
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2)
      throw input_error("each edge must be a [src,dst] pair");
    net.edges.emplace_back(net.index_of(e[0].get<std::string>()),
                           net.index_of(e[1].get<std::string>()));
  }
  validate(net);
  return net;
}

inline std::string to_json(const HetNet& net) {
  nlohmann::json j;
  j["nodes"] = net.nodes;
  auto edges = nlohmann::json::array();
  for (auto [s, d] : net.edges)
    edges.push_back({net.nodes[s], net.nodes[d]});
  j["edges"] = edges;
  return j.dump(2);
}

inline DegreeProfile degree_profile(const HetNet& net) {
  DegreeProfile p;
  p.out_degree.assign(net.num_nodes(), 0);
  for (auto [s, d] : net.edges) {
    (void)d;
    ++p.out_degree[s];
  }
  for (int deg : p.out_degree)
    (deg <= 2 ? p.n1 : p.n2)++;
  return p;
}

// One line per edge, nodes listed in declaration order.
inline std::string export_dot(const HetNet& net) {
  std::ostringstream os;
  os << "digraph hetnet {\n";
  for (const auto& n : net.nodes) os << "  \"" << n << "\";\n";
  for (auto [s, d] : net.edges)
    os << "  \"" << net.nodes[s] << "\" -> \"" << net.nodes[d] << "\";\n";
  os << "}\n";
  return os.str();
}

}  // namespace hetbook
