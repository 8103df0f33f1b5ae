#pragma once

#include <algorithm>
#include <chrono>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetbook/common.hpp"
#include "hetbook/graph.hpp"

namespace hetbook {

struct SpineOrder {
  std::vector<int> order;  // order[rank] = node index
  double spacing = 1.0;

  static SpineOrder identity(int n, double spacing = 1.0) {
    SpineOrder s;
    s.order.resize(n);
    std::iota(s.order.begin(), s.order.end(), 0);
    s.spacing = spacing;
    return s;
  }

  int rank_of(int node) const {
    for (size_t r = 0; r < order.size(); ++r)
      if (order[r] == node) return static_cast<int>(r);
    throw input_error("node not on spine");
  }

  double rho(int node) const { return rank_of(node) * spacing; }
};

struct EdgePlacement {
  int page = 0;  // 1..k
  int half = 0;  // +1 or -1
  bool operator==(const EdgePlacement& o) const {
    return page == o.page && half == o.half;
  }
};

struct BookEmbedding {
  SpineOrder spine;
  std::vector<EdgePlacement> placements;  // per edge, in net edge order
  int pages = 0;
};

// Interleaving test: edges with four distinct endpoints cross iff exactly one
// endpoint of e2 lies strictly between the endpoints of e1 in spine order.
// Edges sharing an endpoint never cross (drawable with nested radii).
inline bool arcs_cross(const SpineOrder& spine, std::pair<int, int> e1,
                       std::pair<int, int> e2) {
  if (e1 == e2) throw input_error("arcs_cross: edges must differ");
  if (e1.first == e2.first || e1.first == e2.second ||
      e1.second == e2.first || e1.second == e2.second)
    return false;
  int a1 = spine.rank_of(e1.first), b1 = spine.rank_of(e1.second);
  if (a1 > b1) std::swap(a1, b1);
  const bool in1 = [&](int node) {
    int r = spine.rank_of(node);
    return a1 < r && r < b1;
  }(e2.first);
  const bool in2 = [&](int node) {
    int r = spine.rank_of(node);
    return a1 < r && r < b1;
  }(e2.second);
  return in1 != in2;
}

struct Violation {
  std::string rule;  // "in-out-exclusivity" | "outgoing-per-half" | "crossing"
  int page = 0;
  std::string detail;
};

inline std::vector<Violation> validate_embedding(const HetNet& net,
                                                 const BookEmbedding& emb) {
  std::vector<Violation> out;
  if (emb.placements.size() != net.edges.size()) {
    out.push_back({"coverage", 0, "placements must cover all edges"});
    return out;
  }
  for (int p = 1; p <= emb.pages; ++p) {
    // Per page: no node may carry both an incoming and an outgoing edge.
    for (int v = 0; v < net.num_nodes(); ++v) {
      bool has_in = false, has_out = false;
      for (int e = 0; e < net.num_edges(); ++e) {
        if (emb.placements[e].page != p) continue;
        if (net.edges[e].first == v) has_out = true;
        if (net.edges[e].second == v) has_in = true;
      }
      if (has_in && has_out)
        out.push_back({"in-out-exclusivity", p,
                       "node " + net.nodes[v] +
                           " has both roles on page " + std::to_string(p)});
    }
    for (int half : {+1, -1}) {
      std::vector<int> here;
      for (int e = 0; e < net.num_edges(); ++e)
        if (emb.placements[e].page == p && emb.placements[e].half == half)
          here.push_back(e);
      // Per half-plane: at most one outgoing edge per node.
      for (int v = 0; v < net.num_nodes(); ++v) {
        int outs = 0;
        for (int e : here)
          if (net.edges[e].first == v) ++outs;
        if (outs > 1)
          out.push_back({"outgoing-per-half", p,
                         "node " + net.nodes[v] + " has " +
                             std::to_string(outs) + " outgoing on page " +
                             std::to_string(p) + " half " +
                             std::to_string(half)});
      }
      // Per half-plane: no interleaving arcs.
      for (size_t i = 0; i < here.size(); ++i)
        for (size_t j = i + 1; j < here.size(); ++j)
          if (arcs_cross(emb.spine, net.edges[here[i]], net.edges[here[j]]))
            out.push_back({"crossing", p,
                           net.nodes[net.edges[here[i]].first] + "->" +
                               net.nodes[net.edges[here[i]].second] + " x " +
                               net.nodes[net.edges[here[j]].first] + "->" +
                               net.nodes[net.edges[here[j]].second]});
    }
  }
  for (const auto& pl : emb.placements) {
    if (pl.page < 1 || pl.page > emb.pages || (pl.half != 1 && pl.half != -1))
      out.push_back({"placement-range", pl.page, "bad page/half value"});
  }
  return out;
}

namespace detail {

// Incremental constraint state for one spine; shared by greedy and exact.
struct PlacementState {
  const HetNet& net;
  const SpineOrder& spine;
  std::vector<std::vector<int>> role;       // role[node][page]: 0 none, 1 in, 2 out
  std::vector<std::vector<int>> out_count;  // out_count[node][2*page+(h>0)]
  std::vector<std::vector<int>> on_half;    // edges placed per (page, half)
  std::vector<EdgePlacement> placed;
  int used_pages = 0;

  PlacementState(const HetNet& n, const SpineOrder& s, int max_pages)
      : net(n), spine(s) {
    role.assign(n.num_nodes(), std::vector<int>(max_pages + 1, 0));
    out_count.assign(n.num_nodes(), std::vector<int>(2 * (max_pages + 1), 0));
    on_half.assign(2 * (max_pages + 1), {});
    placed.assign(n.num_edges(), EdgePlacement{});
  }

  static int half_key(int page, int half) { return 2 * page + (half > 0); }

  bool fits(int e, int page, int half) const {
    auto [s, d] = net.edges[e];
    if (role[s][page] == 1 || role[d][page] == 2) return false;
    if (out_count[s][half_key(page, half)] > 0) return false;
    for (int o : on_half[half_key(page, half)])
      if (arcs_cross(spine, net.edges[e], net.edges[o])) return false;
    return true;
  }

  void place(int e, int page, int half) {
    auto [s, d] = net.edges[e];
    role[s][page] = 2;
    role[d][page] = 1;
    ++out_count[s][half_key(page, half)];
    on_half[half_key(page, half)].push_back(e);
    placed[e] = {page, half};
    used_pages = std::max(used_pages, page);
  }

  void unplace(int e, int page, int half, int prev_used) {
    auto [s, d] = net.edges[e];
    on_half[half_key(page, half)].pop_back();
    --out_count[s][half_key(page, half)];
    // Recompute roles for s and d on this page from remaining edges.
    auto recompute = [&](int v) {
      int r = 0;
      for (int h : {half_key(page, -1), half_key(page, +1)})
        for (int o : on_half[h]) {
          if (net.edges[o].first == v) r = 2;
          if (net.edges[o].second == v && r == 0) r = 1;
        }
      role[v][page] = r;
    };
    recompute(s);
    recompute(d);
    used_pages = prev_used;
  }
};

inline bool assign_edges(PlacementState& st, int e, int k,
                         const std::chrono::steady_clock::time_point& deadline,
                         bool& timed_out) {
  if (e == st.net.num_edges()) return true;
  if ((e & 15) == 0 && std::chrono::steady_clock::now() > deadline) {
    timed_out = true;
    return false;
  }
  const int open_limit = std::min(k, st.used_pages + 1);
  for (int page = 1; page <= open_limit; ++page) {
    const bool fresh = page > st.used_pages;
    for (int half : {+1, -1}) {
      if (fresh && half < 0) break;  // halves of a fresh page are symmetric
      if (!st.fits(e, page, half)) continue;
      const int prev_used = st.used_pages;
      st.place(e, page, half);
      if (assign_edges(st, e + 1, k, deadline, timed_out)) return true;
      st.unplace(e, page, half, prev_used);
      if (timed_out) return false;
    }
  }
  return false;
}

inline std::optional<std::vector<EdgePlacement>> min_assignment_for_spine(
    const HetNet& net, const SpineOrder& spine, int k,
    const std::chrono::steady_clock::time_point& deadline, bool& timed_out) {
  PlacementState st(net, spine, k);
  if (assign_edges(st, 0, k, deadline, timed_out)) return st.placed;
  return std::nullopt;
}

inline int thickness_lower_bound(const HetNet& net) {
  int lb = 1;
  std::vector<int> ins(net.num_nodes(), 0), outs(net.num_nodes(), 0);
  for (auto [s, d] : net.edges) {
    ++outs[s];
    ++ins[d];
  }
  for (int v = 0; v < net.num_nodes(); ++v) {
    int need = (outs[v] + 1) / 2 + (ins[v] > 0 && outs[v] > 0 ? 1 : 0);
    lb = std::max(lb, need);
  }
  return lb;
}

}  // namespace detail

struct ThicknessResult {
  int pages = 0;
  BookEmbedding emb;
  bool optimal = false;
};

inline BookEmbedding greedy_embed(const HetNet& net, const SpineOrder& spine) {
  detail::PlacementState st(net, spine, net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) {
    bool done = false;
    for (int page = 1; page <= st.used_pages + 1 && !done; ++page)
      for (int half : {+1, -1}) {
        if (page > st.used_pages && half < 0) break;
        if (st.fits(e, page, half)) {
          st.place(e, page, half);
          done = true;
          break;
        }
      }
    if (!done) throw synthesis_error("greedy_embed: could not place edge");
  }
  BookEmbedding emb;
  emb.spine = spine;
  emb.placements = st.placed;
  emb.pages = st.used_pages;
  return emb;
}

// Minimal page count over all spine orders (canonicalized up to reversal) and
// valid (page, half) assignments. Deterministic: the returned embedding is the
// lexicographically smallest optimal one (spine sequence first, then per-edge
// placements in edge order). On timeout returns the best upper bound found,
// flagged non-optimal.
inline ThicknessResult exact_thickness(const HetNet& net, int max_pages = 0,
                                       double time_limit_sec = 60.0,
                                       int max_nodes = 8, int max_edges = 20) {
  if (net.num_nodes() > max_nodes || net.num_edges() > max_edges)
    throw input_error("exact_thickness: instance exceeds the size bound");
  if (max_pages <= 0) max_pages = net.num_edges();
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(time_limit_sec));

  ThicknessResult best;
  best.emb = greedy_embed(net, SpineOrder::identity(net.num_nodes()));
  best.pages = best.emb.pages;
  best.optimal = false;

  const int lb = detail::thickness_lower_bound(net);
  std::vector<int> perm(net.num_nodes());
  bool timed_out = false;
  for (int k = lb; k <= max_pages; ++k) {
    std::iota(perm.begin(), perm.end(), 0);
    do {
      // Canonical representative: spine not lexicographically above reverse.
      if (std::lexicographical_compare(perm.rbegin(), perm.rend(),
                                       perm.begin(), perm.end()))
        continue;
      SpineOrder spine;
      spine.order = perm;
      auto placed =
          detail::min_assignment_for_spine(net, spine, k, deadline, timed_out);
      if (placed) {
        best.pages = k;
        best.emb.spine = spine;
        best.emb.placements = *placed;
        best.emb.pages = k;
        best.optimal = true;
        return best;
      }
      if (timed_out) return best;
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (k >= best.pages) {
      // Greedy bound already proven optimal by exhausting smaller k.
      best.optimal = true;
      return best;
    }
  }
  throw solver_limit_error("exact_thickness: infeasible within max_pages");
}

// ---------------------------------------------------------------------------
// Double-next-neighbor generators: node i (1-based) sends to i+1 and i+2 mod n.

inline HetNet dnn_network(int n) {
  if (n < 4) throw input_error("dnn: n must be >= 4");
  HetNet net;
  for (int i = 1; i <= n; ++i) net.nodes.push_back(std::to_string(i));
  auto wrap = [n](int i) { return (i - 1) % n + 1; };
  for (int i = 1; i <= n; ++i) {
    net.edges.emplace_back(i - 1, wrap(i + 1) - 1);
    net.edges.emplace_back(i - 1, wrap(i + 2) - 1);
  }
  validate(net);
  return net;
}

enum class DnnMode { IncomingPairs, OutgoingPairs };

namespace detail {

// Split one page's edges between the two half-planes: at most one outgoing
// edge per node per half, no interleaving arcs per half.
inline bool split_halves(const HetNet& net, const SpineOrder& spine,
                         const std::vector<int>& page_edges, size_t i,
                         std::vector<EdgePlacement>& placements, int page) {
  if (i == page_edges.size()) return true;
  const int e = page_edges[i];
  for (int half : {+1, -1}) {
    bool ok = true;
    for (size_t j = 0; j < i && ok; ++j) {
      const int o = page_edges[j];
      if (placements[o].half != half) continue;
      if (net.edges[o].first == net.edges[e].first) ok = false;
      else if (arcs_cross(spine, net.edges[e], net.edges[o])) ok = false;
    }
    if (!ok) continue;
    placements[e] = {page, half};
    if (split_halves(net, spine, page_edges, i + 1, placements, page))
      return true;
  }
  return false;
}

}  // namespace detail

// Explicit page assignments for double-next-neighbor networks. IncomingPairs
// gives each node's two incoming connections one page (3, 4 or 5 pages by
// n mod 3); OutgoingPairs gives each node's two outgoing connections one page
// (3 pages when 3 | n, else 5).
inline BookEmbedding dnn_embedding(int n, DnnMode mode) {
  const HetNet net = dnn_network(n);
  const SpineOrder spine = SpineOrder::identity(n);
  std::vector<int> page_of(net.num_edges(), 0);
  auto edge_index = [&](int s, int d) {  // 1-based labels
    for (int e = 0; e < net.num_edges(); ++e)
      if (net.edges[e].first == s - 1 && net.edges[e].second == d - 1)
        return e;
    throw input_error("dnn: missing edge");
  };
  auto cyc = [](int i) { return (i - 1) % 3 + 1; };
  if (mode == DnnMode::IncomingPairs) {
    for (int i = 1; i <= n - 2; ++i) {
      page_of[edge_index(i, i + 1)] = cyc(i);
      page_of[edge_index(i, i + 2)] = cyc(i + 1);
    }
    page_of[edge_index(n - 1, n)] = cyc(n - 1);
    const int k = cyc(n - 1);
    if (k == 1) {  // n = 2 mod 3
      page_of[edge_index(n - 1, 1)] = 4;
      page_of[edge_index(n, 1)] = 4;
      page_of[edge_index(n, 2)] = 5;
    } else if (k == 2) {  // n = 0 mod 3
      page_of[edge_index(n - 1, 1)] = 3;
      page_of[edge_index(n, 1)] = 3;
      page_of[edge_index(n, 2)] = 1;
    } else {  // n = 1 mod 3
      page_of[edge_index(n - 1, 1)] = 4;
      page_of[edge_index(n, 1)] = 4;
      page_of[edge_index(n, 2)] = 1;
    }
  } else {
    const bool cyclic = (n % 3 == 0);
    for (int i = 1; i <= n; ++i) {
      int page;
      if (cyclic || i <= n - 2)
        page = cyc(i);
      else
        page = (i == n - 1) ? 4 : 5;
      for (int e = 0; e < net.num_edges(); ++e)
        if (net.edges[e].first == i - 1) page_of[e] = page;
    }
  }
  BookEmbedding emb;
  emb.spine = spine;
  emb.pages = *std::max_element(page_of.begin(), page_of.end());
  emb.placements.assign(net.num_edges(), EdgePlacement{});
  for (int p = 1; p <= emb.pages; ++p) {
    std::vector<int> page_edges;
    for (int e = 0; e < net.num_edges(); ++e)
      if (page_of[e] == p) page_edges.push_back(e);
    if (!detail::split_halves(net, spine, page_edges, 0, emb.placements, p))
      throw synthesis_error("dnn: no half-plane split for page " +
                            std::to_string(p));
  }
  return emb;
}

// ---------------------------------------------------------------------------
// Embedding JSON: {"spine":[labels],"pages":k,"edges":[{src,dst,page,half}]}

inline std::string to_json(const BookEmbedding& emb, const HetNet& net) {
  nlohmann::json j;
  auto spine = nlohmann::json::array();
  for (int node : emb.spine.order) spine.push_back(net.nodes[node]);
  j["spine"] = spine;
  j["pages"] = emb.pages;
  j["spacing"] = emb.spine.spacing;
  auto edges = nlohmann::json::array();
  for (int e = 0; e < net.num_edges(); ++e)
    edges.push_back({{"src", net.nodes[net.edges[e].first]},
                     {"dst", net.nodes[net.edges[e].second]},
                     {"page", emb.placements[e].page},
                     {"half", emb.placements[e].half}});
  j["edges"] = edges;
  return j.dump(2);
}

inline BookEmbedding parse_embedding(const std::string& text,
                                     const HetNet& net) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("bad embedding JSON: ") + e.what());
  }
  BookEmbedding emb;
  emb.pages = j.at("pages").get<int>();
  emb.spine.spacing = j.value("spacing", 1.0);
  for (const auto& label : j.at("spine"))
    emb.spine.order.push_back(net.index_of(label.get<std::string>()));
  if (static_cast<int>(emb.spine.order.size()) != net.num_nodes())
    throw input_error("embedding spine must list every node once");
  emb.placements.assign(net.num_edges(), EdgePlacement{});
  std::vector<char> seen(net.num_edges(), 0);
  for (const auto& e : j.at("edges")) {
    const int s = net.index_of(e.at("src").get<std::string>());
    const int d = net.index_of(e.at("dst").get<std::string>());
    int idx = -1;
    for (int i = 0; i < net.num_edges(); ++i)
      if (net.edges[i] == std::make_pair(s, d)) idx = i;
    if (idx < 0) throw input_error("embedding references unknown edge");
    emb.placements[idx] = {e.at("page").get<int>(), e.at("half").get<int>()};
    seen[idx] = 1;
  }
  if (std::count(seen.begin(), seen.end(), 1) != net.num_edges())
    throw input_error("embedding must place every edge");
  return emb;
}

}  // namespace hetbook
