#include <catch2/catch_amalgamated.hpp>

#include "hetbook/graph.hpp"

using namespace hetbook;

namespace {

// The four-edge network with two 2-cycles sharing a middle node.
const char* kTwoTwoCycles = R"({
  "nodes": ["a", "b", "c"],
  "edges": [["a","b"], ["b","a"], ["b","c"], ["c","b"]]
})";

// Brute-force reachability oracle: all-pairs BFS.
bool strongly_connected_oracle(const HetNet& net) {
  const int n = net.num_nodes();
  for (int s = 0; s < n; ++s) {
    std::vector<char> seen(n, 0);
    std::vector<int> q{s};
    seen[s] = 1;
    while (!q.empty()) {
      int v = q.back();
      q.pop_back();
      for (auto [a, b] : net.edges)
        if (a == v && !seen[b]) {
          seen[b] = 1;
          q.push_back(b);
        }
    }
    for (int t = 0; t < n; ++t)
      if (!seen[t]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("parse_hetnet accepts the two-2-cycles network") {
  HetNet net = parse_hetnet(kTwoTwoCycles);
  REQUIRE(net.num_nodes() == 3);
  REQUIRE(net.num_edges() == 4);
  CHECK(net.edges[0] == std::make_pair(0, 1));
  CHECK(net.edges[3] == std::make_pair(2, 1));
}

TEST_CASE("parse_hetnet rejects self-loops as homoclinic") {
  REQUIRE_THROWS_WITH(
      parse_hetnet(R"({"nodes":["a"],"edges":[["a","a"]]})"),
      Catch::Matchers::ContainsSubstring("homoclinic"));
}

TEST_CASE("parse_hetnet rejects weakly connected graphs") {
  REQUIRE_THROWS_WITH(
      parse_hetnet(R"({"nodes":["a","b"],"edges":[["a","b"]]})"),
      Catch::Matchers::ContainsSubstring("strongly connected"));
  // --allow-weak relaxes the check.
  HetNet net = parse_hetnet(R"({"nodes":["a","b"],"edges":[["a","b"]]})", true);
  CHECK(net.weak_allowed);
}

TEST_CASE("parse_hetnet rejects duplicate parallel edges and labels") {
  REQUIRE_THROWS_WITH(
      parse_hetnet(
          R"({"nodes":["a","b"],"edges":[["a","b"],["a","b"],["b","a"]]})"),
      Catch::Matchers::ContainsSubstring("duplicate"));
  REQUIRE_THROWS(parse_hetnet(R"({"nodes":["a","a"],"edges":[]})"));
  REQUIRE_THROWS_AS(parse_hetnet("not json"), input_error);
}

TEST_CASE("degree_profile counts out-degrees by source") {
  HetNet net = parse_hetnet(kTwoTwoCycles);
  DegreeProfile p = degree_profile(net);
  CHECK(p.out_degree == std::vector<int>{1, 2, 1});
  CHECK(p.n1 == 3);
  CHECK(p.n2 == 0);

  HetNet cyc = parse_hetnet(
      R"({"nodes":["a","b","c"],"edges":[["a","b"],["b","c"],["c","a"]]})");
  DegreeProfile pc = degree_profile(cyc);
  CHECK(pc.out_degree == std::vector<int>{1, 1, 1});
  CHECK(pc.n1 == 3);

  HetNet fan = parse_hetnet(
      R"({"nodes":["h","x","y","z"],
          "edges":[["h","x"],["h","y"],["h","z"],["x","h"],["y","h"],["z","h"]]})");
  DegreeProfile pf = degree_profile(fan);
  CHECK(pf.n1 == 3);
  CHECK(pf.n2 == 1);
}

TEST_CASE("degree profile sums to the edge count") {
  for (const char* text :
       {kTwoTwoCycles,
        R"({"nodes":["a","b","c","d"],
            "edges":[["a","b"],["b","c"],["c","d"],["d","a"],["b","a"]]})"}) {
    HetNet net = parse_hetnet(text);
    DegreeProfile p = degree_profile(net);
    int sum = 0;
    for (int d : p.out_degree) sum += d;
    CHECK(sum == net.num_edges());
    CHECK(p.n1 + p.n2 == net.num_nodes());
  }
}

TEST_CASE("export_dot emits one line per edge") {
  HetNet net = parse_hetnet(kTwoTwoCycles);
  std::string dot = export_dot(net);
  size_t arrows = 0, pos = 0;
  while ((pos = dot.find("->", pos)) != std::string::npos) {
    ++arrows;
    pos += 2;
  }
  CHECK(arrows == 4);
  CHECK(dot.rfind("digraph", 0) == 0);
}

TEST_CASE("json round-trip is the identity on valid nets") {
  for (const char* text :
       {kTwoTwoCycles,
        R"({"nodes":["a","b","c","d"],
            "edges":[["a","b"],["b","c"],["c","d"],["d","a"]]})"}) {
    HetNet net = parse_hetnet(text);
    HetNet again = parse_hetnet(to_json(net));
    CHECK(net == again);
  }
}

TEST_CASE("strong connectivity agrees with the all-pairs BFS oracle") {
  Rng rng(20240518);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);  // up to 8 nodes
    HetNet net;
    for (int i = 0; i < n; ++i) net.nodes.push_back("n" + std::to_string(i));
    for (int s = 0; s < n; ++s)
      for (int d = 0; d < n; ++d)
        if (s != d && rng() % 100 < 30) net.edges.emplace_back(s, d);
    CHECK(strongly_connected(net) == strongly_connected_oracle(net));
    ++checked;
  }
  REQUIRE(checked == 300);
}
