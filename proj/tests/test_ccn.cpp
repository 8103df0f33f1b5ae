#include <algorithm>
#include <functional>

#include <catch2/catch_amalgamated.hpp>

#include "hetbook/ccn.hpp"
#include "hetbook/dynamics.hpp"

using namespace hetbook;

namespace {

// Edge-set view of one input type, for comparisons against explicit lists.
std::vector<std::pair<int, int>> type_edges(const CCN& ccn, int type) {
  std::vector<std::pair<int, int>> out;
  for (int c = 0; c < ccn.cells; ++c) out.push_back({ccn.input[c][type - 1], c});
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<int, int>> sorted(std::vector<std::pair<int, int>> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Independent partition enumerator (plain recursion over class choices),
// used as an oracle against the restricted-growth enumerator.
void partitions_oracle(int cells, std::vector<std::vector<int>>& out) {
  std::vector<int> color(cells, 0);
  std::function<void(int)> rec = [&](int i) {
    if (i == cells) {
      out.push_back(color);
      return;
    }
    int maxc = 0;
    for (int j = 0; j < i; ++j) maxc = std::max(maxc, color[j] + 1);
    for (int v = 0; v <= maxc; ++v) {
      color[i] = v;
      rec(i + 1);
    }
  };
  rec(1);
}

}  // namespace

TEST_CASE("build_pn base and step cases") {
  CCN p1 = build_pn(1);
  CHECK(p1.cells == 2);
  CHECK(p1.types == 1);
  CHECK(type_edges(p1, 1) == sorted({{1, 0}, {0, 1}}));

  CCN p2 = build_pn(2);
  CHECK(type_edges(p2, 1) == sorted({{1, 0}, {0, 1}, {1, 2}}));
  CHECK(type_edges(p2, 2) == sorted({{2, 0}, {2, 1}, {0, 2}}));

  CCN p5 = build_pn(5);
  CHECK(p5.cells == 6);
  CHECK(p5.types == 5);
  REQUIRE_NOTHROW(validate(p5));
  REQUIRE_THROWS_AS(build_pn(0), input_error);
}

TEST_CASE("build_q base cases and edge sets") {
  CCN q01 = build_q(0, 1);
  REQUIRE(q01.cells == 3);
  REQUIRE(q01.types == 2);
  CHECK(type_edges(q01, 1) == sorted({{1, 0}, {2, 1}, {0, 2}}));
  CHECK(type_edges(q01, 2) == sorted({{2, 0}, {2, 1}, {1, 2}}));

  CCN q11 = build_q(1, 1);
  CHECK(q11.cells == 4);
  CHECK(q11.types == 3);
  CHECK(type_edges(q11, 1) == sorted({{1, 0}, {0, 1}, {1, 2}, {1, 3}}));
  CHECK(type_edges(q11, 2) == sorted({{2, 0}, {2, 1}, {3, 2}, {0, 3}}));
  CHECK(type_edges(q11, 3) == sorted({{3, 0}, {3, 1}, {3, 2}, {2, 3}}));

  CHECK(build_q(3, 1).cells == 6);
  CCN q00 = build_q(0, 0);
  CHECK(q00.cells == 1);
  CHECK(q00.types == 0);
}

TEST_CASE("build_q(n1,0) equals build_pn(n1)") {
  for (int n = 1; n <= 6; ++n) CHECK(build_q(n, 0) == build_pn(n));
}

TEST_CASE("every built network has exactly one input per (cell,type)") {
  for (int n = 1; n <= 8; ++n) REQUIRE_NOTHROW(validate(build_pn(n)));
  for (int n1 = 0; n1 <= 4; ++n1)
    for (int n2 = 0; n2 <= 3; ++n2) {
      CCN q = build_q(n1, n2);
      REQUIRE_NOTHROW(validate(q));
      CHECK(q.cells == n1 + 2 * n2 + 1);
      CHECK(q.types == n1 + 2 * n2);
      // Totality is structural; uniqueness means each type's edge set hits
      // every cell exactly once as a target.
      for (int t = 1; t <= q.types; ++t) {
        auto edges = type_edges(q, t);
        std::vector<int> hit(q.cells, 0);
        for (auto [s, d] : edges) ++hit[d];
        CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
      }
    }
}

TEST_CASE("is_balanced on the 3-cell example network") {
  CCN p2 = build_pn(2);
  CHECK(is_balanced(p2, {0, 1, 0}));   // classes {0,2},{1}
  CHECK(!is_balanced(p2, {0, 1, 1}));  // classes {0},{1,2}
  CHECK(is_balanced(p2, {0, 0, 0}));   // full synchrony
}

TEST_CASE("enumerate_balanced matches explicit subspace lists") {
  CCN p2 = build_pn(2);
  auto balanced = enumerate_balanced(p2);
  // Full sync, x0=x2, x0=x1, discrete: exactly two nontrivial 2D subspaces.
  REQUIRE(balanced.size() == 4);
  CHECK(balanced[0] == Coloring{0, 0, 0});
  CHECK(std::find(balanced.begin(), balanced.end(), Coloring{0, 1, 0}) !=
        balanced.end());
  CHECK(std::find(balanced.begin(), balanced.end(), Coloring{0, 0, 1}) !=
        balanced.end());
  CHECK(balanced[3] == Coloring{0, 1, 2});

  CCN p1 = build_pn(1);
  auto b1 = enumerate_balanced(p1);
  REQUIRE(b1.size() == 2);  // full sync + discrete

  // For the first 3-cell pair network, no 2-class coloring is balanced.
  CCN q01 = build_q(0, 1);
  auto bq = enumerate_balanced(q01);
  REQUIRE(bq.size() == 2);
  CHECK(bq[0] == Coloring{0, 0, 0});
  CHECK(bq[1] == Coloring{0, 1, 2});
}

TEST_CASE("enumerate_balanced walks every partition exactly once") {
  CCN p3 = build_pn(3);
  std::vector<std::vector<int>> all;
  partitions_oracle(p3.cells, all);
  CHECK(all.size() == 15);  // Bell(4)
  std::vector<Coloring> expect;
  for (const auto& c : all)
    if (is_balanced(p3, c)) expect.push_back(c);
  CHECK(enumerate_balanced(p3) == expect);
  REQUIRE_THROWS_AS(enumerate_balanced(build_q(4, 3), 10), input_error);
}

TEST_CASE("minimal_synchrony instantiates the family lists") {
  auto p3 = minimal_synchrony(build_pn(3));
  REQUIRE(p3.size() == 3);
  CHECK(p3[0] == SubspaceId::two_d(1));
  CHECK(p3[2] == SubspaceId::two_d(3));

  auto q11 = minimal_synchrony(build_q(1, 1));
  REQUIRE(q11.size() == 2);
  CHECK(q11[0] == SubspaceId::two_d(1));
  CHECK(q11[1] == SubspaceId::three_d(2, 3));

  auto q02 = minimal_synchrony(build_q(0, 2));
  REQUIRE(q02.size() == 2);
  CHECK(q02[0] == SubspaceId::three_d(1, 2));
  CHECK(q02[1] == SubspaceId::three_d(3, 4));

  CCN anon;
  anon.cells = 1;
  REQUIRE_THROWS_AS(minimal_synchrony(anon), input_error);
}

TEST_CASE("minimal subspaces are balanced and minimal by brute force") {
  for (auto [n1, n2] : std::vector<std::pair<int, int>>{
           {1, 0}, {2, 0}, {3, 0}, {0, 1}, {1, 1}, {0, 2}, {5, 0}}) {
    CCN ccn = n2 == 0 && n1 >= 1 ? build_pn(n1) : build_q(n1, n2);
    if (ccn.cells > 6) continue;
    auto balanced = enumerate_balanced(ccn);
    for (const auto& sub : minimal_synchrony(ccn)) {
      Coloring c = sub.coloring(ccn.cells);
      CHECK(is_balanced(ccn, canonical_coloring(c)));
      // No balanced coloring strictly between this one and the discrete one
      // refines it apart from itself: check that every balanced coloring
      // that refines c (separates at least as much) and is nontrivial is c.
      int classes = 1 + *std::max_element(c.begin(), c.end());
      for (const auto& other : balanced) {
        int oc = 1 + *std::max_element(other.begin(), other.end());
        if (oc <= 1 || oc == ccn.cells || oc >= classes) continue;
        // 'other' has fewer classes than the minimal subspace's coloring:
        // it must not refine it.
        bool refines = true;
        for (int i = 0; i < ccn.cells && refines; ++i)
          for (int j = i + 1; j < ccn.cells && refines; ++j)
            if (other[i] == other[j] && c[i] != c[j]) refines = false;
        CHECK(!refines);
      }
    }
  }
}

TEST_CASE("admissible_rhs follows the typed input table") {
  CCN p2 = build_pn(2);
  FnScalarField f(3, [](std::span<const double> a) {
    return a[0] + 2.0 * a[1] + 3.0 * a[2];
  });
  Vec x{1.0, 0.0, 0.0};
  Vec dx = admissible_rhs(p2, f, x);
  CHECK(dx[0] == Catch::Approx(1.0));
  CHECK(dx[1] == Catch::Approx(2.0));
  CHECK(dx[2] == Catch::Approx(3.0));

  FnScalarField zero(3, [](std::span<const double>) { return 0.0; });
  Vec dz = admissible_rhs(p2, zero, x);
  CHECK(norm2(dz) == 0.0);

  // A fully synchronous state keeps all components equal.
  FnScalarField g(3, [](std::span<const double> a) {
    return a[0] * a[1] - 0.5 * a[2] + 0.25;
  });
  Vec sync{0.7, 0.7, 0.7};
  Vec ds = admissible_rhs(p2, g, sync);
  CHECK(ds[0] == Catch::Approx(ds[1]));
  CHECK(ds[1] == Catch::Approx(ds[2]));

  FnScalarField bad(4, [](std::span<const double>) { return 0.0; });
  REQUIRE_THROWS_AS(admissible_rhs(p2, bad, x), input_error);
}

TEST_CASE("trajectories launched in a balanced polydiagonal stay in it") {
  Rng rng(7);
  auto coeff = [&rng]() {
    return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  };
  for (auto [n1, n2] :
       std::vector<std::pair<int, int>>{{2, 0}, {3, 0}, {1, 1}, {0, 2}}) {
    CCN ccn = build_q(n1, n2);
    // Random cubic polynomial in the arguments, contracted so trajectories
    // stay bounded over the test horizon.
    std::vector<double> lin(ccn.types + 1), quad(ccn.types + 1);
    for (auto& v : lin) v = coeff();
    for (auto& v : quad) v = 0.3 * coeff();
    FnScalarField f(ccn.types + 1, [lin, quad](std::span<const double> a) {
      double s = -0.4 * a[0];
      for (size_t i = 0; i < a.size(); ++i)
        s += 0.3 * lin[i] * a[i] + quad[i] * a[i] * a[i] * (1.0 - a[i]);
      return s;
    });
    for (const auto& sub : minimal_synchrony(ccn)) {
      auto basis = subspace_basis(sub, ccn.cells);
      Vec x0(ccn.cells, 0.3);
      x0[sub.j1] = -0.2;
      if (sub.kind == SubspaceId::Kind::ThreeD) x0[sub.j2] = 0.55;
      Trajectory traj = integrate(ccn, f, x0, 1e-3, 10.0, nullptr);
      double worst = 0.0;
      for (const auto& state : traj.states)
        worst = std::max(worst, off_subspace_deviation(basis, state));
      CHECK(worst < 1e-10);
    }
  }
}
