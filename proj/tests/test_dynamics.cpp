#include <catch2/catch_amalgamated.hpp>

#include "hetbook/ccn.hpp"
#include "hetbook/dynamics.hpp"
#include "hetbook/eigs.hpp"

using namespace hetbook;

namespace {

// Linear admissible scalar with the given partials, centered at rho.
FnScalarField linear_field(Vec alphas, double rho = 0.0) {
  const int arity = static_cast<int>(alphas.size());
  return FnScalarField(arity, [alphas, rho](std::span<const double> y) {
    double s = 0.0;
    for (size_t i = 0; i < y.size(); ++i) s += alphas[i] * (y[i] - rho);
    return s;
  });
}

CCN scalar_ccn() {
  CCN c;
  c.cells = 1;
  c.types = 0;
  c.input = {{}};
  return c;
}

std::vector<std::complex<double>> eigs_of(
    const std::array<std::array<double, 3>, 3>& M) {
  std::vector<Vec> J(3, Vec(3));
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) J[r][c] = M[r][c];
  return numeric_eigenvalues(J);
}

}  // namespace

TEST_CASE("full-sync eigenvalue list") {
  auto e1 = eig_full_sync_pn(Vec{-1.0, -4.0, 1.0}, 2);
  std::sort(e1.begin(), e1.end());
  CHECK(e1 == std::vector<double>{-4.0, -2.0, 3.0});
  auto e2 = eig_full_sync_pn(Vec{-1.0, -2.0}, 1);
  std::sort(e2.begin(), e2.end());
  CHECK(e2 == std::vector<double>{-3.0, 1.0});
  auto e3 = eig_full_sync_pn(Vec{0.0, 0.0, 0.0, 0.0}, 3);
  CHECK(e3 == std::vector<double>{0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("full-sync list matches finite-difference spectra") {
  Rng rng(2024);
  std::uniform_real_distribution<double> coeff(-3.0, 3.0);
  for (int k = 1; k <= 6; ++k) {
    CCN ccn = build_pn(k);
    for (int draw = 0; draw < 100 / 6 + 1; ++draw) {
      Vec alphas(k + 1);
      for (auto& a : alphas) a = coeff(rng);
      FnScalarField f = linear_field(alphas, 0.3);
      Vec p(ccn.cells, 0.3);
      auto J = jacobian(ccn, f, p);
      auto numeric = numeric_eigenvalues(J);
      std::vector<std::complex<double>> closed;
      for (double ev : eig_full_sync_pn(alphas, k)) closed.push_back(ev);
      CHECK(spectrum_deviation(numeric, closed) < 1e-6);
    }
  }
}

TEST_CASE("pair spectrum closed form") {
  Eig3DPair source = eig_3d_pair(-1.0, 0.0, -2.0, -2.0);
  CHECK(source.radial == Catch::Approx(-5.0));
  CHECK(source.lateral1.real() == Catch::Approx(1.0));
  CHECK(source.lateral2.real() == Catch::Approx(1.0));
  CHECK(source.lateral1.imag() == 0.0);

  Eig3DPair sink = eig_3d_pair(-1.0, 0.0, 0.0, 0.0);
  CHECK(sink.lateral1.real() == Catch::Approx(-1.0));
  CHECK(sink.lateral2.real() == Catch::Approx(-1.0));
}

TEST_CASE("pair spectrum matches the restriction matrix over random draws") {
  Rng rng(7);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  for (int draw = 0; draw < 100; ++draw) {
    const double f0 = coeff(rng), b = coeff(rng), fa = coeff(rng),
                 fb = coeff(rng);
    Eig3DPair eig = eig_3d_pair(f0, b, fa, fb);
    auto numeric = eigs_of(pair_restriction_matrix(f0, b, fa, fb));
    std::vector<std::complex<double>> closed{eig.radial, eig.lateral1,
                                             eig.lateral2};
    CHECK(spectrum_deviation(numeric, closed) < 1e-8);
  }
}

TEST_CASE("pair spectrum matches the finite-difference Jacobian restriction") {
  Rng rng(11);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  CCN ccn = build_q(1, 2);
  for (int draw = 0; draw < 100; ++draw) {
    Vec alphas(ccn.types + 1);
    for (auto& a : alphas) a = coeff(rng);
    FnScalarField f = linear_field(alphas, 0.0);
    Vec p(ccn.cells, 0.0);
    auto J = jacobian(ccn, f, p);
    for (int pair = 1; pair <= 2; ++pair) {
      const int a = 1 + 2 * pair - 1, b = 1 + 2 * pair;
      auto basis = subspace_basis(SubspaceId::three_d(a, b), ccn.cells);
      auto Jr = restrict_jacobian(J, basis);
      auto numeric = numeric_eigenvalues(Jr);
      double bsum = 0.0;
      for (int l = 1; l <= ccn.types; ++l)
        if (l != a && l != b) bsum += alphas[l];
      Eig3DPair eig = eig_3d_pair(alphas[0], bsum, alphas[a], alphas[b]);
      std::vector<std::complex<double>> closed{eig.radial, eig.lateral1,
                                               eig.lateral2};
      CHECK(spectrum_deviation(numeric, closed) < 1e-6);
    }
  }
}

TEST_CASE("jacobian of the admissible system") {
  // Linear field: the Jacobian is exactly the analytic linearization.
  CCN p2 = build_pn(2);
  Vec alphas{-1.0, -4.0, 1.0};
  FnScalarField f = linear_field(alphas, 0.5);
  Vec p(3, 0.5);
  auto J = jacobian(p2, f, p);
  const std::array<std::array<double, 3>, 3> expect = {{
      {-1.0, -4.0, 1.0}, {-4.0, -1.0, 1.0}, {1.0, -4.0, -1.0}}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(J[r][c] - expect[r][c]) < 1e-8);

  FnScalarField zero(3, [](std::span<const double>) { return 0.0; });
  auto Jz = jacobian(p2, zero, p);
  for (const auto& row : Jz)
    for (double v : row) CHECK(v == 0.0);

  // Pair-network restriction example with (f0, f1, f2) = (-1, -2, -2).
  CCN q01 = build_q(0, 1);
  FnScalarField g = linear_field(Vec{-1.0, -2.0, -2.0}, 0.0);
  auto Jq = jacobian(q01, g, Vec(3, 0.0));
  const std::array<std::array<double, 3>, 3> expect_q = {{
      {-1.0, -2.0, -2.0}, {0.0, -1.0, -4.0}, {-2.0, -2.0, -1.0}}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(Jq[r][c] - expect_q[r][c]) < 1e-8);
}

TEST_CASE("integrator on the scalar decay system") {
  CCN one = scalar_ccn();
  FnScalarField f(1, [](std::span<const double> y) { return -y[0]; });
  Trajectory traj = integrate(one, f, Vec{1.0}, 1e-3, 5.0, nullptr);
  CHECK(traj.states.back()[0] == Catch::Approx(std::exp(-5.0)).margin(1e-6));
  CHECK(traj.termination == Trajectory::Termination::MaxTime);

  // Starting at an equilibrium stays put.
  FnScalarField g(1, [](std::span<const double> y) { return y[0] * (1 - y[0]); });
  Trajectory fix = integrate(one, g, Vec{1.0}, 1e-3, 3.0, nullptr);
  CHECK(fix.states.back()[0] == Catch::Approx(1.0));

  // Blow-up detection.
  FnScalarField expl(1, [](std::span<const double> y) { return y[0] * y[0]; });
  Trajectory boom = integrate(one, expl, Vec{5.0}, 1e-3, 10.0, nullptr, 1, 1e3);
  CHECK(boom.termination == Trajectory::Termination::BlowUp);

  REQUIRE_THROWS_AS(integrate(one, f, Vec{1.0}, -1.0, 5.0, nullptr),
                    input_error);
}

TEST_CASE("perturbation with zero amplitude is the identity") {
  CCN p2 = build_pn(2);
  FnScalarField f = linear_field(Vec{-1.0, 0.5, 0.25}, 0.0);
  PerturbedField pert(f, 0.0, 42, -1.0, 1.0);
  Rng rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vec y{u(rng), u(rng), u(rng)};
    CHECK(pert(y) == f(y));
  }
  // Nonzero amplitude stays within eta of the base field.
  PerturbedField small(f, 1e-3, 42, -1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    Vec y{u(rng), u(rng), u(rng)};
    worst = std::max(worst, std::abs(small(y) - f(y)));
  }
  CHECK(worst <= 8 * 1e-3 + 1e-15);
  CHECK(worst > 0.0);
}

TEST_CASE("unstable direction orientation follows the request") {
  CCN p2 = build_pn(2);
  Vec alphas{-1.0, -4.0, 1.0};  // page 1 unstable
  FnScalarField f = linear_field(alphas, 0.0);
  auto J = jacobian(p2, f, Vec(3, 0.0));
  auto basis = subspace_basis(SubspaceId::two_d(1), 3);
  for (int half : {+1, -1}) {
    Vec dir = unstable_direction(J, basis, [&](const Vec& d) {
      return half * (d[1] - d[0]);
    });
    CHECK(half * (dir[1] - dir[0]) > 0.0);
    CHECK(norm2(dir) == Catch::Approx(1.0));
    // Direction lies in the subspace: cells 0 and 2 agree.
    CHECK(dir[0] == Catch::Approx(dir[2]).margin(1e-12));
  }
}
