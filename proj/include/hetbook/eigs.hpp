#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "hetbook/common.hpp"

namespace hetbook {

// Eigenvalues of the full coupled cell system at a synchronous equilibrium,
// from one row of partial derivatives (a_0 .. a_k): the sum, then a_0 - a_j
// for every input slot j.
inline std::vector<double> eig_full_sync_pn(std::span<const double> alphas,
                                            int k) {
  if (static_cast<int>(alphas.size()) != k + 1)
    throw input_error("eig_full_sync_pn: row must have k+1 entries");
  std::vector<double> out;
  double sum = 0.0;
  for (double a : alphas) sum += a;
  out.push_back(sum);
  for (int j = 1; j <= k; ++j) out.push_back(alphas[0] - alphas[j]);
  return out;
}

struct Eig3DPair {
  double radial = 0.0;
  std::complex<double> lateral1, lateral2;
};

// Spectrum of the 3x3 restriction to a pair subspace: f0 is the self partial,
// b_complement the sum of partials outside {self, pair}, (fa, fb) the pair's
// partials. The lateral pair may be complex for negative discriminants.
inline Eig3DPair eig_3d_pair(double f0, double b_complement, double fa,
                             double fb) {
  Eig3DPair r;
  r.radial = f0 + b_complement + fa + fb;
  const double disc = fb * fb + 2.0 * fa * fb - 3.0 * fa * fa;
  const double base = 2.0 * f0 - fa - fb;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    r.lateral1 = 0.5 * (base + s);
    r.lateral2 = 0.5 * (base - s);
  } else {
    const double s = std::sqrt(-disc);
    r.lateral1 = std::complex<double>(0.5 * base, 0.5 * s);
    r.lateral2 = std::complex<double>(0.5 * base, -0.5 * s);
  }
  return r;
}

// The same restriction as an explicit matrix (row-major 3x3), for oracles.
inline std::array<std::array<double, 3>, 3> pair_restriction_matrix(
    double f0, double b, double fa, double fb) {
  return {{{f0 + b, fa, fb}, {b, f0, fa + fb}, {b + fa, fb, f0}}};
}

}  // namespace hetbook
