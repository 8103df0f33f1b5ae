#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetbook {

// Error categories map 1:1 onto CLI exit codes (1..4).
struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct solver_limit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct synthesis_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct verification_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;
using Rng = std::mt19937_64;

// C^2 monotone quintic step: 0 at t<=0, 1 at t>=1.
inline double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
}

// Plateau bump: 1 for r <= r_inner, 0 for r >= r_outer, quintic in between.
inline double bump(double r, double r_inner, double r_outer) {
  if (r_inner < 0.0 || r_outer <= r_inner)
    throw input_error("bump: require 0 <= r_inner < r_outer");
  return 1.0 - smoothstep5((r - r_inner) / (r_outer - r_inner));
}

inline double mean(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s += v;
  return s / static_cast<double>(y.size());
}

// Distance to the diagonal line {x_0 = ... = x_{m-1}}.
inline double dist_to_diagonal(std::span<const double> y) {
  const double mu = mean(y);
  double s = 0.0;
  for (double v : y) s += (v - mu) * (v - mu);
  return std::sqrt(s);
}

inline double norm2(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double max_abs(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace hetbook
