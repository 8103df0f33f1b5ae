#pragma once

#include <algorithm>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetbook/ccn.hpp"
#include "hetbook/common.hpp"
#include "hetbook/eigs.hpp"
#include "hetbook/field.hpp"

namespace hetbook {

// ---------------------------------------------------------------------------
// Integration: fixed-step classical RK4 with per-step stop polling.

struct Trajectory {
  enum class Termination { ReachedTarget, MaxTime, BlowUp };
  std::vector<double> times;
  std::vector<Vec> states;
  Termination termination = Termination::MaxTime;
};

using StopPredicate = std::function<bool(double, std::span<const double>)>;

inline Trajectory integrate(const CCN& ccn, const ScalarField& f,
                            std::span<const double> x0, double h, double T,
                            const StopPredicate& stop, int record_stride = 1,
                            double blowup_bound = 1e6) {
  if (h <= 0.0 || T <= 0.0) throw input_error("integrate: need h > 0, T > 0");
  AdmissibleSystem sys(ccn, f);
  const int m = sys.dim();
  Vec x(x0.begin(), x0.end());
  Vec k1(m), k2(m), k3(m), k4(m), tmp(m);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  const auto steps = static_cast<long long>(std::ceil(T / h - 1e-9));
  double t = 0.0;
  for (long long s = 0; s < steps; ++s) {
    sys.rhs(x, k1);
    for (int i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    sys.rhs(tmp, k2);
    for (int i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    sys.rhs(tmp, k3);
    for (int i = 0; i < m; ++i) tmp[i] = x[i] + h * k3[i];
    sys.rhs(tmp, k4);
    for (int i = 0; i < m; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t = (s + 1) * h;
    bool bad = false;
    for (double v : x)
      if (!std::isfinite(v) || std::abs(v) > blowup_bound) bad = true;
    if (bad) {
      traj.termination = Trajectory::Termination::BlowUp;
      traj.times.push_back(t);
      traj.states.push_back(x);
      return traj;
    }
    if ((s + 1) % record_stride == 0 || s + 1 == steps) {
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
    if (stop && stop(t, x)) {
      traj.termination = Trajectory::Termination::ReachedTarget;
      if (traj.times.back() != t) {
        traj.times.push_back(t);
        traj.states.push_back(x);
      }
      return traj;
    }
  }
  traj.termination = Trajectory::Termination::MaxTime;
  return traj;
}

// ---------------------------------------------------------------------------
// Jacobians and spectra.

// Central finite differences of the admissible right-hand side, step 1e-6.
inline std::vector<Vec> jacobian(const CCN& ccn, const ScalarField& f,
                                 std::span<const double> p,
                                 double step = 1e-6) {
  AdmissibleSystem sys(ccn, f);
  const int m = sys.dim();
  std::vector<Vec> J(m, Vec(m, 0.0));
  Vec xp(p.begin(), p.end()), xm(p.begin(), p.end());
  Vec fp(m), fm(m);
  for (int c = 0; c < m; ++c) {
    xp[c] += step;
    xm[c] -= step;
    sys.rhs(xp, fp);
    sys.rhs(xm, fm);
    for (int r = 0; r < m; ++r) {
      const double d = (fp[r] - fm[r]) / (2.0 * step);
      if (!std::isfinite(d)) throw verification_error("jacobian: non-finite");
      J[r][c] = d;
    }
    xp[c] = p[c];
    xm[c] = p[c];
  }
  return J;
}

inline std::vector<std::complex<double>> numeric_eigenvalues(
    const std::vector<Vec>& J) {
  const int m = static_cast<int>(J.size());
  Eigen::MatrixXd M(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) M(r, c) = J[r][c];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(M);
  std::vector<std::complex<double>> out(m);
  for (int i = 0; i < m; ++i) out[i] = solver.eigenvalues()[i];
  std::sort(out.begin(), out.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

// Largest deviation after sorting both spectra canonically.
inline double spectrum_deviation(std::vector<std::complex<double>> a,
                                 std::vector<std::complex<double>> b) {
  auto key = [](const std::complex<double>& x, const std::complex<double>& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  };
  std::sort(a.begin(), a.end(), key);
  std::sort(b.begin(), b.end(), key);
  if (a.size() != b.size()) return 1e300;
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Restriction of a Jacobian to a synchrony subspace (orthonormal basis rows).
inline std::vector<Vec> restrict_jacobian(const std::vector<Vec>& J,
                                          const std::vector<Vec>& basis) {
  const int m = static_cast<int>(J.size());
  const int r = static_cast<int>(basis.size());
  std::vector<Vec> out(r, Vec(r, 0.0));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      double s = 0.0;
      for (int a = 0; a < m; ++a) {
        double Jb = 0.0;
        for (int b = 0; b < m; ++b) Jb += J[a][b] * basis[j][b];
        s += basis[i][a] * Jb;
      }
      out[i][j] = s;
    }
  return out;
}

// Unit vector of the most unstable direction of the restricted Jacobian,
// mapped back to state space. `orient` fixes the overall sign.
inline Vec unstable_direction(const std::vector<Vec>& J,
                              const std::vector<Vec>& basis,
                              const std::function<double(const Vec&)>& orient) {
  auto Jr = restrict_jacobian(J, basis);
  const int r = static_cast<int>(Jr.size());
  Eigen::MatrixXd M(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) M(i, j) = Jr[i][j];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(M);
  int best = 0;
  for (int i = 1; i < r; ++i)
    if (solver.eigenvalues()[i].real() > solver.eigenvalues()[best].real())
      best = i;
  const int m = static_cast<int>(basis[0].size());
  Vec dir(m, 0.0);
  for (int i = 0; i < r; ++i) {
    const double w = solver.eigenvectors().col(best)[i].real();
    for (int a = 0; a < m; ++a) dir[a] += w * basis[i][a];
  }
  const double n = norm2(dir);
  if (n < 1e-12) throw verification_error("degenerate unstable direction");
  for (auto& v : dir) v /= n;
  if (orient && orient(dir) < 0.0)
    for (auto& v : dir) v = -v;
  return dir;
}

// ---------------------------------------------------------------------------
// Reports.

struct EquilibriumReport {
  int node = -1;
  double rho = 0.0;
  double residual = 0.0;
  std::vector<std::complex<double>> numeric;
  std::vector<std::complex<double>> closed_form;
  double eig_deviation = 0.0;
  std::string classification;
};

struct ConnectionReport {
  int edge = -1;
  SubspaceId subspace;
  int direction = 0;     // 2D: half-plane sign; 3D: ray index
  double angle = 0.0;    // 3D sector angle
  bool duplicate = false;
  double start_offset = 0.0;
  double hit_time = -1.0;
  double final_distance = 1e300;
  double max_off_subspace = 0.0;
  bool passed = false;
  std::string note;
};

struct BasinReport {
  int node = -1;
  int rays = 0;
  std::map<int, int> target_counts;
  int unresolved = 0;
};

struct RayProbe {
  int node = -1;
  SubspaceId subspace;
  int half = 0;
  bool resolved = false;
  int target = -1;
};

struct RobustnessTrial {
  std::uint64_t seed = 0;
  double eta = 0.0;
  int failures = 0;
  bool all_passed = false;
};

struct VerifyOptions {
  double start_delta_factor = 1e-4;  // x spacing
  double step_factor = 1e-3;         // x spacing
  double arrival_tol = 1e-3;
  double residence = 5.0;
  double horizon = 500.0;
  double basin_horizon = 120.0;
  double basin_residence = 2.0;
  int basin_rays = 72;
  int robustness_trials = 0;
  double robustness_eta = 0.0;
};

// ---------------------------------------------------------------------------
// Connection verification.

struct ConnectionTask {
  Vec start;                 // launch point p_s + delta * dir
  Vec target;                // p_t
  std::vector<Vec> basis;    // subspace basis for deviation tracking
};

// Integrates from the launch point and passes when the trajectory enters the
// arrival ball and remains inside for the residence window.
inline ConnectionReport run_connection(const CCN& ccn, const ScalarField& f,
                                       const ConnectionTask& task,
                                       const VerifyOptions& opt, double h,
                                       double blowup) {
  ConnectionReport rep;
  double entry = -1.0;
  double max_dev = 0.0;
  double final_dist = 1e300;
  bool done = false;
  double hit = -1.0;
  StopPredicate stop = [&](double t, std::span<const double> x) {
    max_dev = std::max(max_dev, off_subspace_deviation(task.basis, x));
    const double d = dist2(x, task.target);
    final_dist = d;
    if (d < opt.arrival_tol) {
      if (entry < 0.0) entry = t;
      if (t - entry >= opt.residence) {
        done = true;
        hit = entry;
        return true;
      }
    } else {
      entry = -1.0;
    }
    return false;
  };
  Trajectory traj =
      integrate(ccn, f, task.start, h, opt.horizon, stop, 64, blowup);
  rep.start_offset = dist2(task.start, task.target);
  rep.passed = done;
  rep.hit_time = hit;
  rep.final_distance = final_dist;
  rep.max_off_subspace = max_dev;
  if (!done)
    rep.note = traj.termination == Trajectory::Termination::BlowUp
                   ? "blow-up"
                   : "never settled in the arrival ball";
  return rep;
}

// ---------------------------------------------------------------------------
// Perturbations: a fixed number of smooth random bump terms added to the
// scalar function; the perturbed system stays admissible for the same
// network.

class PerturbedField final : public ScalarField {
 public:
  PerturbedField(const ScalarField& base, double eta, std::uint64_t seed,
                 double lo, double hi)
      : base_(&base), eta_(eta) {
    Rng rng(seed);
    std::uniform_real_distribution<double> upos(lo, hi);
    std::uniform_real_distribution<double> urad(0.25, 0.5);
    std::uniform_real_distribution<double> uamp(-1.0, 1.0);
    for (int i = 0; i < kTerms; ++i) {
      BumpTerm term;
      term.center.resize(base.arity());
      for (auto& c : term.center) c = upos(rng);
      term.radius = urad(rng);
      term.amp = eta * uamp(rng);
      terms_.push_back(std::move(term));
    }
  }

  int arity() const override { return base_->arity(); }
  double operator()(std::span<const double> y) const override {
    double v = (*base_)(y);
    if (eta_ == 0.0) return v;
    for (const auto& t : terms_) {
      const double d = dist2(y, t.center);
      if (d < t.radius) v += t.amp * bump(d, 0.4 * t.radius, t.radius);
    }
    return v;
  }

 private:
  static constexpr int kTerms = 8;
  struct BumpTerm {
    Vec center;
    double radius = 0.0;
    double amp = 0.0;
  };
  const ScalarField* base_;
  double eta_;
  std::vector<BumpTerm> terms_;
};

}  // namespace hetbook
