#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hetbook/common.hpp"

namespace hetbook {

// Homogeneous coupled cell network with asymmetric inputs: every cell
// receives exactly one input of each type. input[c][t] is the source cell of
// the type-(t+1) input of cell c.
struct CCN {
  int cells = 0;
  int types = 0;
  std::vector<std::vector<int>> input;
  // Family parameters when built by build_pn / build_q; (-1,-1) otherwise.
  int family_n1 = -1;
  int family_n2 = -1;

  bool operator==(const CCN& o) const {
    return cells == o.cells && types == o.types && input == o.input;
  }
};

inline void validate(const CCN& ccn) {
  if (static_cast<int>(ccn.input.size()) != ccn.cells)
    throw input_error("ccn: input table must have one row per cell");
  for (int c = 0; c < ccn.cells; ++c) {
    if (static_cast<int>(ccn.input[c].size()) != ccn.types)
      throw input_error("ccn: cell " + std::to_string(c) +
                        " must have exactly one input per type");
    for (int t = 0; t < ccn.types; ++t)
      if (ccn.input[c][t] < 0 || ccn.input[c][t] >= ccn.cells)
        throw input_error("ccn: input source out of range");
  }
}

// Cells {0..n}; for type j the source of cell c is j, except cell j itself
// which receives from cell 0.
inline CCN build_pn(int n) {
  if (n < 1) throw input_error("build_pn: n must be >= 1");
  CCN ccn;
  ccn.cells = n + 1;
  ccn.types = n;
  ccn.input.assign(ccn.cells, std::vector<int>(ccn.types, 0));
  for (int c = 0; c <= n; ++c)
    for (int j = 1; j <= n; ++j)
      ccn.input[c][j - 1] = (c == j) ? 0 : j;
  ccn.family_n1 = n;
  ccn.family_n2 = 0;
  validate(ccn);
  return ccn;
}

// Start from P_{n1} (or a single cell when n1 = 0) and append n2 pairs of
// cells. Pair m occupies cells a = n1+2m-1 and b = n1+2m with two new types:
//   type a: source a everywhere, except cell a <- b and cell b <- 0;
//   type b: source b everywhere, except cell b <- a (cell a also <- b).
inline CCN build_q(int n1, int n2) {
  if (n1 < 0 || n2 < 0) throw input_error("build_q: n1, n2 must be >= 0");
  CCN ccn;
  const int m = n1 + 2 * n2 + 1;
  ccn.cells = m;
  ccn.types = n1 + 2 * n2;
  ccn.input.assign(m, std::vector<int>(ccn.types, 0));
  for (int c = 0; c < m; ++c)
    for (int j = 1; j <= n1; ++j)
      ccn.input[c][j - 1] = (c == j) ? 0 : j;
  for (int pair = 1; pair <= n2; ++pair) {
    const int a = n1 + 2 * pair - 1;
    const int b = n1 + 2 * pair;
    for (int c = 0; c < m; ++c) {
      ccn.input[c][a - 1] = (c == a) ? b : (c == b ? 0 : a);
      ccn.input[c][b - 1] = (c == a) ? b : (c == b ? a : b);
    }
  }
  ccn.family_n1 = n1;
  ccn.family_n2 = n2;
  validate(ccn);
  return ccn;
}

// ---------------------------------------------------------------------------
// Colorings (cell partitions) in restricted-growth form: color[0] == 0 and
// color[i] <= 1 + max(color[0..i-1]).

using Coloring = std::vector<int>;

inline Coloring canonical_coloring(const Coloring& c) {
  Coloring out(c.size());
  std::vector<int> relabel;
  for (size_t i = 0; i < c.size(); ++i) {
    auto it = std::find(relabel.begin(), relabel.end(), c[i]);
    if (it == relabel.end()) {
      relabel.push_back(c[i]);
      out[i] = static_cast<int>(relabel.size()) - 1;
    } else {
      out[i] = static_cast<int>(it - relabel.begin());
    }
  }
  return out;
}

inline bool is_balanced(const CCN& ccn, const Coloring& coloring) {
  if (static_cast<int>(coloring.size()) != ccn.cells)
    throw input_error("coloring must assign a class to every cell");
  for (int c = 0; c < ccn.cells; ++c)
    for (int d = c + 1; d < ccn.cells; ++d) {
      if (coloring[c] != coloring[d]) continue;
      for (int t = 0; t < ccn.types; ++t)
        if (coloring[ccn.input[c][t]] != coloring[ccn.input[d][t]])
          return false;
    }
  return true;
}

// All balanced colorings in lexicographic restricted-growth order (the fully
// synchronous coloring first, the discrete one last).
inline std::vector<Coloring> enumerate_balanced(const CCN& ccn,
                                                int max_cells = 10) {
  if (ccn.cells > max_cells)
    throw input_error("enumerate_balanced: cell count exceeds size guard");
  std::vector<Coloring> out;
  Coloring c(ccn.cells, 0);
  std::function<void(int, int)> rec = [&](int i, int maxc) {
    if (i == ccn.cells) {
      if (is_balanced(ccn, c)) out.push_back(c);
      return;
    }
    for (int v = 0; v <= maxc + 1; ++v) {
      c[i] = v;
      rec(i + 1, std::max(maxc, v));
    }
  };
  if (ccn.cells > 0) rec(1, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Synchrony subspaces of the built families.

struct SubspaceId {
  enum class Kind { Full, TwoD, ThreeD };
  Kind kind = Kind::Full;
  int j1 = 0, j2 = 0;  // TwoD: free cell j1; ThreeD: free cells j1 < j2

  static SubspaceId full() { return {}; }
  static SubspaceId two_d(int j) { return {Kind::TwoD, j, 0}; }
  static SubspaceId three_d(int a, int b) { return {Kind::ThreeD, a, b}; }

  bool operator==(const SubspaceId& o) const {
    return kind == o.kind && j1 == o.j1 && j2 == o.j2;
  }

  std::string str() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::Full: os << "D0"; break;
      case Kind::TwoD: os << "D" << j1; break;
      case Kind::ThreeD: os << "D" << j1 << "," << j2; break;
    }
    return os.str();
  }

  Coloring coloring(int cells) const {
    Coloring c(cells, 0);
    int next = 1;
    if (kind != Kind::Full) c[j1] = next++;
    if (kind == Kind::ThreeD) c[j2] = next++;
    return c;
  }
};

inline std::vector<SubspaceId> minimal_synchrony(const CCN& ccn) {
  if (ccn.family_n1 < 0)
    throw input_error("minimal_synchrony: unknown network family");
  std::vector<SubspaceId> out;
  for (int j = 1; j <= ccn.family_n1; ++j) out.push_back(SubspaceId::two_d(j));
  for (int p = 1; p <= ccn.family_n2; ++p)
    out.push_back(SubspaceId::three_d(ccn.family_n1 + 2 * p - 1,
                                      ccn.family_n1 + 2 * p));
  return out;
}

// ---------------------------------------------------------------------------
// Admissible right-hand sides.

// Scalar function of (y_0, y_1, .., y_k): own state plus one input per type.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual int arity() const = 0;
  virtual double operator()(std::span<const double> args) const = 0;
};

class FnScalarField final : public ScalarField {
 public:
  FnScalarField(int arity, std::function<double(std::span<const double>)> f)
      : arity_(arity), f_(std::move(f)) {}
  int arity() const override { return arity_; }
  double operator()(std::span<const double> args) const override {
    return f_(args);
  }

 private:
  int arity_;
  std::function<double(std::span<const double>)> f_;
};

// Evaluates component c as f applied to cell c's state followed by its typed
// inputs. Keeps the argument buffer across calls.
class AdmissibleSystem {
 public:
  AdmissibleSystem(const CCN& ccn, const ScalarField& f) : ccn_(ccn), f_(f) {
    if (f.arity() != ccn.types + 1)
      throw input_error("scalar field arity must be 1 + number of types");
    args_.resize(ccn.types + 1);
  }

  int dim() const { return ccn_.cells; }
  const CCN& ccn() const { return ccn_; }
  const ScalarField& field() const { return f_; }

  void rhs(std::span<const double> x, std::span<double> dx) const {
    if (static_cast<int>(x.size()) != ccn_.cells)
      throw input_error("state dimension must equal the cell count");
    for (int c = 0; c < ccn_.cells; ++c) {
      args_[0] = x[c];
      for (int t = 0; t < ccn_.types; ++t) args_[t + 1] = x[ccn_.input[c][t]];
      dx[c] = f_(args_);
    }
  }

 private:
  const CCN& ccn_;
  const ScalarField& f_;
  mutable Vec args_;
};

inline Vec admissible_rhs(const CCN& ccn, const ScalarField& f,
                          std::span<const double> x) {
  AdmissibleSystem sys(ccn, f);
  Vec out(ccn.cells);
  sys.rhs(x, out);
  return out;
}

// Orthonormal basis (rows) of a synchrony subspace of R^cells.
inline std::vector<Vec> subspace_basis(const SubspaceId& sub, int cells) {
  std::vector<Vec> raw;
  Vec diag(cells, 1.0);
  raw.push_back(diag);
  if (sub.kind != SubspaceId::Kind::Full) {
    Vec e(cells, 0.0);
    e[sub.j1] = 1.0;
    raw.push_back(e);
  }
  if (sub.kind == SubspaceId::Kind::ThreeD) {
    Vec e(cells, 0.0);
    e[sub.j2] = 1.0;
    raw.push_back(e);
  }
  // Gram-Schmidt.
  std::vector<Vec> basis;
  for (auto& v : raw) {
    Vec w = v;
    for (const auto& b : basis) {
      double d = 0.0;
      for (int i = 0; i < cells; ++i) d += w[i] * b[i];
      for (int i = 0; i < cells; ++i) w[i] -= d * b[i];
    }
    double n = norm2(w);
    for (auto& x : w) x /= n;
    basis.push_back(std::move(w));
  }
  return basis;
}

// Distance from x to the subspace (norm of the explicit residual; avoids the
// cancellation of the norm-difference form).
inline double off_subspace_deviation(const std::vector<Vec>& basis,
                                     std::span<const double> x) {
  Vec r(x.begin(), x.end());
  for (const auto& b : basis) {
    double d = 0.0;
    for (size_t i = 0; i < r.size(); ++i) d += x[i] * b[i];
    for (size_t i = 0; i < r.size(); ++i) r[i] -= d * b[i];
  }
  return norm2(r);
}

inline std::string export_dot(const CCN& ccn) {
  static const char* heads[] = {"normal", "vee",  "diamond", "dot",
                                "inv",    "crow", "box",     "tee"};
  std::ostringstream os;
  os << "digraph ccn {\n";
  for (int c = 0; c < ccn.cells; ++c) os << "  " << c << ";\n";
  for (int t = 0; t < ccn.types; ++t)
    for (int c = 0; c < ccn.cells; ++c)
      os << "  " << ccn.input[c][t] << " -> " << c << " [arrowhead="
         << heads[t % 8] << "];\n";
  os << "}\n";
  return os.str();
}

}  // namespace hetbook
