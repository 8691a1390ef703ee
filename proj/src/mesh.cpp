#include "lavlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "lavlab/errors.hpp"
#include "lavlab/quadrature.hpp"
#include "lavlab/support.hpp"

namespace lavlab {

namespace {

void check_interval(double a, double b, int n) {
  if (!(b > a)) throw invalid_argument("mesh: need b > a");
  if (n < 1) throw invalid_argument("mesh: need at least one cell");
  if (!std::isfinite(a) || !std::isfinite(b)) throw invalid_argument("mesh: endpoints must be finite");
}

double chord_slope(const PLFunction& u, std::size_t cell) {
  return (u.values[cell + 1] - u.values[cell]) / (u.nodes[cell + 1] - u.nodes[cell]);
}

// Integral of |c0 + c1 s| over [0, len].
double abs_linear_integral(double c0, double c1, double len) {
  if (len <= 0.0) return 0.0;
  const double e0 = c0;
  const double e1 = c0 + c1 * len;
  if (e0 == 0.0 && e1 == 0.0) return 0.0;
  if (e0 >= 0.0 && e1 >= 0.0) return 0.5 * (e0 + e1) * len;
  if (e0 <= 0.0 && e1 <= 0.0) return -0.5 * (e0 + e1) * len;
  const double root = -c0 / c1;  // sign change inside (0, len)
  return 0.5 * (std::fabs(e0) * root + std::fabs(e1) * (len - root));
}

}  // namespace

Mesh1D Mesh1D::uniform(double a, double b, int n) {
  check_interval(a, b, n);
  Mesh1D m;
  m.nodes.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) m.nodes[static_cast<std::size_t>(i)] = a + (b - a) * (static_cast<double>(i) / n);
  m.nodes.back() = b;
  return m;
}

Mesh1D Mesh1D::graded(double a, double b, int n, double beta) {
  check_interval(a, b, n);
  if (!(beta > 0.0) || !std::isfinite(beta)) throw invalid_argument("mesh: grading exponent must be positive");
  Mesh1D m;
  m.nodes.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    m.nodes[static_cast<std::size_t>(i)] = a + (b - a) * std::pow(static_cast<double>(i) / n, beta);
  }
  m.nodes.front() = a;
  m.nodes.back() = b;
  return m;
}

Mesh1D Mesh1D::graded_at(double a, double b, int n, double beta, double x0) {
  check_interval(a, b, n);
  if (!(beta > 0.0) || !std::isfinite(beta)) throw invalid_argument("mesh: grading exponent must be positive");
  if (!(x0 > a) || !(x0 < b)) throw invalid_argument("mesh: grading point must be interior");
  const double frac = (x0 - a) / (b - a);
  int nl = static_cast<int>(std::lround(frac * n));
  nl = std::max(1, std::min(n - 1, nl));
  const int nr = n - nl;
  Mesh1D m;
  m.nodes.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= nl; ++i) {
    // Walk the left part toward x0 with spacing that shrinks near x0.
    m.nodes.push_back(x0 - (x0 - a) * std::pow(static_cast<double>(nl - i) / nl, beta));
  }
  for (int j = 1; j <= nr; ++j) {
    m.nodes.push_back(x0 + (b - x0) * std::pow(static_cast<double>(j) / nr, beta));
  }
  m.nodes.front() = a;
  m.nodes.back() = b;
  return m;
}

Mesh1D Mesh1D::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 2) throw invalid_argument("mesh: need at least two nodes");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (!(nodes[i] < nodes[i + 1])) throw invalid_argument("mesh: nodes must be strictly increasing");
  }
  for (double x : nodes) {
    if (!std::isfinite(x)) throw invalid_argument("mesh: nodes must be finite");
  }
  Mesh1D m;
  m.nodes = std::move(nodes);
  return m;
}

void PLFunction::validate() const {
  if (nodes.size() < 2) throw invalid_argument("pl function: need at least two nodes");
  if (values.size() != nodes.size()) throw invalid_argument("pl function: node and value counts differ");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (!(nodes[i] < nodes[i + 1])) throw invalid_argument("pl function: nodes must be strictly increasing");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw invalid_argument("pl function: values must be finite");
  }
}

double PLFunction::eval(double x) const {
  if (x <= nodes.front()) return values.front();
  if (x >= nodes.back()) return values.back();
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  const double x0 = nodes[j - 1], x1 = nodes[j];
  const double w = (x - x0) / (x1 - x0);
  return values[j - 1] + w * (values[j] - values[j - 1]);
}

double PLFunction::l1_distance(const PLFunction& other) const {
  const double lo = std::max(nodes.front(), other.nodes.front());
  const double hi = std::min(nodes.back(), other.nodes.back());
  return l1_distance(other, lo, hi);
}

double PLFunction::l1_distance(const PLFunction& other, double lo, double hi) const {
  validate();
  other.validate();
  if (!(hi > lo)) throw invalid_argument("pl function: empty comparison interval");
  std::vector<double> merged;
  merged.reserve(nodes.size() + other.nodes.size() + 2);
  merged.push_back(lo);
  for (double x : nodes) {
    if (x > lo && x < hi) merged.push_back(x);
  }
  for (double x : other.nodes) {
    if (x > lo && x < hi) merged.push_back(x);
  }
  merged.push_back(hi);
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    const double x0 = merged[i], x1 = merged[i + 1];
    const double d0 = eval(x0) - other.eval(x0);
    const double d1 = eval(x1) - other.eval(x1);
    const double len = x1 - x0;
    total += abs_linear_integral(d0, (d1 - d0) / len, len);
  }
  return total;
}

PLFunction PLFunction::restricted(double lo, double hi) const {
  validate();
  if (!(hi > lo)) throw invalid_argument("pl function: empty restriction interval");
  if (lo < nodes.front() || hi > nodes.back()) throw invalid_argument("pl function: restriction exceeds node range");
  PLFunction out;
  out.nodes.push_back(lo);
  out.values.push_back(eval(lo));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] > lo && nodes[i] < hi) {
      out.nodes.push_back(nodes[i]);
      out.values.push_back(values[i]);
    }
  }
  out.nodes.push_back(hi);
  out.values.push_back(eval(hi));
  return out;
}

std::string PLFunction::to_csv() const {
  std::ostringstream os;
  os << "node,value\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    os << nlohmann::ordered_json(nodes[i]).dump() << "," << nlohmann::ordered_json(values[i]).dump() << "\n";
  }
  return os.str();
}

PLFunction interpolate(const std::function<double(double)>& fn, const Mesh1D& mesh) {
  if (!fn) throw invalid_argument("interpolate: missing function");
  if (mesh.nodes.size() < 2) throw invalid_argument("interpolate: mesh needs at least two nodes");
  PLFunction u;
  u.nodes = mesh.nodes;
  u.values.resize(mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) u.values[i] = fn(mesh.nodes[i]);
  u.validate();
  return u;
}

namespace {

double cell_energy(const Lagrangian& L, const QuadRule& rule, double x0, double x1, double v0, double v1) {
  const double slope = (v1 - v0) / (x1 - x0);
  const double mid = 0.5 * (x0 + x1);
  const double half = 0.5 * (x1 - x0);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double x = mid + half * rule.nodes[k];
    const double t = v0 + slope * (x - x0);
    acc += rule.weights[k] * L.eval(&x, t, &slope);
  }
  return acc * half;
}

}  // namespace

double energy(const Lagrangian& L, const PLFunction& u, int quad_order) {
  if (!L.eval) throw invalid_argument("energy: lagrangian has no evaluator");
  if (L.dim != 1) throw invalid_argument("energy: one-dimensional integrand required");
  u.validate();
  const QuadRule& rule = gauss_legendre_rule(quad_order);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < u.nodes.size(); ++i) {
    total += cell_energy(L, rule, u.nodes[i], u.nodes[i + 1], u.values[i], u.values[i + 1]);
  }
  return total;
}

namespace {

struct DescentState {
  const Lagrangian* L = nullptr;
  const QuadRule* rule = nullptr;
  std::vector<double> nodes;
  std::vector<double> v;
  std::vector<double> cellE;  // energy per cell, kept in step with v
  double total = 0.0;

  void recompute() {
    total = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      cellE[i] = cell_energy(*L, *rule, nodes[i], nodes[i + 1], v[i], v[i + 1]);
      total += cellE[i];
    }
  }

  // Energy of the two cells adjacent to node j when it takes value val.
  double local(std::size_t j, double val) const {
    return cell_energy(*L, *rule, nodes[j - 1], nodes[j], v[j - 1], val) +
           cell_energy(*L, *rule, nodes[j], nodes[j + 1], val, v[j + 1]);
  }

  void commit(std::size_t j, double val) {
    const double before = cellE[j - 1] + cellE[j];
    v[j] = val;
    cellE[j - 1] = cell_energy(*L, *rule, nodes[j - 1], nodes[j], v[j - 1], val);
    cellE[j] = cell_energy(*L, *rule, nodes[j], nodes[j + 1], val, v[j + 1]);
    total += (cellE[j - 1] + cellE[j]) - before;
  }
};

// Golden-section refinement of a bracket [lo, hi] around a scanned minimum.
double golden_refine(const DescentState& st, std::size_t j, double lo, double hi, double& best_val,
                     double& best_energy) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = st.local(j, x1);
  double f2 = st.local(j, x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = st.local(j, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = st.local(j, x2);
    }
    if (b - a < 1e-12 * (1.0 + std::fabs(a) + std::fabs(b))) break;
  }
  const double mid = 0.5 * (a + b);
  const double fm = st.local(j, mid);
  if (fm < best_energy) {
    best_energy = fm;
    best_val = mid;
  }
  if (f1 < best_energy) {
    best_energy = f1;
    best_val = x1;
  }
  if (f2 < best_energy) {
    best_energy = f2;
    best_val = x2;
  }
  return best_val;
}

// One pass of scan + golden-section for node j. Returns the energy decrease.
double relax_node(DescentState& st, std::size_t j) {
  const double cur = st.v[j];
  const double cur_local = st.cellE[j - 1] + st.cellE[j];
  double radius = std::fabs(st.v[j + 1] - st.v[j - 1]) + 1.0;
  double best_val = cur;
  double best_energy = cur_local;
  for (int expand = 0; expand < 4; ++expand) {
    const double step = radius / 4.0;
    int best_k = 0;
    for (int k = -4; k <= 4; ++k) {
      if (k == 0) continue;
      const double cand = cur + step * k;
      const double e = st.local(j, cand);
      if (e < best_energy) {
        best_energy = e;
        best_val = cand;
        best_k = k;
      }
    }
    if (std::abs(best_k) < 4) break;  // interior minimum: bracket is good
    radius *= 2.0;
  }
  const double step = radius / 4.0;
  golden_refine(st, j, best_val - step, best_val + step, best_val, best_energy);
  if (best_energy < cur_local) {
    st.commit(j, best_val);
    return cur_local - best_energy;
  }
  return 0.0;
}

std::vector<double> run_descent(DescentState& st, int iters) {
  const std::size_t n = st.nodes.size();
  int stalls = 0;
  for (int sweep = 0; sweep < iters; ++sweep) {
    double gain = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) gain += relax_node(st, j);
    if (gain < 1e-13 * (1.0 + std::fabs(st.total))) {
      if (++stalls >= 2) break;
    } else {
      stalls = 0;
    }
  }
  st.recompute();  // drop accumulated roundoff in the running total
  return st.v;
}

}  // namespace

PLFunction minimize_energy(const Lagrangian& L, const Mesh1D& mesh, const BoundaryData& bc,
                           const std::vector<double>& init, int iters, int restarts,
                           std::uint64_t seed, int quad_order) {
  if (!L.eval) throw invalid_argument("minimize_energy: lagrangian has no evaluator");
  if (L.dim != 1) throw invalid_argument("minimize_energy: one-dimensional problem required");
  if (mesh.nodes.size() < 2) throw invalid_argument("minimize_energy: mesh needs at least two nodes");
  if (iters < 1) throw invalid_argument("minimize_energy: need at least one sweep");
  if (restarts < 0) throw invalid_argument("minimize_energy: restarts must be nonnegative");
  if (!init.empty() && init.size() != mesh.nodes.size()) {
    throw invalid_argument("minimize_energy: init size does not match the mesh");
  }
  const QuadRule& rule = gauss_legendre_rule(quad_order);

  DescentState st;
  st.L = &L;
  st.rule = &rule;
  st.nodes = mesh.nodes;
  const std::size_t n = st.nodes.size();
  std::vector<double> base(n);
  if (init.empty()) {
    const double a = st.nodes.front(), b = st.nodes.back();
    for (std::size_t i = 0; i < n; ++i) {
      base[i] = bc.left + (bc.right - bc.left) * (st.nodes[i] - a) / (b - a);
    }
  } else {
    base = init;
  }
  base.front() = bc.left;
  base.back() = bc.right;

  st.v = base;
  st.cellE.assign(n - 1, 0.0);
  st.recompute();
  if (!std::isfinite(st.total)) throw invalid_argument("minimize_energy: initial energy is not finite");

  double spread = 0.0;
  for (double x : base) spread = std::max(spread, std::fabs(x));
  spread = 0.1 * (spread + 1.0);

  std::vector<double> best_v;
  double best_E = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= restarts; ++r) {
    st.v = base;
    if (r > 0) {
      std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
      std::uniform_real_distribution<double> noise(-spread, spread);
      for (std::size_t j = 1; j + 1 < n; ++j) st.v[j] += noise(rng);
    }
    st.recompute();
    if (!std::isfinite(st.total)) continue;  // a perturbed start may leave the finite region
    run_descent(st, iters);
    if (st.total < best_E) {
      best_E = st.total;
      best_v = st.v;
    }
  }

  PLFunction out;
  out.nodes = st.nodes;
  out.values = best_v;
  return out;
}

double energy_box2(const Lagrangian& L, const std::vector<double>& gx, const std::vector<double>& gy,
                   const std::function<double(double, double)>& u, int quad_order) {
  if (!L.eval) throw invalid_argument("energy_box2: lagrangian has no evaluator");
  if (L.dim != 2) throw invalid_argument("energy_box2: two-dimensional integrand required");
  if (!u) throw invalid_argument("energy_box2: missing field");
  if (gx.size() < 2 || gy.size() < 2) throw invalid_argument("energy_box2: grids need at least two nodes");
  for (std::size_t i = 0; i + 1 < gx.size(); ++i) {
    if (!(gx[i] < gx[i + 1])) throw invalid_argument("energy_box2: grids must be strictly increasing");
  }
  for (std::size_t j = 0; j + 1 < gy.size(); ++j) {
    if (!(gy[j] < gy[j + 1])) throw invalid_argument("energy_box2: grids must be strictly increasing");
  }
  const QuadRule& rule = gauss_legendre_rule(quad_order);

  std::vector<std::vector<double>> vals(gx.size(), std::vector<double>(gy.size()));
  for (std::size_t i = 0; i < gx.size(); ++i) {
    for (std::size_t j = 0; j < gy.size(); ++j) vals[i][j] = u(gx[i], gy[j]);
  }

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < gx.size(); ++i) {
    for (std::size_t j = 0; j + 1 < gy.size(); ++j) {
      const double hx = gx[i + 1] - gx[i];
      const double hy = gy[j + 1] - gy[j];
      const double v00 = vals[i][j], v10 = vals[i + 1][j];
      const double v01 = vals[i][j + 1], v11 = vals[i + 1][j + 1];
      double acc = 0.0;
      for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
        const double sx = 0.5 * (rule.nodes[a] + 1.0);  // cell coordinate in [0, 1]
        const double x = gx[i] + hx * sx;
        for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
          const double sy = 0.5 * (rule.nodes[b] + 1.0);
          const double y = gy[j] + hy * sy;
          const double t = (1 - sx) * (1 - sy) * v00 + sx * (1 - sy) * v10 +
                           (1 - sx) * sy * v01 + sx * sy * v11;
          double xi[2];
          xi[0] = ((1 - sy) * (v10 - v00) + sy * (v11 - v01)) / hx;
          xi[1] = ((1 - sx) * (v01 - v00) + sx * (v11 - v10)) / hy;
          double pt[2] = {x, y};
          acc += rule.weights[a] * rule.weights[b] * L.eval(pt, t, xi);
        }
      }
      total += acc * 0.25 * hx * hy;
    }
  }
  return total;
}

}  // namespace lavlab
