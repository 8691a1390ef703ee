#include "lavlab/balance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "json.hpp"
#include "lavlab/errors.hpp"
#include "lavlab/support.hpp"

namespace lavlab {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
constexpr double kGoldenAngle = 2.39996322972865332;
constexpr double kRatioClamp = 1e300;  // keeps reports finite when f overflows

double euclid(const std::vector<double>& v) {
  double acc = 0.0;
  for (double c : v) acc += c * c;
  return std::sqrt(acc);
}

int template_size(int ball_samples) { return (ball_samples + 1) / 2; }

// Deterministic sample template for the closed ball B(x, r) clipped to the
// domain box, written to pts with stride dom.dim. Points outside the box are
// discarded, never projected; an empty result means the ball misses the box.
void ball_template(const Domain& dom, const double* x, double r, int m,
                   std::vector<double>& pts) {
  pts.clear();
  if (dom.dim == 1) {
    const double lo = std::max(dom.lo[0], x[0] - r);
    const double hi = std::min(dom.hi[0], x[0] + r);
    if (lo > hi) return;
    const double w = hi - lo;
    pts.push_back(lo);
    pts.push_back(hi);
    pts.push_back(0.5 * (lo + hi));
    pts.push_back(std::clamp(x[0], lo, hi));
    for (int l = 1; l <= 24 && static_cast<int>(pts.size()) < m; ++l) {
      const double off = std::ldexp(w, -l);
      pts.push_back(lo + off);
      pts.push_back(hi - off);
    }
    for (std::size_t i = 0; static_cast<int>(pts.size()) < m; ++i) {
      pts.push_back(lo + w * golden_point(i));
    }
    return;
  }
  const double lo0 = dom.lo[0], hi0 = dom.hi[0];
  const double lo1 = dom.lo[1], hi1 = dom.hi[1];
  auto push = [&](double a, double b) {
    if (a < lo0 || a > hi0 || b < lo1 || b > hi1) return;
    pts.push_back(a);
    pts.push_back(b);
  };
  push(x[0], x[1]);
  // Nearest box point keeps the template nonempty whenever the ball meets
  // the box, even for centers outside it.
  const double cx = std::clamp(x[0], lo0, hi0);
  const double cy = std::clamp(x[1], lo1, hi1);
  if ((cx - x[0]) * (cx - x[0]) + (cy - x[1]) * (cy - x[1]) <= r * r) push(cx, cy);
  const int ring = std::max(8, (m - 1) / 4);
  for (int j = 0; j < ring; ++j) {
    const double th = 2.0 * kPi * j / ring;
    push(x[0] + r * std::cos(th), x[1] + r * std::sin(th));
  }
  const int spiral = std::max(1, m - 1 - ring);
  for (int j = 1; j <= spiral; ++j) {
    const double rad = r * std::sqrt(static_cast<double>(j) / spiral);
    const double th = j * kGoldenAngle;
    push(x[0] + rad * std::cos(th), x[1] + rad * std::sin(th));
  }
}

// Infimum over the radius-halving chain eps, eps/2, ... down to the floor.
// Shrinking eps drops a chain prefix, so the value is monotone by design.
std::vector<double> chain_inf(const Lagrangian& L, const double* x, double eps, double t,
                              const std::vector<std::vector<double>>& targets, int m) {
  const double r_floor = L.domain.diameter() * std::ldexp(1.0, -14);
  std::vector<double> best(targets.size(), kInf);
  std::vector<double> pts;
  bool any = false;
  for (double r = eps;; r *= 0.5) {
    ball_template(L.domain, x, r, m, pts);
    const std::size_t np = pts.size() / static_cast<std::size_t>(L.dim);
    if (np == 0) {
      if (any) break;
      throw domain_error("ball does not meet the domain");
    }
    any = true;
    for (std::size_t ip = 0; ip < np; ++ip) {
      const double* y = pts.data() + ip * static_cast<std::size_t>(L.dim);
      for (std::size_t k = 0; k < targets.size(); ++k) {
        const double v = L.eval(y, t, targets[k].data());
        if (v < best[k]) best[k] = v;
      }
    }
    if (r * 0.5 < r_floor) break;
  }
  return best;
}

std::vector<double> axis_vector(int dim, int axis, double s) {
  std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
  v[static_cast<std::size_t>(axis)] = s;
  return v;
}

// Geometric grid from cap * lo_frac up to cap, n points, last one exact.
std::vector<double> geometric_grid(double cap, double lo_frac, int n) {
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(n));
  const double s_lo = cap * lo_frac;
  for (int j = 0; j < n; ++j) {
    g.push_back(j == n - 1 ? cap
                           : s_lo * std::pow(1.0 / lo_frac,
                                             static_cast<double>(j) / (n - 1)));
  }
  return g;
}

struct Plan {
  std::vector<std::vector<double>> evals;  // xi points whose ball infimum is needed
  std::vector<double> radial;              // profile grid for hull bounds
  std::vector<std::vector<std::size_t>> axis_of;  // [axis][j] -> eval index
  struct Probe {
    std::size_t idx = 0;
    std::vector<std::size_t> sats;  // satellite eval indices, upper-bound mode
  };
  std::vector<Probe> probes;
  bool hull_bound = false;  // isotropic or orthotropic hconv
  bool ub_mode = false;     // general-structure hconv
};

Plan build_plan(const Lagrangian& L, const ConditionSpec& spec, double cap_max) {
  Plan plan;
  const int dim = L.dim;
  auto add = [&](std::vector<double> xi) {
    plan.evals.push_back(std::move(xi));
    return plan.evals.size() - 1;
  };
  const bool hconv = spec.condition == Condition::hconv;

  if (L.structure == Structure::general && hconv) {
    plan.ub_mode = true;
    std::vector<std::vector<double>> primaries = spec.xi_probes;
    if (primaries.empty()) {
      const std::vector<double> s17 = geometric_grid(cap_max, 1e-3, 17);
      if (dim == 1) {
        for (double s : s17) {
          primaries.push_back({s});
          primaries.push_back({-s});
        }
      } else {
        const double h = std::sqrt(0.5);
        const double dirs[4][2] = {{1, 0}, {0, 1}, {h, h}, {h, -h}};
        for (const auto& d : dirs)
          for (double s : s17) primaries.push_back({s * d[0], s * d[1]});
      }
    }
    for (const auto& p : primaries) {
      Plan::Probe pr;
      pr.idx = add(p);
      const double pn = euclid(p);
      if (pn > 0.0) {
        std::vector<double> d;
        if (dim == 1) {
          d = {1.0};
        } else {
          d = {-p[1] / pn, p[0] / pn};
        }
        for (int k = -8; k <= 10; ++k) {
          const double lam = pn * std::pow(2.0, 0.5 * k);
          std::vector<double> a(p), b(p);
          for (int c = 0; c < dim; ++c) {
            a[static_cast<std::size_t>(c)] += lam * d[static_cast<std::size_t>(c)];
            b[static_cast<std::size_t>(c)] -= lam * d[static_cast<std::size_t>(c)];
          }
          pr.sats.push_back(add(std::move(a)));
          pr.sats.push_back(add(std::move(b)));
        }
      }
      plan.probes.push_back(std::move(pr));
    }
    return plan;
  }

  if (L.structure == Structure::isotropic || L.structure == Structure::orthotropic) {
    plan.hull_bound = hconv;
    const int axes = L.structure == Structure::isotropic ? 1 : dim;
    const bool need_radial = plan.hull_bound || spec.xi_probes.empty();
    if (need_radial) {
      plan.radial.push_back(0.0);
      for (double s : geometric_grid(cap_max, 1e-6, spec.radial_points - 1))
        plan.radial.push_back(s);
      plan.axis_of.resize(static_cast<std::size_t>(axes));
      for (int a = 0; a < axes; ++a)
        for (double s : plan.radial)
          plan.axis_of[static_cast<std::size_t>(a)].push_back(add(axis_vector(dim, a, s)));
    }
    if (spec.xi_probes.empty()) {
      for (int a = 0; a < axes; ++a)
        for (std::size_t j = 0; j < plan.radial.size(); ++j)
          plan.probes.push_back({plan.axis_of[static_cast<std::size_t>(a)][j], {}});
    } else {
      for (const auto& p : spec.xi_probes) plan.probes.push_back({add(p), {}});
    }
    return plan;
  }

  // General structure, pointwise conditions: probe a fixed direction fan.
  std::vector<std::vector<double>> pts;
  if (spec.xi_probes.empty()) {
    pts.push_back(std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    if (dim == 1) {
      for (double s : geometric_grid(cap_max, 1e-6, spec.radial_points - 1)) {
        pts.push_back({s});
        pts.push_back({-s});
      }
    } else {
      const double h = std::sqrt(0.5);
      const double dirs[4][2] = {{1, 0}, {0, 1}, {h, h}, {h, -h}};
      for (const auto& d : dirs)
        for (double s : geometric_grid(cap_max, 1e-3, 17))
          pts.push_back({s * d[0], s * d[1]});
    }
  } else {
    pts = spec.xi_probes;
  }
  for (const auto& p : pts) plan.probes.push_back({add(p), {}});
  return plan;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() < 2) return 0.0;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cov += (xs[i] - mx) * (ys[i] - my);
    var += (xs[i] - mx) * (xs[i] - mx);
  }
  return var == 0.0 ? 0.0 : cov / var;
}

struct WitRec {
  Witness w;
  std::size_t ix = 0, it = 0, e = 0, pi = 0;
};

struct SlotRow {
  double sup = 0.0;
  std::size_t adm = 0;
  std::size_t tot = 0;
};

struct Slot {
  std::vector<SlotRow> rows;
  std::vector<WitRec> wits;
  bool overflow = false;  // a hull profile overflowed and samples were skipped
};

void trim_witnesses(std::vector<WitRec>& wits, std::size_t keep) {
  std::stable_sort(wits.begin(), wits.end(),
                   [](const WitRec& a, const WitRec& b) { return a.w.ratio > b.w.ratio; });
  if (wits.size() > keep) wits.resize(keep);
}

std::string fmt_double(double v) { return ordered_json(v).dump(); }

}  // namespace

std::string condition_name(Condition c) {
  switch (c) {
    case Condition::hiso0: return "hiso0";
    case Condition::hiso: return "hiso";
    case Condition::hd2: return "hd2";
    case Condition::hconv: return "hconv";
  }
  return "hiso0";
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::satisfied: return "SATISFIED";
    case Verdict::violated: return "VIOLATED";
    case Verdict::inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

Condition parse_condition(const std::string& name) {
  if (name == "hiso0") return Condition::hiso0;
  if (name == "hiso") return Condition::hiso;
  if (name == "hd2") return Condition::hd2;
  if (name == "hconv") return Condition::hconv;
  throw invalid_argument("unknown condition '" + name +
                         "' (expected hiso0, hiso, hd2 or hconv)");
}

double inf_over_ball(const Lagrangian& L, const std::vector<double>& x, double eps,
                     double t, const std::vector<double>& xi, int ball_samples) {
  if (!L.eval) throw invalid_argument("lagrangian has no eval");
  if (static_cast<int>(x.size()) != L.dim || static_cast<int>(xi.size()) != L.dim)
    throw invalid_argument("inf_over_ball: dimension mismatch");
  if (!(eps > 0.0)) throw invalid_argument("inf_over_ball: eps must be positive");
  if (ball_samples < 9) throw invalid_argument("inf_over_ball: ball_samples too small");
  std::vector<std::vector<double>> targets = {xi};
  return chain_inf(L, x.data(), eps, t, targets, template_size(ball_samples))[0];
}

ConvexEnvelope radial_envelope(const Lagrangian& L, const std::vector<double>& x,
                               double eps, double t, double s_cap, int ball_samples,
                               int grid_points, int axis) {
  if (!L.eval) throw invalid_argument("lagrangian has no eval");
  if (L.structure == Structure::general)
    throw unsupported_error("radial_envelope needs isotropic or orthotropic structure");
  if (static_cast<int>(x.size()) != L.dim)
    throw invalid_argument("radial_envelope: dimension mismatch");
  if (!(eps > 0.0) || !(s_cap > 0.0))
    throw invalid_argument("radial_envelope: eps and s_cap must be positive");
  if (grid_points < 8) throw invalid_argument("radial_envelope: grid too small");
  if (ball_samples < 9) throw invalid_argument("radial_envelope: ball_samples too small");
  if (L.structure == Structure::orthotropic && (axis < 0 || axis >= L.dim))
    throw invalid_argument("radial_envelope: orthotropic structure needs an axis");
  if (axis >= L.dim) throw invalid_argument("radial_envelope: axis out of range");
  const int a = axis < 0 ? 0 : axis;

  std::vector<double> grid = {0.0};
  for (double s : geometric_grid(s_cap, 1e-6, grid_points - 1)) grid.push_back(s);
  std::vector<std::vector<double>> targets;
  targets.reserve(grid.size());
  for (double s : grid) targets.push_back(axis_vector(L.dim, a, s));
  std::vector<double> values =
      chain_inf(L, x.data(), eps, t, targets, template_size(ball_samples));
  for (double v : values) {
    if (!std::isfinite(v))
      throw domain_error("radial_envelope: profile overflowed; lower s_cap");
  }
  return convex_minorant(grid, values);
}

double F_eps(const Lagrangian& L, const std::vector<double>& x, double eps, double t,
             const std::vector<double>& qx, double qt, int ball_samples,
             int grid_points) {
  if (qt > 0.0) throw invalid_argument("F_eps: requires qt <= 0");
  if (L.structure == Structure::general)
    throw unsupported_error("F_eps needs isotropic or orthotropic structure");
  if (static_cast<int>(qx.size()) != L.dim) throw invalid_argument("F_eps: dimension mismatch");

  if (L.structure == Structure::isotropic) {
    const double qn = euclid(qx);
    double s_need = qt < 0.0 ? qn / (-qt) : qn;
    const double s_cap = std::max({1.0, 2.0 * s_need, 2.0 * qn});
    ConvexEnvelope env = radial_envelope(L, x, eps, t, s_cap, ball_samples, grid_points, 0);
    auto h = [&env](const std::vector<double>& xi) {
      double acc = 0.0;
      for (double c : xi) acc += c * c;
      return env.value(std::sqrt(acc));
    };
    return hat(h, qx, qt);
  }

  std::vector<ConvexEnvelope> envs;
  envs.reserve(static_cast<std::size_t>(L.dim));
  for (int a = 0; a < L.dim; ++a) {
    const double qa = std::fabs(qx[static_cast<std::size_t>(a)]);
    double s_need = qt < 0.0 ? qa / (-qt) : qa;
    const double s_cap = std::max({1.0, 2.0 * s_need, 2.0 * qa});
    envs.push_back(radial_envelope(L, x, eps, t, s_cap, ball_samples, grid_points, a));
  }
  const double z0 = envs.front().value(0.0);
  const int dim = L.dim;
  auto h = [&envs, z0, dim](const std::vector<double>& xi) {
    double acc = -(dim - 1) * z0;
    for (int a = 0; a < dim; ++a)
      acc += envs[static_cast<std::size_t>(a)].value(std::fabs(xi[static_cast<std::size_t>(a)]));
    return acc;
  };
  return hat(h, qx, qt);
}

double max_over_bounded_set(const Lagrangian& L, double t_cap, double xi_cap,
                            int points_per_axis) {
  if (!L.eval) throw invalid_argument("lagrangian has no eval");
  if (t_cap < 0.0 || xi_cap < 0.0)
    throw invalid_argument("max_over_bounded_set: caps must be nonnegative");
  if (points_per_axis < 2) throw invalid_argument("max_over_bounded_set: need >= 2 points");
  const int dim = L.dim;
  const int nx = dim == 1 ? points_per_axis : std::min(points_per_axis, 33);
  const int nt = dim == 1 ? points_per_axis : std::min(points_per_axis, 17);
  const int nxi = dim == 1 ? points_per_axis : std::min(points_per_axis, 17);

  auto lin = [](double a, double b, int n, int i) {
    return n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1);
  };
  std::vector<std::vector<double>> xs;
  if (dim == 1) {
    for (int i = 0; i < nx; ++i) xs.push_back({lin(L.domain.lo[0], L.domain.hi[0], nx, i)});
  } else {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < nx; ++j)
        xs.push_back({lin(L.domain.lo[0], L.domain.hi[0], nx, i),
                      lin(L.domain.lo[1], L.domain.hi[1], nx, j)});
  }
  std::vector<double> ts;
  const int ntt = t_cap == 0.0 ? 1 : nt;
  for (int i = 0; i < ntt; ++i) ts.push_back(lin(-t_cap, t_cap, ntt, i));
  std::vector<std::vector<double>> xis;
  const int nxx = xi_cap == 0.0 ? 1 : nxi;
  if (dim == 1) {
    for (int i = 0; i < nxx; ++i) xis.push_back({lin(-xi_cap, xi_cap, nxx, i)});
  } else {
    for (int i = 0; i < nxx; ++i)
      for (int j = 0; j < nxx; ++j)
        xis.push_back({lin(-xi_cap, xi_cap, nxx, i), lin(-xi_cap, xi_cap, nxx, j)});
  }

  double best = -kInf;
  for (const auto& x : xs)
    for (double t : ts)
      for (const auto& xi : xis)
        best = std::max(best, L.eval(x.data(), t, xi.data()));
  return best;
}

BalanceReport check_condition(const Lagrangian& L, const ConditionSpec& user) {
  if (!L.eval) throw invalid_argument("lagrangian has no eval");
  if (L.dim != 1 && L.dim != 2)
    throw unsupported_error("check_condition supports dim 1 and 2");
  ConditionSpec spec = user;
  if (!(spec.k1 > 0.0) || !(spec.k2 > 0.0))
    throw invalid_argument("check_condition: k1 and k2 must be positive");
  if (!(spec.ratio_cap > 0.0)) throw invalid_argument("check_condition: ratio_cap must be positive");
  if (spec.ball_samples < 9) throw invalid_argument("check_condition: ball_samples too small");
  if (spec.radial_points < 17) throw invalid_argument("check_condition: radial_points too small");
  if (spec.slope_violated > spec.slope_satisfied)
    throw invalid_argument("check_condition: slope thresholds out of order");

  const double diam = L.domain.diameter();
  if (spec.eps.empty()) {
    for (int k = 1; k <= 10; ++k) spec.eps.push_back(std::ldexp(diam, -k));
  }
  for (double e : spec.eps) {
    if (!(e > 0.0) || e > diam * (1.0 + 1e-12))
      throw invalid_argument("check_condition: eps values must lie in (0, diam]");
  }
  if (spec.t_grid.empty()) {
    for (int i = 0; i < 17; ++i) spec.t_grid.push_back(spec.k1 * (i / 8.0 - 1.0));
  }
  if (spec.x_points.empty()) {
    const int nper = L.dim == 1 ? 33 : 17;
    if (L.dim == 1) {
      for (int i = 0; i < nper; ++i)
        spec.x_points.push_back(
            {L.domain.lo[0] + (L.domain.hi[0] - L.domain.lo[0]) * i / (nper - 1.0)});
    } else {
      for (int i = 0; i < nper; ++i)
        for (int j = 0; j < nper; ++j)
          spec.x_points.push_back(
              {L.domain.lo[0] + (L.domain.hi[0] - L.domain.lo[0]) * i / (nper - 1.0),
               L.domain.lo[1] + (L.domain.hi[1] - L.domain.lo[1]) * j / (nper - 1.0)});
    }
  }
  for (const auto& x : spec.x_points) {
    if (static_cast<int>(x.size()) != L.dim)
      throw invalid_argument("check_condition: x point dimension mismatch");
    if (!L.domain.contains(x.data(), 1e-9 * diam))
      throw invalid_argument("check_condition: x point outside the domain");
  }
  for (const auto& p : spec.xi_probes) {
    if (static_cast<int>(p.size()) != L.dim)
      throw invalid_argument("check_condition: xi probe dimension mismatch");
  }
  if (spec.threads <= 0)
    spec.threads = std::max(1u, std::thread::hardware_concurrency());

  const int N = L.dim;
  const double pmax = std::max(L.p, static_cast<double>(N));
  const std::size_t ne = spec.eps.size();

  std::vector<double> rhs_main(ne), cap_xi(ne);
  double cap_max = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    rhs_main[e] = spec.k2 * fpow(spec.eps[e], -static_cast<double>(N));
    double cap = 0.0;
    switch (spec.condition) {
      case Condition::hiso0:
        cap = spec.k2 * fpow(spec.eps[e], -std::min(1.0, N / L.p));
        break;
      case Condition::hiso:
      case Condition::hconv:
        cap = fpow(rhs_main[e], 1.0 / pmax);
        break;
      case Condition::hd2:
        cap = 4.0 * fpow(rhs_main[e], 1.0 / L.p);
        break;
    }
    cap_xi[e] = cap;
    cap_max = std::max(cap_max, cap);
  }

  const Plan plan = build_plan(L, spec, cap_max);
  const std::size_t np = plan.probes.size();
  std::vector<double> pnorm(np), pnorm_pow(np);
  for (std::size_t pi = 0; pi < np; ++pi) {
    pnorm[pi] = euclid(plan.evals[plan.probes[pi].idx]);
    pnorm_pow[pi] = fpow(pnorm[pi], pmax);
  }

  // A t-independent integrand yields identical rows for every t, so the
  // sweep collapses to one representative value.
  std::vector<double> teff =
      L.t_independent ? std::vector<double>{spec.t_grid.front()} : spec.t_grid;

  const int m = template_size(spec.ball_samples);
  const double r_floor = diam * std::ldexp(1.0, -14);
  const std::size_t nx = spec.x_points.size();
  std::vector<Slot> slots(nx);

  parallel_for(nx, spec.threads, [&](std::size_t ix) {
    Slot& slot = slots[ix];
    slot.rows.assign(ne, SlotRow{});
    const std::vector<double>& x = spec.x_points[ix];
    std::vector<double> pts;
    std::vector<double> fcen(np);
    std::vector<double> inf_v;
    std::vector<double> profile;

    for (std::size_t it = 0; it < teff.size(); ++it) {
      const double t = teff[it];
      for (std::size_t pi = 0; pi < np; ++pi)
        fcen[pi] = L.eval(x.data(), t, plan.evals[plan.probes[pi].idx].data());

      // Direct ball minima per radius, shared across the eps chains.
      std::map<double, std::vector<double>> direct;
      for (std::size_t e = 0; e < ne; ++e) {
        for (double r = spec.eps[e];; r *= 0.5) {
          if (direct.find(r) == direct.end()) {
            auto& row = direct[r];
            row.assign(plan.evals.size(), kInf);
            ball_template(L.domain, x.data(), r, m, pts);
            const std::size_t npts = pts.size() / static_cast<std::size_t>(N);
            for (std::size_t ip = 0; ip < npts; ++ip) {
              const double* y = pts.data() + ip * static_cast<std::size_t>(N);
              for (std::size_t k = 0; k < plan.evals.size(); ++k) {
                const double v = L.eval(y, t, plan.evals[k].data());
                if (v < row[k]) row[k] = v;
              }
            }
          }
          if (r * 0.5 < r_floor) break;
        }
      }

      for (std::size_t e = 0; e < ne; ++e) {
        inf_v.assign(plan.evals.size(), kInf);
        for (double r = spec.eps[e];; r *= 0.5) {
          const auto& row = direct.at(r);
          for (std::size_t k = 0; k < inf_v.size(); ++k)
            if (row[k] < inf_v[k]) inf_v[k] = row[k];
          if (r * 0.5 < r_floor) break;
        }

        std::vector<ConvexEnvelope> hulls;
        bool hull_ok = true;
        if (plan.hull_bound) {
          for (const auto& idxs : plan.axis_of) {
            profile.clear();
            for (std::size_t idx : idxs) {
              profile.push_back(inf_v[idx]);
              if (!std::isfinite(profile.back())) hull_ok = false;
            }
            if (!hull_ok) break;
            hulls.push_back(convex_minorant(plan.radial, profile));
          }
          if (!hull_ok) slot.overflow = true;
        }

        for (std::size_t pi = 0; pi < np; ++pi) {
          slot.rows[e].tot++;
          double bound;
          if (plan.ub_mode) {
            const auto& pr = plan.probes[pi];
            std::vector<XiSample> samples;
            samples.reserve(pr.sats.size() + 1);
            samples.push_back({plan.evals[pr.idx], inf_v[pr.idx]});
            for (std::size_t s : pr.sats) samples.push_back({plan.evals[s], inf_v[s]});
            bound = envelope_upper_bound(samples, plan.evals[pr.idx]);
            if (!std::isfinite(bound)) continue;
          } else if (plan.hull_bound) {
            if (!hull_ok) continue;
            const auto& xi = plan.evals[plan.probes[pi].idx];
            if (hulls.size() == 1) {
              bound = hulls[0].value(pnorm[pi]);
            } else {
              bound = 0.0;
              for (std::size_t a = 0; a < hulls.size(); ++a)
                bound += hulls[a].value(std::fabs(xi[a]));
            }
          } else {
            bound = inf_v[plan.probes[pi].idx];
            if (!std::isfinite(bound)) continue;
          }

          double lhs;
          double rhs;
          switch (spec.condition) {
            case Condition::hiso0:
              lhs = pnorm[pi];
              rhs = cap_xi[e];
              break;
            case Condition::hiso:
              lhs = bound + pnorm_pow[pi];
              rhs = rhs_main[e];
              break;
            case Condition::hd2:
              lhs = bound;
              rhs = rhs_main[e];
              break;
            case Condition::hconv:
            default:
              lhs = bound + pnorm_pow[pi];
              rhs = rhs_main[e];
              break;
          }
          if (!(lhs <= rhs * (1.0 + 1e-12))) continue;
          slot.rows[e].adm++;
          double ratio = fcen[pi] / (bound + 1.0);
          if (!std::isfinite(ratio)) ratio = kRatioClamp;
          ratio = std::min(ratio, kRatioClamp);
          if (ratio > slot.rows[e].sup) slot.rows[e].sup = ratio;
          if (ratio > spec.ratio_cap) {
            WitRec rec;
            rec.w = {x, t, plan.evals[plan.probes[pi].idx], spec.eps[e],
                     fcen[pi], bound, ratio};
            rec.ix = ix;
            rec.it = it;
            rec.e = e;
            rec.pi = pi;
            slot.wits.push_back(std::move(rec));
            if (slot.wits.size() > 96) trim_witnesses(slot.wits, 32);
          }
        }
      }
    }
  });

  BalanceReport report;
  report.problem = L.name;
  report.spec = spec;
  report.table.assign(ne, EpsRow{});
  bool overflow = false;
  std::vector<WitRec> wits;
  for (std::size_t e = 0; e < ne; ++e) report.table[e].eps = spec.eps[e];
  for (std::size_t ix = 0; ix < nx; ++ix) {
    const Slot& slot = slots[ix];
    overflow = overflow || slot.overflow;
    for (std::size_t e = 0; e < ne; ++e) {
      report.table[e].sup_ratio = std::max(report.table[e].sup_ratio, slot.rows[e].sup);
      report.table[e].admissible += slot.rows[e].adm;
      report.table[e].total += slot.rows[e].tot;
    }
    wits.insert(wits.end(), slot.wits.begin(), slot.wits.end());
  }
  trim_witnesses(wits, 16);
  for (auto& rec : wits) report.witnesses.push_back(std::move(rec.w));

  std::vector<double> xs, ys;
  bool any_adm = false;
  bool exceed = false;
  for (const auto& row : report.table) {
    any_adm = any_adm || row.admissible > 0;
    exceed = exceed || row.sup_ratio > spec.ratio_cap;
    report.c_est = std::max(report.c_est, row.sup_ratio);
    if (row.admissible > 0 && row.sup_ratio > 0.0) {
      xs.push_back(std::log(row.eps));
      ys.push_back(std::log(row.sup_ratio));
    }
  }
  report.slope = fit_slope(xs, ys);

  if (!any_adm) {
    report.verdict = Verdict::inconclusive;
    report.notes.push_back("no sample satisfied the antecedent at any eps");
  } else if (exceed && report.slope <= spec.slope_violated) {
    report.verdict = Verdict::violated;
  } else if (!exceed && report.slope >= spec.slope_satisfied) {
    report.verdict = Verdict::satisfied;
  } else {
    report.verdict = Verdict::inconclusive;
  }
  if (plan.ub_mode) {
    report.notes.push_back(
        "general structure under hconv uses a certified upper bound for the "
        "envelope; only violations are certified");
    if (report.verdict == Verdict::satisfied) report.verdict = Verdict::inconclusive;
  }
  if (L.t_independent && spec.t_grid.size() > 1)
    report.notes.push_back("t-independent integrand: the t sweep was collapsed to one value");
  if (overflow)
    report.notes.push_back("a hull profile overflowed; the affected samples were skipped");
  report.notes.push_back(
      "the t sweep uses the closed interval [-k1, k1]; whether the endpoints "
      "should be excluded is an open modeling question");
  return report;
}

BalanceReport check_iso_implies_conv(const Lagrangian& L, ConditionSpec spec) {
  if (L.structure != Structure::isotropic)
    throw unsupported_error("check_iso_implies_conv needs an isotropic integrand");
  spec.condition = Condition::hconv;
  BalanceReport report = check_condition(L, spec);
  report.notes.insert(report.notes.begin(),
                      "probe of the convexified bound implied by the isotropic condition");
  return report;
}

std::string balance_report_json(const BalanceReport& r) {
  ordered_json j;
  j["problem"] = r.problem;
  j["condition"] = condition_name(r.spec.condition);
  j["verdict"] = verdict_name(r.verdict);
  j["c_est"] = r.c_est;
  j["slope"] = r.slope;
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.table) {
    ordered_json o;
    o["eps"] = row.eps;
    o["sup_ratio"] = row.sup_ratio;
    o["admissible"] = row.admissible;
    o["total"] = row.total;
    rows.push_back(std::move(o));
  }
  j["per_eps"] = std::move(rows);
  ordered_json ws = ordered_json::array();
  for (const auto& w : r.witnesses) {
    ordered_json o;
    o["x"] = w.x;
    o["t"] = w.t;
    o["xi"] = w.xi;
    o["eps"] = w.eps;
    o["f"] = w.f;
    o["bound"] = w.bound;
    o["ratio"] = w.ratio;
    ws.push_back(std::move(o));
  }
  j["witnesses"] = std::move(ws);
  ordered_json s;
  s["k1"] = r.spec.k1;
  s["k2"] = r.spec.k2;
  s["eps"] = r.spec.eps;
  s["t_grid"] = r.spec.t_grid;
  s["x_point_count"] = r.spec.x_points.size();
  s["xi_probe_count"] = r.spec.xi_probes.size();
  s["ball_samples"] = r.spec.ball_samples;
  s["radial_points"] = r.spec.radial_points;
  s["ratio_cap"] = r.spec.ratio_cap;
  s["slope_satisfied"] = r.spec.slope_satisfied;
  s["slope_violated"] = r.spec.slope_violated;
  s["threads"] = r.spec.threads;
  j["spec"] = std::move(s);
  j["notes"] = r.notes;
  return j.dump(2);
}

std::string balance_report_csv(const BalanceReport& r) {
  std::string out = "eps,sup_ratio,admissible,total\n";
  for (const auto& row : r.table) {
    out += fmt_double(row.eps);
    out += ',';
    out += fmt_double(row.sup_ratio);
    out += ',';
    out += std::to_string(row.admissible);
    out += ',';
    out += std::to_string(row.total);
    out += '\n';
  }
  return out;
}

}  // namespace lavlab
