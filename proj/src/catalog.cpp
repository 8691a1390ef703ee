#include "lavlab/catalog.hpp"

#include <algorithm>
#include <cmath>

#include "lavlab/errors.hpp"
#include "lavlab/support.hpp"

namespace lavlab {
namespace {

constexpr double kE = 2.718281828459045235;

double get(const std::map<std::string, double>& m, const std::string& k) {
  return m.at(k);
}

double norm(const double* v, int dim) {
  double acc = 0.0;
  for (int i = 0; i < dim; ++i) acc += v[i] * v[i];
  return std::sqrt(acc);
}

Domain interval(double a, double b) {
  Domain d;
  d.dim = 1;
  d.lo = {a};
  d.hi = {b};
  return d;
}

Domain box2(double a, double b) {
  Domain d;
  d.dim = 2;
  d.lo = {a, a};
  d.hi = {b, b};
  return d;
}

// Linear interpolant of the two-point data, the natural datum for interval
// problems; its rank is the slope.
void linear_datum(Lagrangian& L) {
  const double lo = L.domain.lo[0];
  const double slope = (L.bc.right - L.bc.left) / (L.domain.hi[0] - lo);
  const double left = L.bc.left;
  L.domain.boundary_datum = [left, slope, lo](const double* x) {
    return left + slope * (x[0] - lo);
  };
  L.domain.datum_rank = std::fabs(slope);
}

void zero_datum(Lagrangian& L) {
  L.domain.boundary_datum = [](const double*) { return 0.0; };
  L.domain.datum_rank = 0.0;
}

struct Entry {
  std::string describe;
  std::map<std::string, double> defaults;
  Lagrangian (*build)(const std::map<std::string, double>&);
};

Lagrangian build_mania(const std::map<std::string, double>&) {
  Lagrangian L;
  L.dim = 1;
  L.p = 1.0;
  L.structure = Structure::isotropic;  // xi enters through xi^6 = |xi|^6
  L.claims_convex_in_xi = true;
  L.vanishes_at_zero = true;
  L.domain = interval(0.0, 1.0);
  L.bc = {0.0, 1.0};
  linear_datum(L);
  L.eval = [](const double* x, double t, const double* xi) {
    const double d = t * t * t - x[0];
    return d * d * ipow(xi[0], 6);
  };
  L.singular_profile = [](double x) { return std::cbrt(x); };
  L.reference = "Mania (1934)";
  return L;
}

Lagrangian build_ball_mizel(const std::map<std::string, double>& prm) {
  const double nu = get(prm, "nu");
  if (!(nu > 0.0)) throw invalid_argument("ball_mizel: nu must be positive");
  Lagrangian L;
  L.dim = 1;
  L.p = 2.0;
  L.structure = Structure::isotropic;
  L.claims_convex_in_xi = true;
  L.vanishes_at_zero = true;
  L.domain = interval(-1.0, 1.0);
  L.bc = {-0.5, 0.5};
  linear_datum(L);
  L.eval = [nu](const double* x, double t, const double* xi) {
    const double d = ipow(x[0], 4) - ipow(t, 6);
    return d * d * ipow(std::fabs(xi[0]), 27) + nu * xi[0] * xi[0];
  };
  L.singular_profile = [](double x) {
    const double v = (x < 0.0 ? -1.0 : 1.0) * fpow(std::fabs(x), 2.0 / 3.0);
    return std::clamp(v, -0.5, 0.5);
  };
  L.singular_at = 0.0;
  L.reference = "Ball and Mizel (1985)";
  return L;
}

Lagrangian build_cerf_mariconda(const std::map<std::string, double>&) {
  Lagrangian L;
  L.dim = 1;
  L.p = 2.0;
  L.structure = Structure::general;
  L.claims_convex_in_xi = true;
  L.claims_delta2 = false;  // doubling near the pole at t = 0 has no uniform C
  L.vanishes_at_zero = false;  // f(x, t, 0) = 1/(4 t^2) away from t = 0
  L.domain = interval(0.0, 1.0);
  L.bc = {0.0, 1.0};
  linear_datum(L);
  L.eval = [](const double*, double t, const double* xi) {
    if (t == 0.0) return 0.0;
    const double d = xi[0] - 1.0 / (2.0 * t);
    return d * d;
  };
  L.singular_profile = [](double x) { return std::sqrt(x); };
  L.reference = "Cerf and Mariconda";
  return L;
}

Lagrangian build_variable_exponent(const std::map<std::string, double>&) {
  Lagrangian L;
  L.dim = 1;
  L.p = 2.0;
  L.structure = Structure::isotropic;
  L.claims_convex_in_xi = true;
  L.vanishes_at_zero = true;
  L.domain = interval(0.0, 1.0);
  L.bc = {0.0, 1.0};
  linear_datum(L);
  L.eval = [](const double* x, double, const double* xi) {
    const double dx = std::fabs(x[0] - 0.5);
    const double r = dx == 0.0 ? 2.0 : 2.0 + 0.4 / std::log(kE + 1.0 / dx);
    return fpow(std::fabs(xi[0]), r);
  };
  L.t_independent = true;
  L.reference = "Zhikov variable exponent";
  return L;
}

Lagrangian build_double_phase(const std::map<std::string, double>& prm) {
  const double p = get(prm, "p"), q = get(prm, "q");
  const double kappa = get(prm, "kappa"), b_amp = get(prm, "b_amp");
  const int dim = static_cast<int>(get(prm, "dim"));
  if (!(p >= 1.0) || q < p) throw invalid_argument("double_phase: need 1 <= p <= q");
  if (kappa < 0.0 || b_amp < 0.0)
    throw invalid_argument("double_phase: kappa and b_amp must be nonnegative");
  if (dim != 1 && dim != 2) throw invalid_argument("double_phase: dim must be 1 or 2");
  Lagrangian L;
  L.dim = dim;
  L.p = p;
  L.structure = Structure::isotropic;
  L.claims_convex_in_xi = true;
  L.vanishes_at_zero = true;
  if (dim == 1) {
    L.domain = interval(0.0, 1.0);
    L.bc = {0.0, 1.0};
    linear_datum(L);
  } else {
    L.domain = box2(-1.0, 1.0);
    zero_datum(L);
  }
  L.eval = [p, q, kappa, b_amp, dim](const double* x, double t, const double* xi) {
    const double n = norm(xi, dim);
    const double a = fpow(norm(x, dim), kappa);
    const double b = 1.0 + b_amp * t * t / (1.0 + t * t);
    return b * (fpow(n, p) + a * fpow(n, q));
  };
  L.t_independent = b_amp == 0.0;
  L.reference = "Zhikov double phase";
  return L;
}

Lagrangian build_orlicz_two_phase(const std::map<std::string, double>& prm) {
  const double gamma = get(prm, "gamma");
  if (gamma <= 1.0) throw invalid_argument("orlicz_two_phase: need gamma > 1");
  Lagrangian L;
  L.dim = 1;
  L.p = 1.0;
  L.structure = Structure::isotropic;
  L.claims_convex_in_xi = true;
  L.vanishes_at_zero = true;
  L.domain = interval(0.0, 1.0);
  L.bc = {0.0, 1.0};
  linear_datum(L);
  const double wexp = L.dim * (gamma - 1.0);
  L.eval = [gamma, wexp](const double* x, double, const double* xi) {
    const double n = std::fabs(xi[0]);
    const double psi = n * std::log1p(n);
    return psi + fpow(std::fabs(x[0]), wexp) * fpow(psi, gamma);
  };
  L.t_independent = true;
  L.reference = "Orlicz two phase";
  return L;
}

Lagrangian build_orlicz_general(const std::map<std::string, double>& prm) {
  const double kappa = get(prm, "kappa");
  if (kappa < 0.0) throw invalid_argument("orlicz_general: kappa must be nonnegative");
  Lagrangian L;
  L.dim = 1;
  L.p = 2.0;
  L.structure = Structure::isotropic;
  L.claims_convex_in_xi = true;
  L.vanishes_at_zero = true;
  L.domain = interval(0.0, 1.0);
  L.bc = {0.0, 1.0};
  linear_datum(L);
  L.eval = [kappa](const double* x, double, const double* xi) {
    const double n = std::fabs(xi[0]);
    return n * n + fpow(std::fabs(x[0]), kappa) * n * n * std::log1p(n);
  };
  L.t_independent = true;
  L.reference = "generalized Orlicz";
  return L;
}

Lagrangian build_exp_phase(const std::map<std::string, double>& prm) {
  const double p = get(prm, "p"), q = get(prm, "q");
  if (!(p >= 1.0) || !(q > 0.0) || q >= 1.0)
    throw invalid_argument("exp_phase: need p >= 1 and 0 < q < 1");
  Lagrangian L;
  L.dim = 1;
  L.p = p;
  L.structure = Structure::isotropic;
  L.claims_convex_in_xi = false;  // exp(|xi|^q) with q < 1 dips below its chords
  L.claims_delta2 = false;        // exp tail squares under doubling
  L.vanishes_at_zero = false;     // the weight keeps f(x, t, 0) > 0
  L.domain = interval(0.0, 1.0);
  L.bc = {0.0, 1.0};
  linear_datum(L);
  L.eval = [p, q](const double* x, double, const double* xi) {
    const double n = std::fabs(xi[0]);
    const double a = 0.5 + 0.25 * x[0];
    return fpow(n, p) + a * std::exp(fpow(n, q));
  };
  L.t_independent = true;
  L.reference = "exponential phase";
  return L;
}

Lagrangian build_exp_phase_convex(const std::map<std::string, double>& prm) {
  const double p = get(prm, "p"), q = get(prm, "q");
  if (!(p >= 1.0) || !(q > 0.0) || q >= 1.0)
    throw invalid_argument("exp_phase_convex: need p >= 1 and 0 < q < 1");
  // Tangent from the origin touches s -> exp(s^q) at s = q^(-1/q); replacing
  // the arc below the tangency by the tangent line gives a convex minorant
  // within the additive constant exp(1/q).
  const double rstar = fpow(q, -1.0 / q);
  const double slope = std::exp(1.0 / q) / rstar;
  Lagrangian L;
  L.dim = 1;
  L.p = p;
  L.structure = Structure::isotropic;
  L.claims_convex_in_xi = true;
  L.claims_delta2 = false;  // exp tail squares under doubling
  L.vanishes_at_zero = true;
  L.domain = interval(0.0, 1.0);
  L.bc = {0.0, 1.0};
  linear_datum(L);
  L.eval = [p, q, rstar, slope](const double* x, double, const double* xi) {
    const double n = std::fabs(xi[0]);
    const double a = 0.5 + 0.25 * x[0];
    const double g = n <= rstar ? slope * n : std::exp(fpow(n, q));
    return fpow(n, p) + a * g;
  };
  L.t_independent = true;
  L.reference = "exponential phase, convex splice";
  return L;
}

Lagrangian build_anisotropic(const std::map<std::string, double>& prm) {
  const double gamma = get(prm, "gamma");
  if (gamma < 1.0) throw invalid_argument("anisotropic: need gamma >= 1");
  Lagrangian L;
  L.dim = 2;
  L.p = 2.0 / gamma;
  L.structure = Structure::general;
  L.claims_convex_in_xi = true;
  L.vanishes_at_zero = true;
  L.domain = box2(-1.0, 1.0);
  zero_datum(L);
  const double lexp = 2.0 / gamma;
  L.eval = [gamma, lexp](const double* x, double, const double* xi) {
    const double ang = fpow(std::fabs(x[0]), gamma);
    const double ip = std::cos(ang) * xi[0] + std::sin(ang) * xi[1];
    return ip * ip + fpow(norm(xi, 2), lexp);
  };
  L.t_independent = true;
  L.reference = "rotating anisotropy";
  return L;
}

Lagrangian build_counterexample(const std::map<std::string, double>&) {
  Lagrangian L;
  L.dim = 2;
  L.p = 1.0;
  L.structure = Structure::general;
  L.claims_convex_in_xi = true;
  L.vanishes_at_zero = true;
  L.domain = box2(-1.0, 1.0);
  zero_datum(L);
  L.eval = [](const double* x, double, const double* xi) {
    const double ip = x[0] * xi[0] + x[1] * xi[1];
    return ipow(ip, 4) + norm(xi, 2);
  };
  L.t_independent = true;
  L.reference = "sharpness example";
  return L;
}

Lagrangian build_orthotropic(const std::map<std::string, double>& prm) {
  const double kappa = get(prm, "kappa"), q = get(prm, "q");
  if (kappa < 0.0 || q < 2.0) throw invalid_argument("orthotropic: need kappa >= 0, q >= 2");
  Lagrangian L;
  L.dim = 2;
  L.p = 2.0;
  L.structure = Structure::orthotropic;
  L.claims_convex_in_xi = true;
  L.vanishes_at_zero = true;
  L.domain = box2(-1.0, 1.0);
  zero_datum(L);
  L.eval = [kappa, q](const double* x, double, const double* xi) {
    const double w = fpow(norm(x, 2), kappa);
    double acc = 0.0;
    for (int i = 0; i < 2; ++i) acc += xi[i] * xi[i] + w * fpow(std::fabs(xi[i]), q);
    return acc;
  };
  L.t_independent = true;
  L.reference = "orthotropic power growth";
  return L;
}

Lagrangian build_multi_phase(const std::map<std::string, double>&) {
  Lagrangian L;
  L.dim = 1;
  L.p = 2.0;
  L.structure = Structure::isotropic;
  L.claims_convex_in_xi = true;
  L.vanishes_at_zero = true;
  L.domain = interval(-1.0, 1.0);
  L.bc = {0.0, 1.0};
  linear_datum(L);
  L.eval = [](const double* x, double, const double* xi) {
    const double n = std::fabs(xi[0]);
    const double ax = std::fabs(x[0]);
    return n * n + fpow(ax, 0.2) * fpow(n, 2.3) + fpow(ax, 0.3) * fpow(n, 2.5);
  };
  L.t_independent = true;
  L.reference = "multi phase";
  return L;
}

Lagrangian build_dirichlet(const std::map<std::string, double>&) {
  Lagrangian L;
  L.dim = 1;
  L.p = 2.0;
  L.structure = Structure::isotropic;
  L.claims_convex_in_xi = true;
  L.vanishes_at_zero = true;
  L.domain = interval(0.0, 1.0);
  L.bc = {0.0, 1.0};
  linear_datum(L);
  L.eval = [](const double*, double, const double* xi) { return xi[0] * xi[0]; };
  L.t_independent = true;
  L.reference = "quadratic reference";
  return L;
}

const std::vector<std::pair<std::string, Entry>>& table() {
  static const std::vector<std::pair<std::string, Entry>> t = {
      {"mania",
       {"(t^3 - x)^2 xi^6 on (0,1), u(0)=0, u(1)=1", {}, &build_mania}},
      {"ball_mizel",
       {"(x^4 - t^6)^2 |xi|^27 + nu xi^2 on (-1,1), u(-1)=-0.5, u(1)=0.5",
        {{"nu", 1.0}},
        &build_ball_mizel}},
      {"cerf_mariconda",
       {"(xi - 1/(2t))^2, value 0 at t=0, on (0,1), u(0)=0, u(1)=1",
        {},
        &build_cerf_mariconda}},
      {"variable_exponent",
       {"|xi|^r(x), r = 2 + 0.4/log(e + 1/|x - 0.5|), on (0,1)",
        {},
        &build_variable_exponent}},
      {"double_phase",
       {"b(t) (|xi|^p + |x|^kappa |xi|^q), b = 1 + b_amp t^2/(1+t^2), dim 1 or 2",
        {{"p", 2.0}, {"q", 2.5}, {"kappa", 0.25}, {"b_amp", 0.0}, {"dim", 1.0}},
        &build_double_phase}},
      {"orlicz_two_phase",
       {"psi(|xi|) + |x|^(gamma-1) psi(|xi|)^gamma, psi(s) = s log(1+s)",
        {{"gamma", 1.5}},
        &build_orlicz_two_phase}},
      {"orlicz_general",
       {"|xi|^2 + |x|^kappa |xi|^2 log(1+|xi|)", {{"kappa", 0.5}}, &build_orlicz_general}},
      {"exp_phase",
       {"|xi|^p + (0.5 + 0.25 x) exp(|xi|^q)", {{"p", 2.0}, {"q", 0.5}}, &build_exp_phase}},
      {"exp_phase_convex",
       {"|xi|^p + (0.5 + 0.25 x) g(|xi|), g = tangent-line splice of exp(s^q)",
        {{"p", 2.0}, {"q", 0.5}},
        &build_exp_phase_convex}},
      {"anisotropic",
       {"<v(x), xi>^2 + |xi|^(2/gamma), v = (cos|x1|^gamma, sin|x1|^gamma), on (-1,1)^2",
        {{"gamma", 2.0}},
        &build_anisotropic}},
      {"counterexample",
       {"<x, xi>^4 + |xi| on (-1,1)^2", {}, &build_counterexample}},
      {"orthotropic",
       {"sum_i xi_i^2 + |x|^kappa |xi_i|^q on (-1,1)^2",
        {{"kappa", 0.25}, {"q", 2.5}},
        &build_orthotropic}},
      {"multi_phase",
       {"|xi|^2 + |x|^0.2 |xi|^2.3 + |x|^0.3 |xi|^2.5 on (-1,1)", {}, &build_multi_phase}},
      {"dirichlet",
       {"|xi|^2 on (0,1), u(0)=0, u(1)=1 (quadratic reference)", {}, &build_dirichlet}},
  };
  return t;
}

const Entry& lookup(const std::string& name) {
  for (const auto& [n, e] : table())
    if (n == name) return e;
  throw invalid_argument("unknown catalog problem: " + name);
}

}  // namespace

std::vector<std::string> catalog_names() {
  std::vector<std::string> out;
  out.reserve(table().size());
  for (const auto& [n, e] : table()) out.push_back(n);
  return out;
}

std::string catalog_describe(const std::string& name) { return lookup(name).describe; }

Lagrangian make_lagrangian(const std::string& name,
                           const std::map<std::string, double>& overrides) {
  const Entry& e = lookup(name);
  std::map<std::string, double> prm = e.defaults;
  for (const auto& [k, v] : overrides) {
    if (prm.find(k) == prm.end())
      throw invalid_argument(name + ": unknown parameter " + k);
    prm[k] = v;
  }
  Lagrangian L = e.build(prm);
  L.name = name;
  L.params = prm;
  return L;
}

Lagrangian make_double_phase(double p, double q, double kappa,
                             std::function<double(const double*)> weight, int dim) {
  Lagrangian L = make_lagrangian(
      "double_phase",
      {{"p", p}, {"q", q}, {"kappa", kappa}, {"dim", static_cast<double>(dim)}});
  if (weight) {
    L.eval = [p, q, dim, weight](const double* x, double, const double* xi) {
      const double n = norm(xi, dim);
      return fpow(n, p) + weight(x) * fpow(n, q);
    };
    L.name = "double_phase_custom_weight";
  }
  return L;
}

}  // namespace lavlab
