#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lavlab/lagrangian.hpp"
#include "lavlab/mesh.hpp"

namespace lavlab {

// Mollifier with unit mass and compact support. The factories precompute the
// cumulative table, the sup and the total variation used by the Lipschitz
// certificates.
struct Kernel {
  std::function<double(double)> rho;
  double lo = -1.0;
  double hi = 1.0;
  double sup = 0.0;
  double l1_drho = 0.0;  // total variation of rho

  // Smooth even bump on (-1, 1).
  static Kernel centered();
  // Support on (1/4, 3/4): smoothing at x draws only on points left of x.
  static Kernel decentered_left();
  // Support on (-3/4, -1/4): draws only on points right of x.
  static Kernel decentered_right();

  double mass(int panels = 64) const;  // independent quadrature of rho
  double cdf(double s) const;          // integral of rho over (lo, s]

 private:
  std::vector<double> cum_;    // cumulative mass at panel boundaries
  double panel_width_ = 0.0;
  void build_table();
};

// Piecewise linear target on an extended interval Lambda = (a - margin,
// b + margin). Outside [a, b] the profile continues along the boundary datum
// of the problem, shifted to match the trace.
struct MonotoneTarget {
  PLFunction pl;       // on Lambda
  double a = 0.0;
  double b = 1.0;
  double margin = 0.0;
  double m_bound = 0.0;  // sup of |pl| over Lambda
  bool monotone = true;  // nondecreasing node values
  bool clamped = false;  // whether monotone projection changed the samples

  // Samples fn on a cosine-graded core plus uniform margin pieces. With
  // clamp_monotone the nodal values are projected to a nondecreasing
  // sequence and the change is recorded.
  static MonotoneTarget build(const Lagrangian& L, const std::function<double(double)>& fn,
                              double margin, int n_core = 8192, int n_margin = 256,
                              bool clamp_monotone = true);
  // Wraps an explicit profile without any monotonicity enforcement.
  static MonotoneTarget from_pl(PLFunction pl, double a, double b, double margin);
};

double indicator_subgraph(const MonotoneTarget& target, double x, double t);

// Slack profile alpha: positive, strictly decreasing, integrable. The decay
// rate -alpha' is tabulated on [-M, M] and continued by exact exponential
// tails; on the table the rate never falls below the baseline c0.
struct SlackFunction {
  double M = 1.0;
  double c0 = 1.0;
  std::vector<double> grid;      // uniform on [-M, M]
  std::vector<double> neg_ap;    // tabulated -alpha'
  std::vector<double> alpha_tab; // alpha on the grid, alpha(M) = c0

  double value(double t) const;
  double rate(double t) const;  // -alpha'(t)
  double sup_norm() const;      // limit of alpha at -infinity
  double c_m() const { return c0; }  // certified minimal rate on [-M, M]
  double tail_threshold(double tol = 1e-6) const;
};

// Rate built from the level crossings of the target: at height t each
// crossing cell with slope m adds (f(z, t, m) + |m|^p) / |m| on top of the
// baseline c0.
SlackFunction build_alpha(const Lagrangian& L, const MonotoneTarget& target, double c0 = 1.0,
                          int grid_points = 8193);

// Mollified subgraph indicator plus slack: v(x, t) equals the kernel mass of
// {y : t <= target(x - eps y)} plus delta * alpha(t). Strictly decreasing in
// t for delta > 0, with values in [0, 1 + delta * sup alpha].
struct SubgraphField {
  MonotoneTarget target;
  Kernel kernel;
  SlackFunction alpha;
  double eps = 1.0;
  double delta = 0.0;

  double value(double x, double t) const;
  double m_s(double s) const;        // bracket half-width for the s-level set
  double rank_bound() const;         // Lipschitz bound for x -> inverse(x, s)
};

SubgraphField smooth_field(MonotoneTarget target, Kernel kernel, SlackFunction alpha,
                           double eps, double delta);

// Solves value(x, t) = s for t by bisection; s must lie in (0, 1).
double generalized_inverse(const SubgraphField& field, double x, double s);

struct ApproxResult {
  PLFunction u;
  double s = 0.5;
  double eps = 0.0;
  double delta = 0.0;
  double m_s = 0.0;           // certified sup bound
  double sup_measured = 0.0;
  double rank_bound = 0.0;    // certified Lipschitz constant
  double rank_measured = 0.0;
  bool sup_cert = false;
  bool rank_cert = false;
  bool coupling_cert = false;
  std::string fail_reason;
  double fail_x = 0.0;
  double fail_y = 0.0;  // violating node pair when a certificate fails

  bool ok() const { return sup_cert && rank_cert && coupling_cert; }
};

// Samples the s-level set of the smoothed field on a cosine-graded grid over
// [a, b] and certifies the sup bound, the Lipschitz bound and the monotone
// coupling inequality on deterministic probe triples.
ApproxResult approximate(const Lagrangian& L, const MonotoneTarget& target, const Kernel& kernel,
                         const SlackFunction& alpha, double eps, double delta, double s,
                         int out_nodes = 4097, int coupling_probes = 1000);

struct SchemeRow {
  int n = 0;
  double eps = 0.0;
  double delta = 0.0;
  double l1_error = 0.0;
  double rank = 0.0;
  double energy = 0.0;
  double target_energy = 0.0;
  bool sup_cert = false;
  bool rank_cert = false;
  bool coupling_cert = false;
};

struct SchemeReport {
  std::string problem;
  double s_used = 0.5;
  std::vector<SchemeRow> rows;
  std::vector<std::string> notes;

  bool all_certified() const;
};

// Runs the schedule eps_n = 2^-n, delta_n = 2^(-n/2) (delta capped so the
// slack stays below the probed level) for n = 1..steps with the centered
// kernel. Falls back across s in {0.5, 0.37, 0.61} if a certificate fails.
SchemeReport run_scheme(const Lagrangian& L, const std::function<double(double)>& target_fn,
                        int steps, int out_nodes = 4097, int quad_order = 16);

std::string scheme_report_csv(const SchemeReport& report);
std::string scheme_report_json(const SchemeReport& report);

struct BoundaryMatchReport {
  double s = 0.5;
  double eps = 0.0;
  double delta = 0.0;
  double band = 0.0;          // eps / 8
  double datum_rank = 0.0;    // Lipschitz constant of the boundary datum
  bool endpoint_exact = false;
  double max_band_deviation = 0.0;  // sup |u^s - datum| on the bands, before blending
  bool pre_truncation_ok = false;   // deviation <= datum_rank * eps
  double energy_delta = 0.0;        // |E(blended) - E(interior sample)|
  double k_bound = 0.0;             // bound constant: energy_delta <= k_bound * band
  bool cutoff_ok = false;
  PLFunction matched;
  std::vector<std::string> notes;

  bool ok() const { return endpoint_exact && pre_truncation_ok && cutoff_ok; }
};

// Matches the approximant to the boundary datum: decentered kernels make the
// field near each endpoint depend only on the datum extension, and a quintic
// ramp on a band of width eps / 8 pins the endpoint value exactly.
BoundaryMatchReport boundary_match(const Lagrangian& L, const MonotoneTarget& target, double eps,
                                   double delta, double s, int out_nodes = 4097);
BoundaryMatchReport boundary_match(const Lagrangian& L,
                                   const std::function<double(double)>& target_fn, double eps,
                                   double delta, double s, int out_nodes = 4097);

}  // namespace lavlab
