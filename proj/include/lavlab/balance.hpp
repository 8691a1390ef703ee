#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lavlab/convex.hpp"
#include "lavlab/lagrangian.hpp"

namespace lavlab {

// The four shapes of balance inequality the checker probes. Each pairs an
// admissibility antecedent on (x, t, xi, eps) with a bound that the value
// f(x, t, xi) must not outrun as eps shrinks.
enum class Condition { hiso0, hiso, hd2, hconv };

enum class Verdict { satisfied, violated, inconclusive };

std::string condition_name(Condition c);
std::string verdict_name(Verdict v);
Condition parse_condition(const std::string& name);

// Sweep configuration. Empty grids are filled with the documented defaults
// before the run, and the filled values are echoed in the report.
struct ConditionSpec {
  Condition condition = Condition::hiso0;
  double k1 = 1.0;  // half-width of the t range
  double k2 = 1.0;  // balance constant in the antecedent
  std::vector<double> eps;                   // default: diam * 2^-k, k = 1..10
  std::vector<std::vector<double>> x_points; // default: uniform per-axis tensor grid
  std::vector<double> t_grid;                // default: 17 uniform in [-k1, k1]
  std::vector<std::vector<double>> xi_probes;  // default: structure-based targets
  int ball_samples = 257;
  int radial_points = 513;
  double ratio_cap = 1e6;
  double slope_satisfied = -0.1;
  double slope_violated = -0.5;
  int threads = 1;  // 0 means hardware concurrency
};

// A sample whose ratio exceeded the cap.
struct Witness {
  std::vector<double> x;
  double t = 0.0;
  std::vector<double> xi;
  double eps = 0.0;
  double f = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
};

struct EpsRow {
  double eps = 0.0;
  double sup_ratio = 0.0;
  std::size_t admissible = 0;
  std::size_t total = 0;
};

struct BalanceReport {
  std::string problem;
  ConditionSpec spec;
  Verdict verdict = Verdict::inconclusive;
  double c_est = 0.0;  // largest observed ratio
  double slope = 0.0;  // log-log trend of sup ratio against eps
  std::vector<EpsRow> table;
  std::vector<Witness> witnesses;
  std::vector<std::string> notes;
};

// Sampled infimum of f(., t, xi) over the closed ball B(x, eps) intersected
// with the domain. Sample sets nest along radius-halving chains, so the
// result is monotone under eps -> eps/2. The sampled value never falls below
// the true infimum. Throws domain_error when the intersection is empty.
double inf_over_ball(const Lagrangian& L, const std::vector<double>& x, double eps,
                     double t, const std::vector<double>& xi, int ball_samples = 257);

// Convex minorant of s -> inf_over_ball at xi = s * e_axis, s in a geometric
// grid on [0, s_cap]. axis -1 picks the first axis, valid for isotropic
// integrands; orthotropic integrands need an explicit axis; general structure
// is unsupported.
ConvexEnvelope radial_envelope(const Lagrangian& L, const std::vector<double>& x,
                               double eps, double t, double s_cap,
                               int ball_samples = 257, int grid_points = 513,
                               int axis = -1);

// One-homogeneous lift of the localized convex envelope, evaluated at
// q = (qx, qt) with qt <= 0. Exactly zero at qx = 0 when the integrand
// vanishes at xi = 0.
double F_eps(const Lagrangian& L, const std::vector<double>& x, double eps, double t,
             const std::vector<double>& qx, double qt, int ball_samples = 257,
             int grid_points = 513);

// Runs the sweep for spec.condition and classifies the outcome. For general
// structure under hconv the bound is a certified upper envelope, so that mode
// never reports SATISFIED.
BalanceReport check_condition(const Lagrangian& L, const ConditionSpec& spec);

// For an isotropic integrand, probes the convexified condition that the
// isotropic one implies: an hconv sweep with the radial envelope as bound.
BalanceReport check_iso_implies_conv(const Lagrangian& L, ConditionSpec spec);

// Sampled sup of f over the domain times [-t_cap, t_cap] times {|xi|_inf <=
// xi_cap}, on uniform grids. A lower bound of the true sup; grids refine with
// points_per_axis.
double max_over_bounded_set(const Lagrangian& L, double t_cap, double xi_cap,
                            int points_per_axis = 65);

std::string balance_report_json(const BalanceReport& report);
std::string balance_report_csv(const BalanceReport& report);

}  // namespace lavlab
