#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace lavlab {

enum class Structure {
  general,      // arbitrary dependence on xi
  isotropic,    // depends on xi through |xi| only
  orthotropic,  // sum of one-variable terms, one per axis
};

// Axis-aligned box domain with an optional Lipschitz boundary datum.
struct Domain {
  int dim = 1;
  std::vector<double> lo;
  std::vector<double> hi;
  std::function<double(const double*)> boundary_datum;  // optional
  double datum_rank = std::numeric_limits<double>::quiet_NaN();

  double diameter() const {
    double acc = 0.0;
    for (int i = 0; i < dim; ++i) acc += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(acc);
  }
  bool contains(const double* x, double pad = 0.0) const {
    for (int i = 0; i < dim; ++i)
      if (x[i] < lo[i] - pad || x[i] > hi[i] + pad) return false;
    return true;
  }
};

// Two-point boundary data for one-dimensional problems.
struct BoundaryData {
  double left = 0.0;
  double right = 0.0;
};

// An integrand f(x, t, xi) with the metadata the checkers and schemes need.
struct Lagrangian {
  std::string name;
  int dim = 1;        // dimension of x and xi
  double p = 1.0;     // lower growth exponent
  Structure structure = Structure::general;
  bool claims_convex_in_xi = true;
  bool claims_delta2 = true;     // f(x, t, 2 xi) <= C (f(x, t, xi) + 1)
  bool vanishes_at_zero = true;  // f(x, t, 0) == 0 everywhere
  bool t_independent = false;
  Domain domain;
  BoundaryData bc;  // meaningful for dim == 1 only
  std::function<double(const double* x, double t, const double* xi)> eval;
  // Known near-minimizing profile for dim == 1 problems, when one exists.
  std::function<double(double)> singular_profile;
  // Location of an interior gradient singularity of the profile, NaN if none
  // or if the singularity sits at the boundary.
  double singular_at = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, double> params;
  std::string reference;

  double eval1(double x, double t, double xi) const { return eval(&x, t, &xi); }
};

}  // namespace lavlab
