#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lavlab/lagrangian.hpp"

namespace lavlab {

// One-dimensional mesh given by its node list.
struct Mesh1D {
  std::vector<double> nodes;

  std::size_t cells() const { return nodes.empty() ? 0 : nodes.size() - 1; }

  static Mesh1D uniform(double a, double b, int n);
  // Nodes a + (b - a) (i / n)^beta: cells cluster at a for beta > 1.
  static Mesh1D graded(double a, double b, int n, double beta);
  // Cells cluster on both sides of the interior point x0.
  static Mesh1D graded_at(double a, double b, int n, double beta, double x0);
  static Mesh1D from_nodes(std::vector<double> nodes);
};

// Piecewise linear function on strictly increasing nodes. Evaluation clamps
// to the end values outside the node range.
struct PLFunction {
  std::vector<double> nodes;
  std::vector<double> values;

  double eval(double x) const;
  // Exact integral of |this - other| over [lo, hi] (defaults to the overlap
  // of the two node ranges): the difference is linear between merged nodes,
  // and sign changes are split exactly.
  double l1_distance(const PLFunction& other) const;
  double l1_distance(const PLFunction& other, double lo, double hi) const;
  PLFunction restricted(double lo, double hi) const;
  std::string to_csv() const;  // header "node,value"
  void validate() const;
};

PLFunction interpolate(const std::function<double(double)>& fn, const Mesh1D& mesh);

// Integral of f(x, u(x), u'(x)) over the mesh underlying u, cell by cell with
// Gauss-Legendre quadrature. Exact to rounding for integrands that are
// polynomials of degree <= 2 quad_order - 1 on each cell.
double energy(const Lagrangian& L, const PLFunction& u, int quad_order = 5);

// Cyclic coordinate descent over interior nodal values with a scan plus
// golden-section line search per node. Monotone: the energy never increases.
// init holds nodal values (empty: linear between the boundary data); a
// non-finite initial energy is an input error. restarts > 0 adds perturbed
// starts seeded from seed; the best final energy wins.
PLFunction minimize_energy(const Lagrangian& L, const Mesh1D& mesh, const BoundaryData& bc,
                           const std::vector<double>& init, int iters, int restarts,
                           std::uint64_t seed = 0, int quad_order = 5);

// Energy of a fixed scalar field on a tensor grid, bilinear per cell.
double energy_box2(const Lagrangian& L, const std::vector<double>& gx,
                   const std::vector<double>& gy,
                   const std::function<double(double, double)>& u, int quad_order = 5);

}  // namespace lavlab
