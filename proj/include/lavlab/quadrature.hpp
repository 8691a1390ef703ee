#pragma once

#include <functional>
#include <vector>

namespace lavlab {

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
// Exact for polynomials of degree <= 2n - 1. order must be >= 1.
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const QuadRule& gauss_legendre_rule(int order);

double gauss_legendre(const std::function<double(double)>& fn, double a, double b,
                      int order = 5);

}  // namespace lavlab
