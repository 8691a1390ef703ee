#pragma once

#include <map>
#include <string>
#include <vector>

#include "lavlab/lagrangian.hpp"

namespace lavlab {

// Names of the built-in problems, in stable listing order.
std::vector<std::string> catalog_names();

// One-line description: formula sketch plus default parameters.
std::string catalog_describe(const std::string& name);

// Builds a catalog problem. Overrides replace default parameter values;
// unknown names or out-of-range values raise invalid_argument.
Lagrangian make_lagrangian(const std::string& name,
                           const std::map<std::string, double>& overrides = {});

// Double-phase builder with an arbitrary nonnegative weight in front of the
// q-term; a null weight means |x|^kappa. Requires 1 <= p <= q.
Lagrangian make_double_phase(double p, double q, double kappa,
                             std::function<double(const double*)> weight = nullptr,
                             int dim = 1);

}  // namespace lavlab
