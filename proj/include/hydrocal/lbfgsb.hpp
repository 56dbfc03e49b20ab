#pragma once

#include <functional>
#include <string>
#include <vector>

namespace hydrocal {

struct LbfgsbOptions {
  int memory = 10;
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;   // inf-norm of the projected gradient
  double relative_f_tolerance = 1e-8; // relative decrease between accepted iterates
  int max_line_search_steps = 40;
};

struct LbfgsbIterate {
  int iteration;
  double f;
  double projected_gradient_norm;
};

struct LbfgsbResult {
  std::vector<double> x;
  double f = 0;
  int iterations = 0;
  std::string stop_reason;
  std::vector<LbfgsbIterate> history;
};

/// Objective: f(x) with gradient written into grad (same size as x).
using BoxObjective = std::function<double(const std::vector<double>&, std::vector<double>&)>;

/// Projected-gradient limited-memory quasi-Newton over a box. Iterates stay
/// within [lower, upper]; curvature pairs with tiny sᵀy are skipped.
LbfgsbResult lbfgsb_minimize(const BoxObjective& objective, std::vector<double> x0,
                             const std::vector<double>& lower, const std::vector<double>& upper,
                             const LbfgsbOptions& options = {});

}  // namespace hydrocal
