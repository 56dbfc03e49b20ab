#include <algorithm>
#include <cmath>
#include <deque>

#include "hydrocal/error.hpp"
#include "hydrocal/lbfgsb.hpp"

namespace hydrocal {

namespace {

void project(std::vector<double>& x, const std::vector<double>& lo, const std::vector<double>& hi) {
  for (size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

double projected_gradient_norm(const std::vector<double>& x, const std::vector<double>& g,
                               const std::vector<double>& lo, const std::vector<double>& hi) {
  double norm = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double step = std::clamp(x[i] - g[i], lo[i], hi[i]) - x[i];
    norm = std::max(norm, std::abs(step));
  }
  return norm;
}

}  // namespace

LbfgsbResult lbfgsb_minimize(const BoxObjective& objective, std::vector<double> x,
                             const std::vector<double>& lower, const std::vector<double>& upper,
                             const LbfgsbOptions& options) {
  const size_t n = x.size();
  if (lower.size() != n || upper.size() != n)
    fail(ErrorCode::InvalidArgument, "bounds size mismatch");
  project(x, lower, upper);

  std::vector<double> g(n), g_new(n);
  double f = objective(x, g);

  std::deque<std::vector<double>> s_list, y_list;
  std::deque<double> rho_list;

  LbfgsbResult result;
  result.history.push_back({0, f, projected_gradient_norm(x, g, lower, upper)});

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const double pg = projected_gradient_norm(x, g, lower, upper);
    if (pg < options.gradient_tolerance) {
      result.stop_reason = "gradient_norm";
      break;
    }

    // Two-loop recursion on the free-space gradient; variables pinned at an
    // active bound with an inward-pointing gradient move along -g only.
    std::vector<double> q = g;
    std::vector<double> alpha(s_list.size());
    for (int k = static_cast<int>(s_list.size()) - 1; k >= 0; --k) {
      double dot = 0;
      for (size_t i = 0; i < n; ++i) dot += s_list[k][i] * q[i];
      alpha[k] = rho_list[k] * dot;
      for (size_t i = 0; i < n; ++i) q[i] -= alpha[k] * y_list[k][i];
    }
    double gamma = 1.0;
    if (!s_list.empty()) {
      double sy = 0, yy = 0;
      for (size_t i = 0; i < n; ++i) {
        sy += s_list.back()[i] * y_list.back()[i];
        yy += y_list.back()[i] * y_list.back()[i];
      }
      if (yy > 0) gamma = sy / yy;
    }
    for (size_t i = 0; i < n; ++i) q[i] *= gamma;
    for (size_t k = 0; k < s_list.size(); ++k) {
      double dot = 0;
      for (size_t i = 0; i < n; ++i) dot += y_list[k][i] * q[i];
      const double beta = rho_list[k] * dot;
      for (size_t i = 0; i < n; ++i) q[i] += s_list[k][i] * (alpha[k] - beta);
    }
    std::vector<double> direction(n);
    for (size_t i = 0; i < n; ++i) direction[i] = -q[i];

    // Fall back to steepest descent when the quasi-Newton step is uphill.
    double descent = 0;
    for (size_t i = 0; i < n; ++i) descent += direction[i] * g[i];
    if (descent >= 0) {
      for (size_t i = 0; i < n; ++i) direction[i] = -g[i];
    }

    // Backtracking Armijo search along the projected path.
    double step = 1.0;
    std::vector<double> x_new(n);
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < options.max_line_search_steps; ++ls) {
      for (size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * direction[i];
      project(x_new, lower, upper);
      double gdx = 0;
      for (size_t i = 0; i < n; ++i) gdx += g[i] * (x_new[i] - x[i]);
      if (gdx < 0) {
        f_new = objective(x_new, g_new);
        if (f_new <= f + 1e-4 * gdx) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.stop_reason = "line_search_failed";
      break;
    }

    std::vector<double> s(n), yv(n);
    double sy = 0;
    for (size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      yv[i] = g_new[i] - g[i];
      sy += s[i] * yv[i];
    }
    if (sy > 1e-10) {
      s_list.push_back(std::move(s));
      y_list.push_back(std::move(yv));
      rho_list.push_back(1.0 / sy);
      if (static_cast<int>(s_list.size()) > options.memory) {
        s_list.pop_front();
        y_list.pop_front();
        rho_list.pop_front();
      }
    }

    const double decrease = (f - f_new) / std::max(1.0, std::abs(f));
    x = x_new;
    g = g_new;
    f = f_new;
    result.iterations = iter;
    result.history.push_back({iter, f, projected_gradient_norm(x, g, lower, upper)});
    if (decrease >= 0 && decrease < options.relative_f_tolerance) {
      result.stop_reason = "f_decrease";
      break;
    }
  }
  if (result.stop_reason.empty())
    result.stop_reason = result.iterations >= options.max_iterations ? "max_iterations"
                                                                     : "gradient_norm";
  result.x = std::move(x);
  result.f = f;
  return result;
}

}  // namespace hydrocal
