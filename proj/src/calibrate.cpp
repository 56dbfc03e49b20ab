#include <algorithm>
#include <cmath>
#include <limits>

#include "hydrocal/adjoint.hpp"
#include "hydrocal/calibrate.hpp"
#include "hydrocal/error.hpp"

namespace hydrocal {

namespace {

// Search-space scaling: log10 for the strictly positive capacities and time
// constants; the exchange coefficient spans zero, so its range is mapped
// linearly with a quarter-range worth of movement per "decade" of step.
double to_scale(int j, double value, const ParamBounds& bounds) {
  if (j == kMl) return 4.0 * (value - bounds.lower[j]) / (bounds.upper[j] - bounds.lower[j]);
  return std::log10(value);
}

double from_scale(int j, double z, const ParamBounds& bounds) {
  double v = j == kMl ? bounds.lower[j] + 0.25 * z * (bounds.upper[j] - bounds.lower[j])
                      : std::pow(10.0, z);
  return std::clamp(v, bounds.lower[j], bounds.upper[j]);
}

}  // namespace

UniformCalibration sbs_optimize(const ScalarObjective& objective, const ParamBounds& bounds,
                                const std::array<double, kNumParams>& initial,
                                const SbsOptions& options) {
  if (!bounds.contains(initial)) fail(ErrorCode::InvalidArgument, "initial point out of bounds");

  UniformCalibration result;
  result.theta = initial;

  std::array<double, kNumParams> z{}, z_lo{}, z_hi{};
  for (int j = 0; j < kNumParams; ++j) {
    z[j] = to_scale(j, initial[j], bounds);
    z_lo[j] = to_scale(j, bounds.lower[j], bounds);
    z_hi[j] = to_scale(j, bounds.upper[j], bounds);
  }

  auto eval = [&](const std::array<double, kNumParams>& zc,
                  std::array<double, kNumParams>& theta) {
    for (int j = 0; j < kNumParams; ++j) theta[j] = from_scale(j, zc[j], bounds);
    ++result.evaluations;
    return objective(theta);
  };

  result.cost = eval(z, result.theta);
  result.history.push_back({result.evaluations, result.cost.total, result.cost.jd, result.cost.jc,
                            result.cost.jf, result.cost.jreg, 0.0});

  // One full halving schedule; restarted from the incumbent at the initial
  // step while a whole schedule still improves (escapes shallow valleys).
  auto schedule = [&]() {
    double step = options.initial_step;
    while (step >= options.min_step && result.evaluations < options.max_evaluations) {
      bool improved_cycle = false;
      for (int j = 0; j < kNumParams && result.evaluations < options.max_evaluations; ++j) {
        for (double sign : {+1.0, -1.0}) {
          auto zc = z;
          zc[j] = std::clamp(z[j] + sign * step, z_lo[j], z_hi[j]);
          if (zc[j] == z[j]) continue;
          std::array<double, kNumParams> theta{};
          CostBreakdown c = eval(zc, theta);
          if (c.total < result.cost.total) {
            z = zc;
            result.theta = theta;
            result.cost = c;
            improved_cycle = true;
            result.history.push_back({result.evaluations, c.total, c.jd, c.jc, c.jf, c.jreg, 0.0});
            break;  // keep walking this direction next cycle
          }
        }
      }
      if (!improved_cycle) step *= 0.5;
    }
  };
  double previous = std::numeric_limits<double>::infinity();
  while (result.cost.total < previous * (1.0 - 1e-10) &&
         result.evaluations < options.max_evaluations) {
    previous = result.cost.total;
    schedule();
  }
  return result;
}

UniformCalibration calibrate_uniform(const DrainagePlan& plan, const Forcing& forcing,
                                     const Catchment& gauge, const CostConfig& config,
                                     const std::vector<double>& obs_mmh, const ParamBounds& bounds,
                                     const std::optional<std::array<double, kNumParams>>& initial,
                                     const SbsOptions& options) {
  const auto rainfall = gauge_rainfall_mmh(plan, forcing, gauge);
  ScalarObjective objective = [&](const std::array<double, kNumParams>& theta) {
    ParameterField field(plan.nrows, plan.ncols, theta);
    const StateField h0 = StateField::default_initial(field);
    const auto sim = simulate_gauge_mmh(plan, field, h0, forcing, gauge);
    return evaluate_cost(config, sim, obs_mmh, rainfall, /*smooth=*/false, /*jreg=*/0.0);
  };
  if (initial) return sbs_optimize(objective, bounds, *initial, options);

  // Deterministic multi-start from scaled-range fractions; best final wins.
  static constexpr double kStartFractions[][kNumParams] = {
      {0.5, 0.5, 0.5, 0.5, 0.5, 0.5},       {0.25, 0.25, 0.25, 0.25, 0.25, 0.25},
      {0.75, 0.75, 0.75, 0.75, 0.75, 0.75}, {0.25, 0.75, 0.25, 0.75, 0.25, 0.75},
      {0.75, 0.25, 0.75, 0.25, 0.75, 0.25},
  };
  UniformCalibration best;
  bool have_best = false;
  for (const auto& fractions : kStartFractions) {
    std::array<double, kNumParams> start{};
    for (int j = 0; j < kNumParams; ++j) {
      const double z_lo = to_scale(j, bounds.lower[j], bounds);
      const double z_hi = to_scale(j, bounds.upper[j], bounds);
      start[j] = from_scale(j, z_lo + fractions[j] * (z_hi - z_lo), bounds);
    }
    UniformCalibration fit = sbs_optimize(objective, bounds, start, options);
    if (!have_best || fit.cost.total < best.cost.total) {
      fit.evaluations += have_best ? best.evaluations : 0;
      best = std::move(fit);
      have_best = true;
    } else {
      best.evaluations += fit.evaluations;
    }
  }
  return best;
}

DistributedCalibration vda_optimize(const DrainagePlan& plan, const Forcing& forcing,
                                    const Catchment& gauge, CostConfig config,
                                    const std::vector<double>& obs_mmh,
                                    const std::array<double, kNumParams>& background,
                                    const ParamBounds& bounds, const LbfgsbOptions& options) {
  const size_t n_cells = plan.cell_count();
  const ParameterField background_field(plan.nrows, plan.ncols, background);
  const StateField h0 = StateField::default_initial(background_field);

  DistributedCalibration result;
  result.background = background;

  std::vector<double> x0(kNumParams * n_cells), lo(x0.size()), hi(x0.size());
  for (int j = 0; j < kNumParams; ++j)
    for (size_t i = 0; i < n_cells; ++i) {
      const size_t k = static_cast<size_t>(j) * n_cells + i;
      x0[k] = background[j];
      lo[k] = bounds.lower[j];
      hi[k] = bounds.upper[j];
    }

  int evaluation = 0;
  BoxObjective objective = [&](const std::vector<double>& x, std::vector<double>& grad) {
    ParameterField theta(plan.nrows, plan.ncols, background);
    for (int j = 0; j < kNumParams; ++j)
      for (size_t i = 0; i < n_cells; ++i) theta[j][i] = x[static_cast<size_t>(j) * n_cells + i];
    AdjointResult adj =
        gradient(plan, theta, h0, forcing, gauge, config, obs_mmh, &background_field);
    double gmax = 0;
    for (int j = 0; j < kNumParams; ++j)
      for (size_t i = 0; i < n_cells; ++i) {
        const double g = adj.gradient[j][i];
        grad[static_cast<size_t>(j) * n_cells + i] = g;
        gmax = std::max(gmax, std::abs(g));
      }
    ++evaluation;
    result.history.push_back({evaluation, adj.breakdown.total, adj.breakdown.jd,
                              adj.breakdown.jc, adj.breakdown.jf, adj.breakdown.jreg, gmax});
    result.cost = adj.breakdown;
    return adj.breakdown.total;
  };

  LbfgsbResult inner = lbfgsb_minimize(objective, x0, lo, hi, options);
  result.iterations = inner.iterations;
  result.stop_reason = inner.stop_reason;
  result.background_cost = result.history.empty() ? 0.0 : result.history.front().total;

  result.theta = ParameterField(plan.nrows, plan.ncols, background);
  for (int j = 0; j < kNumParams; ++j)
    for (size_t i = 0; i < n_cells; ++i)
      result.theta[j][i] = inner.x[static_cast<size_t>(j) * n_cells + i];
  // Re-evaluate at the accepted minimizer so the reported breakdown matches it.
  {
    std::vector<double> scratch(inner.x.size());
    objective(inner.x, scratch);
    result.history.pop_back();  // bookkeeping re-evaluation, not a new iterate
    --evaluation;
  }
  return result;
}

MultiObjectiveCalibration calibrate_multiobjective(
    const DrainagePlan& plan, const Forcing& forcing, const Catchment& gauge,
    const std::vector<CostConfig>& objectives, const std::vector<double>& obs_mmh, uint64_t seed,
    const ParamBounds& bounds, const NsgaOptions& options, size_t constrained) {
  if (objectives.empty()) fail(ErrorCode::InvalidArgument, "no objectives given");
  const auto rainfall = gauge_rainfall_mmh(plan, forcing, gauge);

  MultiObjective multi = [&](const std::vector<double>& genes) {
    std::array<double, kNumParams> theta{};
    std::copy_n(genes.begin(), kNumParams, theta.begin());
    ParameterField field(plan.nrows, plan.ncols, theta);
    const StateField h0 = StateField::default_initial(field);
    const auto sim = simulate_gauge_mmh(plan, field, h0, forcing, gauge);
    std::vector<double> values;
    values.reserve(objectives.size());
    for (const auto& config : objectives)
      values.push_back(evaluate_cost(config, sim, obs_mmh, rainfall).total);
    return values;
  };

  std::vector<double> lo(bounds.lower.begin(), bounds.lower.end());
  std::vector<double> hi(bounds.upper.begin(), bounds.upper.end());

  MultiObjectiveCalibration result;
  result.front =
      nsga_optimize(multi, static_cast<int>(objectives.size()), lo, hi, seed, options);
  std::vector<std::vector<double>> points;
  points.reserve(result.front.solutions.size());
  for (const auto& s : result.front.solutions) points.push_back(s.objectives);
  result.selected = saw_select(points, constrained);
  return result;
}

}  // namespace hydrocal
