#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hydrocal/cost.hpp"
#include "hydrocal/lbfgsb.hpp"
#include "hydrocal/model.hpp"
#include "hydrocal/nsga.hpp"

namespace hydrocal {

struct CalibrationIterate {
  int iteration = 0;
  double total = 0, jd = 0, jc = 0, jf = 0, jreg = 0;
  double grad_norm = 0;  // inf-norm; 0 for derivative-free search
};

/// Full cost breakdown at a uniform parameter vector.
using ScalarObjective = std::function<CostBreakdown(const std::array<double, kNumParams>&)>;

struct SbsOptions {
  double initial_step = 0.64;  // decades on log-scaled coordinates
  double min_step = 0.01;
  int max_evaluations = 50000;
};

struct UniformCalibration {
  std::array<double, kNumParams> theta{};
  CostBreakdown cost;
  int evaluations = 0;
  std::vector<CalibrationIterate> history;  // accepted improvements
};

/// Cyclic coordinate search over log-scaled parameters (linear scale for the
/// sign-free exchange coefficient), halving the step when a full cycle fails
/// to improve. Monotone non-increasing best cost; deterministic.
UniformCalibration sbs_optimize(const ScalarObjective& objective, const ParamBounds& bounds,
                                const std::array<double, kNumParams>& initial,
                                const SbsOptions& options = {});

/// Uniform calibration of the gridded model at one gauge: builds the forward
/// objective (default initial state per candidate) and runs sbs_optimize from
/// `initial` (log-space bounds midpoint when absent).
UniformCalibration calibrate_uniform(const DrainagePlan& plan, const Forcing& forcing,
                                     const Catchment& gauge, const CostConfig& config,
                                     const std::vector<double>& obs_mmh,
                                     const ParamBounds& bounds = ParamBounds::defaults(),
                                     const std::optional<std::array<double, kNumParams>>& initial =
                                         std::nullopt,
                                     const SbsOptions& options = {});

struct DistributedCalibration {
  ParameterField theta;
  CostBreakdown cost;
  int iterations = 0;
  std::string stop_reason;
  std::vector<CalibrationIterate> history;  // one row per objective evaluation
  std::array<double, kNumParams> background{};
  double background_cost = 0;
};

/// Distributed variational calibration: limited-memory box-constrained descent
/// over the full parameter field with exact adjoint gradients, regularized
/// toward the uniform background. Initial state is fixed at the background
/// default so the gradient matches the simulated trajectory exactly.
DistributedCalibration vda_optimize(const DrainagePlan& plan, const Forcing& forcing,
                                    const Catchment& gauge, CostConfig config,
                                    const std::vector<double>& obs_mmh,
                                    const std::array<double, kNumParams>& background,
                                    const ParamBounds& bounds = ParamBounds::defaults(),
                                    const LbfgsbOptions& options = {});

struct MultiObjectiveCalibration {
  ParetoSet front;
  size_t selected = 0;  // index into front.solutions
};

/// Population-based multi-objective calibration of uniform parameters, one
/// cost config per objective, followed by additive-weighting selection with
/// `constrained` as the protected objective column.
MultiObjectiveCalibration calibrate_multiobjective(
    const DrainagePlan& plan, const Forcing& forcing, const Catchment& gauge,
    const std::vector<CostConfig>& objectives, const std::vector<double>& obs_mmh, uint64_t seed,
    const ParamBounds& bounds = ParamBounds::defaults(), const NsgaOptions& options = {},
    size_t constrained = 0);

}  // namespace hydrocal
