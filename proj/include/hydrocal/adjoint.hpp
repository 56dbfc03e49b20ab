#pragma once

#include <cstdint>
#include <vector>

#include "hydrocal/cost.hpp"
#include "hydrocal/model.hpp"

namespace hydrocal {

/// Catchment-mean rainfall at the gauge, mm/h (fixed input to signatures).
std::vector<double> gauge_rainfall_mmh(const DrainagePlan& plan, const Forcing& forcing,
                                       const Catchment& gauge);

/// Forward run reduced to the gauge series in catchment depth units, mm/h.
std::vector<double> simulate_gauge_mmh(const DrainagePlan& plan, const ParameterField& theta,
                                       const StateField& h0, const Forcing& forcing,
                                       const Catchment& gauge);

/// Smooth cost of one forward run, including the regularization term when a
/// background is given.
CostBreakdown model_cost(const DrainagePlan& plan, const ParameterField& theta,
                         const StateField& h0, const Forcing& forcing, const Catchment& gauge,
                         const CostConfig& config, const std::vector<double>& obs_mmh,
                         const ParameterField* background, bool smooth = true);

struct AdjointResult {
  ParameterField gradient;  // dJ/dθ per field per cell, zero on inactive cells
  CostBreakdown breakdown;
};

/// Exact gradient of the smooth cost with respect to the full distributed
/// parameter field, by a reverse sweep over the stored forward trajectory.
AdjointResult gradient(const DrainagePlan& plan, const ParameterField& theta,
                       const StateField& h0, const Forcing& forcing, const Catchment& gauge,
                       const CostConfig& config, const std::vector<double>& obs_mmh,
                       const ParameterField* background = nullptr);

struct GradientTestRow {
  double epsilon;
  double relative_error;
  int direction;
};

/// Classic ε-vs-error table: directional derivative from the adjoint against
/// central finite differences along random bound-scaled directions.
std::vector<GradientTestRow> gradient_test(const DrainagePlan& plan, const ParameterField& theta,
                                           const StateField& h0, const Forcing& forcing,
                                           const Catchment& gauge, const CostConfig& config,
                                           const std::vector<double>& obs_mmh,
                                           const ParameterField* background, int directions,
                                           uint64_t seed);

/// min over the table of relative_error, per direction collapsed to the best ε.
double gradient_test_best_error(const std::vector<GradientTestRow>& rows);

}  // namespace hydrocal
