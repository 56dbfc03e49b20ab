#include <algorithm>
#include <cmath>
#include <random>

#include "hydrocal/adjoint.hpp"
#include "hydrocal/error.hpp"
#include "hydrocal/metrics.hpp"
#include "hydrocal/synth.hpp"

namespace hydrocal {

SynthResult synth_generate(const DrainagePlan& plan, const Catchment& gauge,
                           const std::array<double, kNumParams>& theta_true,
                           const SynthSpec& spec, uint64_t seed) {
  if (spec.duration_hours < 1 || spec.storm_count < 0 || spec.storm_duration < 1 ||
      spec.storm_intensity < 0 || spec.pet_rate < 0 || spec.noise < 0)
    fail(ErrorCode::BadSpec, "invalid storm specification");
  if (spec.storm_count > 0 &&
      spec.storm_count * spec.storm_duration > spec.duration_hours)
    fail(ErrorCode::BadSpec, "storms do not fit in the period");
  if (!ParamBounds::defaults().contains(theta_true))
    fail(ErrorCode::BadSpec, "theta_true outside calibration bounds");

  const int n = spec.duration_hours;
  std::vector<double> rain(n, 0.0), pet(n, spec.pet_rate);
  // Storm u peaks mid-slot with slot width duration_hours / storm_count.
  for (int u = 0; u < spec.storm_count; ++u) {
    const int slot = n / spec.storm_count;
    const int start = u * slot + std::max(0, (slot - spec.storm_duration) / 2);
    const double half = 0.5 * (spec.storm_duration - 1);
    for (int t = 0; t < spec.storm_duration && start + t < n; ++t) {
      const double shape = half > 0 ? 1.0 - std::abs(t - half) / (half + 1.0) : 1.0;
      rain[start + t] += spec.storm_intensity * shape;
    }
  }

  SynthResult result;
  result.forcing = Forcing::uniform(plan.nrows, plan.ncols, rain, pet, spec.start_hour);

  const ParameterField field(plan.nrows, plan.ncols, theta_true);
  const StateField h0 = StateField::default_initial(field);
  result.clean_mmh = simulate_gauge_mmh(plan, field, h0, result.forcing, gauge);

  result.obs_mmh = result.clean_mmh;
  if (spec.noise > 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& q : result.obs_mmh) q = std::max(0.0, q * (1.0 + spec.noise * gauss(rng)));
    result.noisy_vs_clean_nse = nse(result.obs_mmh, result.clean_mmh);
  }

  const double area = plan.drained_area[gauge.outlet];
  result.obs_m3s.resize(result.obs_mmh.size());
  for (size_t t = 0; t < result.obs_mmh.size(); ++t)
    result.obs_m3s[t] = result.obs_mmh[t] * area * kVolumeToM3s;
  return result;
}

}  // namespace hydrocal
