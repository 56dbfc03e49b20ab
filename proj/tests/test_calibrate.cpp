// Twin-experiment calibrations: observations come from the forward model at
// a known truth, so recovery quality has an unambiguous yardstick.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "hydrocal/adjoint.hpp"
#include "hydrocal/calibrate.hpp"
#include "hydrocal/d8.hpp"
#include "hydrocal/model.hpp"

using namespace hydrocal;

namespace {

DrainagePlan single_cell_plan() {
  TextRaster raster;
  raster.values = Grid<double>(1, 1, 1.0);
  return build_drainage_plan(D8Raster::from_text(raster));
}

DrainagePlan grid3_plan() {
  TextRaster raster;
  raster.values = Grid<double>(3, 3, 3.0);
  for (int r = 0; r < 3; ++r) raster.values(r, 2) = 5.0;
  return build_drainage_plan(D8Raster::from_text(raster));
}

// Triangular storms every 150 h starting at t=60, over light background rain.
std::vector<double> storm_rain(int n, int storms = 3, double drizzle = 0.0) {
  std::vector<double> p(n, drizzle);
  for (int s = 0; s < storms; ++s) {
    const int t0 = 60 + s * 150;
    for (int k = 0; k < 18; ++k)
      p[t0 + k] += 8.0 * (1.0 - std::abs(k - 9.0) / 9.0);
  }
  return p;
}

double nse_of(const std::vector<double>& sim, const std::vector<double>& obs) {
  double mean = 0;
  for (double v : obs) mean += v;
  mean /= static_cast<double>(obs.size());
  double num = 0, den = 0;
  for (size_t t = 0; t < obs.size(); ++t) {
    num += (sim[t] - obs[t]) * (sim[t] - obs[t]);
    den += (obs[t] - mean) * (obs[t] - mean);
  }
  return 1.0 - num / den;
}

}  // namespace

TEST_CASE("uniform calibration recovers a single-cell twin to NSE >= 0.99") {
  DrainagePlan plan = single_cell_plan();
  Catchment gauge = delineate_catchment(plan, 0, 0);
  const int n = 500;
  Forcing forcing = Forcing::uniform(1, 1, storm_rain(n), std::vector<double>(n, 0.12));
  const std::array<double, kNumParams> truth = {15.0, 350.0, 100.0, 20.0, 0.8, 1200.0};
  ParameterField truth_field(1, 1, truth);
  std::vector<double> obs =
      simulate_gauge_mmh(plan, truth_field, StateField::default_initial(truth_field), forcing,
                         gauge);

  CostConfig config;  // dominant 1-NSE only
  UniformCalibration fit = calibrate_uniform(plan, forcing, gauge, config, obs);

  CHECK(ParamBounds::defaults().contains(fit.theta));
  CHECK(1.0 - fit.cost.jd >= 0.99);
  CHECK(fit.cost.total <= fit.history.front().total);

  SUBCASE("calibrated simulation scores the reported NSE") {
    ParameterField field(1, 1, fit.theta);
    std::vector<double> sim =
        simulate_gauge_mmh(plan, field, StateField::default_initial(field), forcing, gauge);
    CHECK(nse_of(sim, obs) == doctest::Approx(1.0 - fit.cost.jd).epsilon(1e-10));
  }
}

TEST_CASE("distributed calibration on a spatially varying twin") {
  DrainagePlan plan = grid3_plan();
  Catchment gauge = delineate_catchment(plan, 2, 2);
  const int n = 400;
  Forcing forcing = Forcing::uniform(3, 3, storm_rain(n), std::vector<double>(n, 0.12));

  // Truth: uniform except a strong west-east gradient in production capacity.
  ParameterField truth(3, 3, {15.0, 350.0, 100.0, 20.0, 0.8, 1200.0});
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) truth[kCp](r, c) = 150.0 + 250.0 * c;
  std::vector<double> obs =
      simulate_gauge_mmh(plan, truth, StateField::default_initial(truth), forcing, gauge);

  CostConfig config;
  UniformCalibration uniform_fit = calibrate_uniform(plan, forcing, gauge, config, obs);

  SUBCASE("variational refinement beats the best uniform fit") {
    CostConfig vda_config = config;
    vda_config.alpha_reg = 1e-4;
    vda_config.sigma_theta = CostConfig::default_sigma(ParamBounds::defaults());
    DistributedCalibration fit =
        vda_optimize(plan, forcing, gauge, vda_config, obs, uniform_fit.theta);

    CHECK(fit.cost.total < uniform_fit.cost.total);
    CHECK(fit.cost.jd < uniform_fit.cost.jd);
    CHECK(fit.cost.total <= fit.background_cost);
    CHECK_FALSE(fit.stop_reason.empty());
    fit.theta.validate_bounds(ParamBounds::defaults(), plan.active);

    // Best-so-far cost over the evaluation log is monotone by construction;
    // the final cost must not exceed the first evaluation.
    CHECK(fit.cost.total <= fit.history.front().total);
  }
  SUBCASE("overwhelming regularization pins the field to the background") {
    CostConfig vda_config = config;
    vda_config.alpha_reg = 1e10;
    vda_config.sigma_theta = CostConfig::default_sigma(ParamBounds::defaults());
    DistributedCalibration fit =
        vda_optimize(plan, forcing, gauge, vda_config, obs, uniform_fit.theta);
    for (int j = 0; j < kNumParams; ++j)
      for (size_t i = 0; i < fit.theta[j].size(); ++i)
        CHECK(std::abs(fit.theta[j][i] - uniform_fit.theta[j]) < 1e-3);
  }
}

TEST_CASE("signature-weighted calibration trades volume fit for peak fit") {
  DrainagePlan plan = single_cell_plan();
  Catchment gauge = delineate_catchment(plan, 0, 0);
  const int n = 1000;
  const int storms = 6;
  // Short, sharp bursts: each flood peak is dominated by a single hour, so
  // the peak-flow signature reacts to noise independently of the volume fit.
  std::vector<double> rain_series(n, 0.0);
  for (int s = 0; s < storms; ++s) {
    const int t0 = 60 + s * 150;
    rain_series[t0] += 25.0;
    rain_series[t0 + 1] += 15.0;
  }
  Forcing forcing = Forcing::uniform(1, 1, rain_series, std::vector<double>(n, 0.12));
  const std::array<double, kNumParams> truth = {15.0, 350.0, 100.0, 20.0, 0.8, 1200.0};
  ParameterField truth_field(1, 1, truth);
  std::vector<double> clean =
      simulate_gauge_mmh(plan, truth_field, StateField::default_initial(truth_field), forcing,
                         gauge);
  // 5% multiplicative noise keeps the two objectives from coinciding.
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> obs = clean;
  for (double& v : obs) v = std::max(0.0, v * (1.0 + noise(rng)));

  // One event window per storm, segmented on the (noisy) observations.
  std::vector<EventWindow> windows;
  for (int s = 0; s < storms; ++s) {
    const int t0 = 60 + s * 150;
    int peak = t0;
    for (int t = t0; t < t0 + 60; ++t)
      if (obs[t] > obs[peak]) peak = t;
    windows.push_back({t0 - 10, peak, std::min(n - 1, peak + 48)});
  }
  const std::vector<double> rain = gauge_rainfall_mmh(plan, forcing, gauge);

  CostConfig csoo;  // pure 1-NSE
  CostConfig ssoo;
  ssoo.delta_d = 0.5;
  ssoo.delta_f = 0.5;
  ssoo.flood_terms = {{SignatureId::Epf, 1.0}};
  ssoo.events = windows;

  // Both strategies refine the same uniform volume-fit background.
  UniformCalibration background = calibrate_uniform(plan, forcing, gauge, csoo, obs);

  CostConfig csoo_v = csoo, ssoo_v = ssoo;
  csoo_v.alpha_reg = 1e-4;
  csoo_v.sigma_theta = CostConfig::default_sigma(ParamBounds::defaults());
  ssoo_v.alpha_reg = 1e-4;
  ssoo_v.sigma_theta = csoo_v.sigma_theta;
  DistributedCalibration vda_c = vda_optimize(plan, forcing, gauge, csoo_v, obs, background.theta);
  DistributedCalibration vda_s = vda_optimize(plan, forcing, gauge, ssoo_v, obs, background.theta);

  // Same yardsticks for both calibrated models: exact peak-flow error and
  // the NSE deficit, both simulated from the shared background initial state.
  CostConfig peak_only;
  peak_only.delta_d = 0.0;
  peak_only.delta_f = 1.0;
  peak_only.flood_terms = {{SignatureId::Epf, 1.0}};
  peak_only.events = windows;
  const ParameterField background_field(1, 1, background.theta);
  const StateField h0 = StateField::default_initial(background_field);
  auto sim_of = [&](const ParameterField& field) {
    return simulate_gauge_mmh(plan, field, h0, forcing, gauge);
  };
  const std::vector<double> sim_c = sim_of(vda_c.theta);
  const std::vector<double> sim_s = sim_of(vda_s.theta);
  const double csoo_jf = evaluate_cost(peak_only, sim_c, obs, rain).jf;
  const double ssoo_jf = evaluate_cost(peak_only, sim_s, obs, rain).jf;
  CHECK(ssoo_jf < csoo_jf);

  SUBCASE("volume fit degrades only moderately") {
    const double csoo_jd = evaluate_cost(csoo, sim_c, obs, rain).jd;
    const double ssoo_jd = evaluate_cost(csoo, sim_s, obs, rain).jd;
    CHECK(ssoo_jd <= 1.6 * csoo_jd);
    vda_s.theta.validate_bounds(ParamBounds::defaults(), plan.active);
  }

  SUBCASE("multi-objective front spans the same trade-off") {
    CostConfig jd_only;  // objective 1
    NsgaOptions options;
    options.population = 32;
    options.generations = 40;
    MultiObjectiveCalibration mo = calibrate_multiobjective(
        plan, forcing, gauge, {jd_only, peak_only}, obs, 31337, ParamBounds::defaults(), options);

    REQUIRE_FALSE(mo.front.solutions.empty());
    CHECK(mo.selected < mo.front.solutions.size());

    double min_jd = 1e300, min_jf = 1e300;
    for (const auto& s : mo.front.solutions) {
      REQUIRE(s.objectives.size() == 2);
      min_jd = std::min(min_jd, s.objectives[0]);
      min_jf = std::min(min_jf, s.objectives[1]);
      std::array<double, kNumParams> theta{};
      for (int j = 0; j < kNumParams; ++j) theta[j] = s.genes[j];
      CHECK(ParamBounds::defaults().contains(theta));
    }
    // The front spans the trade-off: one end beats the volume-focused
    // optimum on peak fit, the other beats the pure-peak optimum on volume.
    UniformCalibration peak_fit = calibrate_uniform(plan, forcing, gauge, peak_only, obs);
    ParameterField peak_field(1, 1, peak_fit.theta);
    std::vector<double> peak_sim = simulate_gauge_mmh(
        plan, peak_field, StateField::default_initial(peak_field), forcing, gauge);
    const double peak_fit_jd = evaluate_cost(csoo, peak_sim, obs, rain).jd;
    CHECK(min_jf < csoo_jf);
    CHECK(min_jd < peak_fit_jd);
  }
}
