#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hydrocal/d8.hpp"
#include "hydrocal/model.hpp"

using namespace hydrocal;

namespace {

DrainagePlan single_cell_plan() {
  TextRaster raster;
  raster.values = Grid<double>(1, 1, 1.0);  // drains north, off-grid
  return build_drainage_plan(D8Raster::from_text(raster));
}

DrainagePlan chain_plan(int n) {
  TextRaster raster;
  raster.values = Grid<double>(1, n, 3.0);  // everything drains east
  return build_drainage_plan(D8Raster::from_text(raster));
}

std::array<double, kNumParams> random_theta(std::mt19937_64& rng) {
  const ParamBounds b = ParamBounds::defaults();
  std::array<double, kNumParams> theta{};
  std::uniform_real_distribution<double> unit(0, 1);
  for (int j = 0; j < kNumParams; ++j)
    theta[j] = b.lower[j] + unit(rng) * (b.upper[j] - b.lower[j]);
  return theta;
}

std::vector<double> random_series(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> unit(0, 1);
  std::vector<double> s(n);
  for (double& v : s) v = unit(rng) < 0.4 ? scale * unit(rng) : 0.0;
  return s;
}

}  // namespace

TEST_CASE("single-cell run equals the repeated step_cell + routing recursion") {
  DrainagePlan plan = single_cell_plan();
  Catchment gauge = delineate_catchment(plan, 0, 0);
  std::mt19937_64 rng(2024);

  const auto theta = random_theta(rng);
  ParameterField field(1, 1, theta);
  StateField h0 = StateField::default_initial(field);
  const int n = 100;
  Forcing forcing = Forcing::uniform(1, 1, random_series(rng, n, 8.0), random_series(rng, n, 0.3));

  SimulationResult result = run(plan, field, h0, forcing, {gauge});

  // Independent recursion: one cell, then the linear routing store.
  std::array<double, kNumStates> state = {h0[0][0], h0[1][0], h0[2][0], h0[3][0], h0[4][0]};
  const double area = plan.cell_area();
  const double gain = 1.0 - std::exp(-1.0 / theta[kCr]);
  double h_r = 0.0;
  for (int t = 0; t < n; ++t) {
    CellStep cs = step_cell(theta, state, forcing.rainfall[t][0], forcing.pet[t][0]);
    state = {cs.hi1, cs.hp1, cs.htr2, h_r, cs.htl2};
    const double stored = h_r + cs.runoff * area;
    const double out = gain * stored;
    h_r = stored - out;
    state[kHr] = h_r;
    CHECK(result.gauge_outflow_volume[0][t] == doctest::Approx(out).epsilon(1e-12));
    CHECK(result.gauge_discharge_m3s[0][t] ==
          doctest::Approx(out * kVolumeToM3s).epsilon(1e-12));
  }
  CHECK(result.final_state[kHr][0] == doctest::Approx(h_r).epsilon(1e-12));
}

TEST_CASE("chained cells match a nested per-cell routing oracle") {
  const int n_cells = 3, n = 60;
  DrainagePlan plan = chain_plan(n_cells);
  Catchment gauge = delineate_catchment(plan, 0, n_cells - 1);
  std::mt19937_64 rng(77);

  const auto theta = random_theta(rng);
  ParameterField field(1, n_cells, theta);
  StateField h0 = StateField::default_initial(field);
  Forcing forcing =
      Forcing::uniform(1, n_cells, random_series(rng, n, 6.0), random_series(rng, n, 0.2));

  SimulationResult result = run(plan, field, h0, forcing, {gauge});

  std::vector<std::array<double, kNumStates>> state(n_cells);
  for (int c = 0; c < n_cells; ++c)
    state[c] = {h0[0][c], h0[1][c], h0[2][c], h0[3][c], h0[4][c]};
  const double area = plan.cell_area();
  const double gain = 1.0 - std::exp(-1.0 / theta[kCr]);
  for (int t = 0; t < n; ++t) {
    double inflow = 0.0;  // west-to-east accumulation, volume units
    for (int c = 0; c < n_cells; ++c) {
      CellStep cs = step_cell(theta, state[c], forcing.rainfall[t][c], forcing.pet[t][c]);
      const double stored = state[c][kHr] + cs.runoff * area + inflow;
      const double out = gain * stored;
      state[c] = {cs.hi1, cs.hp1, cs.htr2, stored - out, cs.htl2};
      inflow = out;
    }
    CHECK(result.gauge_outflow_volume[0][t] == doctest::Approx(inflow).epsilon(1e-12));
  }
}

TEST_CASE("mass ledger closes with ml = 0 over randomized runs") {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 40; ++trial) {
    const int n_cells = 2 + static_cast<int>(rng() % 3);
    DrainagePlan plan = chain_plan(n_cells);
    Catchment gauge = delineate_catchment(plan, 0, n_cells - 1);
    auto theta = random_theta(rng);
    theta[kMl] = 0.0;
    ParameterField field(1, n_cells, theta);
    StateField h0 = StateField::default_initial(field);
    const int n = 50;
    Forcing forcing =
        Forcing::uniform(1, n_cells, random_series(rng, n, 10.0), random_series(rng, n, 0.4));
    SimulationResult result = run(plan, field, h0, forcing, {gauge});
    CHECK(result.ledger.total_exchange == 0.0);
    const double scale = std::max(1.0, result.ledger.total_rainfall);
    CHECK(std::abs(result.ledger.residual()) / scale <= 1e-10);
  }
}

TEST_CASE("with ml < 0 the apparent imbalance equals the signed exchange") {
  std::mt19937_64 rng(31337);
  DrainagePlan plan = chain_plan(3);
  Catchment gauge = delineate_catchment(plan, 0, 2);
  auto theta = random_theta(rng);
  theta[kMl] = -6.0;
  ParameterField field(1, 3, theta);
  StateField h0 = StateField::default_initial(field);
  const int n = 120;
  Forcing forcing = Forcing::uniform(1, 3, random_series(rng, n, 9.0), random_series(rng, n, 0.3));
  SimulationResult result = run(plan, field, h0, forcing, {gauge});

  const MassLedger& ledger = result.ledger;
  CHECK(ledger.total_exchange < 0.0);  // water removed from the domain
  const double apparent = ledger.total_rainfall - ledger.total_evaporation -
                          ledger.storage_change - ledger.total_outflow;
  CHECK(apparent == doctest::Approx(-ledger.total_exchange).epsilon(1e-10));
  CHECK(std::abs(ledger.residual()) <= 1e-8 * std::max(1.0, ledger.total_rainfall));
}

TEST_CASE("states stay non-negative and within capacities for randomized draws") {
  std::mt19937_64 rng(8675309);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int i = 0; i < 100000; ++i) {
    const auto theta = random_theta(rng);
    std::array<double, kNumStates> state = {unit(rng) * theta[kCi], unit(rng) * theta[kCp],
                                            unit(rng) * theta[kCtr], unit(rng) * 50.0,
                                            unit(rng) * theta[kCtl]};
    const double p = unit(rng) < 0.5 ? 12.0 * unit(rng) : 0.0;
    const double e = 0.5 * unit(rng);
    CellStep cs = step_cell(theta, state, p, e);
    REQUIRE(cs.hi1 >= 0.0);
    REQUIRE(cs.hi1 <= theta[kCi] + 1e-12);
    REQUIRE(cs.hp1 >= 0.0);
    REQUIRE(cs.hp1 <= theta[kCp] + 1e-12);
    REQUIRE(cs.htr2 >= 0.0);
    REQUIRE(cs.htl2 >= 0.0);
    REQUIRE(cs.runoff >= 0.0);
    REQUIRE(cs.actual_et >= 0.0);
    REQUIRE(std::isfinite(cs.runoff));
  }
}

TEST_CASE("default initial state follows the documented fractions") {
  ParameterField field(2, 2, {10, 400, 120, 25, 0.5, 800});
  StateField h0 = StateField::default_initial(field);
  CHECK(h0[kHi][0] == 0.0);
  CHECK(h0[kHp][0] == doctest::Approx(200.0));
  CHECK(h0[kHtr][0] == doctest::Approx(24.0));
  CHECK(h0[kHr][0] == 0.0);
  CHECK(h0[kHtl][0] == doctest::Approx(160.0));
}

TEST_CASE("missing forcing steps are hard errors") {
  DrainagePlan plan = single_cell_plan();
  Catchment gauge = delineate_catchment(plan, 0, 0);
  ParameterField field(1, 1, {10, 400, 120, 25, 0.5, 800});
  StateField h0 = StateField::default_initial(field);
  Forcing forcing = Forcing::uniform(1, 1, {1.0, 2.0, 1.0}, {0.1, 0.1, 0.1});
  forcing.missing[1] = 1;
  CHECK_THROWS_AS((void)run(plan, field, h0, forcing, {gauge}), Error);
}
