#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hydrocal/d8.hpp"
#include "hydrocal/grid.hpp"

namespace hydrocal {

/// Parameter ordering used everywhere a flat index is needed.
enum ParamIndex : int { kCi = 0, kCp = 1, kCtr = 2, kCr = 3, kMl = 4, kCtl = 5 };
inline constexpr int kNumParams = 6;
inline constexpr const char* kParamNames[kNumParams] = {"ci", "cp", "ctr", "cr", "ml", "ctl"};

struct ParamBounds {
  std::array<double, kNumParams> lower;
  std::array<double, kNumParams> upper;

  /// Calibration bounds of the 6-parameter model.
  static ParamBounds defaults() {
    return {{1.0, 1.0, 1.0, 1.0, -20.0, 1.0}, {100.0, 2000.0, 1000.0, 200.0, 5.0, 10000.0}};
  }
  bool contains(const std::array<double, kNumParams>& theta) const {
    for (int j = 0; j < kNumParams; ++j)
      if (theta[j] < lower[j] || theta[j] > upper[j]) return false;
    return true;
  }
  std::array<double, kNumParams> midpoint_log() const;
};

/// The 6 parameter rasters of model S6: interception capacity c_i (mm),
/// production capacity c_p (mm), fast transfer capacity c_tr (mm), routing
/// time constant c_r (h), exchange coefficient ml (mm/h, sign-free), slow
/// transfer capacity c_tl (mm).
struct ParameterField {
  std::array<Grid<double>, kNumParams> fields;

  ParameterField() = default;
  ParameterField(int nrows, int ncols, const std::array<double, kNumParams>& uniform);

  Grid<double>& operator[](int j) { return fields[j]; }
  const Grid<double>& operator[](int j) const { return fields[j]; }
  std::array<double, kNumParams> at_cell(size_t i) const {
    return {fields[0][i], fields[1][i], fields[2][i], fields[3][i], fields[4][i], fields[5][i]};
  }
  void validate_bounds(const ParamBounds& bounds, const Grid<uint8_t>& active) const;
};

/// The 5 state rasters: h_i, h_p, h_tr (mm), h_r (mm·km², routed volume),
/// h_tl (mm).
enum StateIndex : int { kHi = 0, kHp = 1, kHtr = 2, kHr = 3, kHtl = 4 };
inline constexpr int kNumStates = 5;

struct StateField {
  std::array<Grid<double>, kNumStates> fields;

  StateField() = default;
  StateField(int nrows, int ncols) {
    for (auto& f : fields) f = Grid<double>(nrows, ncols, 0.0);
  }
  Grid<double>& operator[](int j) { return fields[j]; }
  const Grid<double>& operator[](int j) const { return fields[j]; }

  /// h_i = 0, h_p = 0.5 c_p, h_tr = 0.2 c_tr, h_tl = 0.2 c_tl, h_r = 0.
  static StateField default_initial(const ParameterField& theta);
};

/// Hourly gridded rainfall/PET. A step may be marked missing; run() rejects it.
struct Forcing {
  int64_t start_hour = 0;  // hours since epoch, UTC
  std::vector<Grid<double>> rainfall;  // mm/h
  std::vector<Grid<double>> pet;       // mm/h
  std::vector<uint8_t> missing;        // per step, 1 = gap

  size_t steps() const { return rainfall.size(); }
  static Forcing uniform(int nrows, int ncols, const std::vector<double>& rain,
                         const std::vector<double>& pet, int64_t start_hour = 0);
};

struct MassLedger {
  double total_rainfall = 0;    // mm·km²
  double total_evaporation = 0; // actual ET, mm·km²
  double total_exchange = 0;    // signed water added by ml exchange, mm·km²
  double storage_change = 0;    // mm·km²
  double total_outflow = 0;     // volume leaving the domain at local outlets, mm·km²

  /// totalP − totalE − ΔS − totalQ + totalExchange; ~0 for a consistent run.
  double residual() const {
    return total_rainfall - total_evaporation - storage_change - total_outflow + total_exchange;
  }
};

struct SimulationResult {
  std::vector<std::vector<double>> gauge_discharge_m3s;  // per gauge, per step
  std::vector<std::vector<double>> gauge_outflow_volume; // mm·km²/h, same layout
  StateField final_state;
  MassLedger ledger;
};

/// Cell-scale fluxes of one time step, kept for the reverse sweep.
struct CellStep {
  double hi1 = 0, hp1 = 0, htr2 = 0, htl2 = 0;  // states after the step
  double runoff = 0;                            // mm
  double exchange = 0;                          // signed mm actually applied
  double actual_et = 0;                         // mm
};

/// Intermediates of one cell step, filled on demand for the reverse sweep.
struct CellDetail {
  double avail = 0, ei = 0, htmp = 0, pn = 0, en = 0;
  double sp = 0, w = 0, v = 0, ps = 0, es = 0, pr = 0;
  double htr1 = 0, htl1 = 0, x = 0, exch_flux = 0, htr1c = 0, htl1c = 0;
  double qtr = 0, qtl = 0;
  bool et_from_store = false;  // interception emptied, residual PET active path
  bool clip_tr = false, clip_tl = false;
};

/// One cell, one hour: interception, production, transfer with exchange.
/// Routing is handled by run() on the drainage plan.
CellStep step_cell(const std::array<double, kNumParams>& params,
                   const std::array<double, kNumStates>& state, double p, double e,
                   CellDetail* detail = nullptr);

struct Trajectory {
  // State snapshots before each step; size steps+1, snapshot t is the state
  // entering step t. Replaying step t from snapshot t reproduces snapshot t+1.
  std::vector<StateField> states;
};

SimulationResult run(const DrainagePlan& plan, const ParameterField& theta,
                     const StateField& h0, const Forcing& forcing,
                     const std::vector<Catchment>& gauges, Trajectory* trajectory = nullptr);

inline double mass_balance(const SimulationResult& result) { return result.ledger.residual(); }

/// 1 mm·km²/h = 1/3.6 m³/s.
inline constexpr double kVolumeToM3s = 1.0 / 3.6;

}  // namespace hydrocal
