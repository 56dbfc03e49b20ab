#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hydrocal/model.hpp"

namespace hydrocal {

/// "YYYY-MM-DDThh:00:00Z" -> hours since the Unix epoch; rejects sub-hour
/// offsets and non-UTC designators.
int64_t parse_time_utc(const std::string& text);
std::string format_time_utc(int64_t hours);

struct SignatureWeight {
  std::string name;
  double weight = 1.0;
  bool operator==(const SignatureWeight&) const = default;
};

/// One parsed and validated run configuration. Unset optional values keep
/// their defaults; serialize_config echoes every effective value.
struct RunConfig {
  // [run]
  std::string mode = "run";
  uint64_t seed = 42;
  std::string out_dir = "out";

  // [paths]
  std::string d8;
  std::string rainfall;
  std::string pet;
  std::string discharge;

  // [period]
  std::string start = "1970-01-01T00:00:00Z";
  int warmup_hours = 0;

  // [gauge]
  int gauge_row = 0;
  int gauge_col = 0;
  std::string gauge_id = "gauge";

  // [model]
  std::array<double, kNumParams> theta = ParamBounds::defaults().midpoint_log();

  // [cost]
  std::string dominant = "nse";
  double delta_d = 1.0, delta_c = 0.0, delta_f = 0.0;
  double alpha_reg = -1.0;  // negative = per-strategy default (1e-4 distributed, else 0)
  std::vector<SignatureWeight> continuous_signatures;
  std::vector<SignatureWeight> flood_signatures;
  int season_start = 0, season_end = 0;  // months 1..12; 0 disables the filter
  std::string quantile_convention = "exceedance";

  // [segmentation]
  double min_peak_height = -1.0;  // negative = 0.995-quantile
  int min_peak_distance = 12;

  // [calibrate]
  std::string strategy = "uniform";  // uniform | distributed | multiobjective
  int max_iterations = 200;
  int nsga_population = 64;
  int nsga_generations = 100;

  // [sensitivity]
  int sample_count = 1024;
  std::vector<std::string> sensitivity_signatures;  // empty = all 16

  // [gradient_test]
  int directions = 10;

  // [synth]
  std::array<double, kNumParams> theta_true = ParamBounds::defaults().midpoint_log();
  int duration_hours = 720;
  int storm_count = 3;
  int storm_duration = 12;
  double storm_intensity = 5.0;  // mm/h at the hyetograph peak
  double pet_rate = 0.1;         // mm/h, constant
  double noise = 0.0;            // multiplicative std-dev on synthetic obs
  int synth_nrows = 3, synth_ncols = 3;

  bool operator==(const RunConfig&) const = default;
};

/// Parse + validate. ParseError carries line/field context; ValidationError
/// lists every violation at once.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

/// Full echo of the effective configuration; re-parsing it reproduces the
/// struct exactly.
std::string serialize_config(const RunConfig& config);

/// Mode-aware validation (required paths present and existing, ranges sane).
/// `check_files` = false skips filesystem lookups (used by round-trip tests).
void validate_config(const RunConfig& config, bool check_files = true);

}  // namespace hydrocal
