#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hydrocal/config.hpp"
#include "hydrocal/error.hpp"
#include "hydrocal/grid.hpp"

namespace hydrocal {

/// Stacked grid series: one raster header, then a `step t` marker line before
/// each hourly grid. Canonical on-disk forcing form.
void write_stacked_grids(const std::string& path, const std::vector<Grid<double>>& steps,
                         double cellsize_km);
std::vector<Grid<double>> read_stacked_grids(const std::string& path,
                                             double* cellsize_km = nullptr);
/// A stacked file, or a directory of per-hour rasters read in name order.
std::vector<Grid<double>> read_grid_series(const std::string& path);

/// CSV `timestamp,discharge_m3s`, hourly ISO-8601 UTC timestamps.
void write_discharge_csv(const std::string& path, int64_t start_hour,
                         const std::vector<double>& discharge_m3s);
std::vector<double> read_discharge_csv(const std::string& path, int64_t expected_start_hour);

/// Process exit code families: 0 ok, 2 configuration, 3 data, 4 numerical.
int exit_code_for(ErrorCode code);

struct RunOutcome {
  int exit_code = 0;
  std::string message = "ok";
  std::vector<std::string> outputs;  // files written, relative to out_dir
};

/// Execute one validated configuration end to end; throws hydrocal::Error.
RunOutcome execute(const RunConfig& config);

/// Parse the config file, apply CLI overrides, execute; exceptions are
/// converted into the outcome's exit code and message.
RunOutcome execute_file(const std::string& config_path, const std::string& mode_override,
                        const std::string& out_dir_override, const uint64_t* seed_override);

}  // namespace hydrocal
