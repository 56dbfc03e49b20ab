#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hydrocal/grid.hpp"

namespace hydrocal {

/// D8 flow-direction raster. Codes: 1=N then clockwise to 8=NW.
struct D8Raster {
  double cellsize_km = 1.0;
  Grid<int> codes;           // 1..8 on active cells, 0 on nodata
  Grid<uint8_t> active;      // 1 where a flow code is defined

  static D8Raster from_text(const TextRaster& raster);
};

/// Row/col offsets for D8 code k (index 1..8).
inline constexpr int kD8RowOff[9] = {0, -1, -1, 0, 1, 1, 1, 0, -1};
inline constexpr int kD8ColOff[9] = {0, 0, 1, 1, 1, 0, -1, -1, -1};

constexpr int32_t kNoDownstream = -1;

struct DrainagePlan {
  int nrows = 0;
  int ncols = 0;
  double cellsize_km = 1.0;
  std::vector<int32_t> downstream;   // per-cell downstream index, kNoDownstream at local outlets
  std::vector<int32_t> topo_order;   // active cells, upstream before downstream
  std::vector<double> drained_area;  // km², 0 on inactive cells
  Grid<uint8_t> active;

  size_t cell_count() const { return static_cast<size_t>(nrows) * ncols; }
  int active_count() const { return static_cast<int>(topo_order.size()); }
  double cell_area() const { return cellsize_km * cellsize_km; }
  bool is_active(size_t i) const { return active[i] != 0; }
};

struct Catchment {
  int32_t outlet = kNoDownstream;
  std::vector<int32_t> members;  // sorted cell indices, includes outlet
  std::string gauge_id;
};

DrainagePlan build_drainage_plan(const D8Raster& d8);
Catchment delineate_catchment(const DrainagePlan& plan, int row, int col,
                              const std::string& gauge_id = "gauge");

}  // namespace hydrocal
