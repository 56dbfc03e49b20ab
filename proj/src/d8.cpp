#include <algorithm>
#include <cmath>
#include <queue>

#include "hydrocal/d8.hpp"

namespace hydrocal {

D8Raster D8Raster::from_text(const TextRaster& raster) {
  D8Raster d8;
  d8.cellsize_km = raster.cellsize_km;
  const auto& v = raster.values;
  d8.codes = Grid<int>(v.nrows(), v.ncols(), 0);
  d8.active = Grid<uint8_t>(v.nrows(), v.ncols(), 0);
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i] == raster.nodata_value || std::isnan(v[i])) continue;
    double rounded = std::round(v[i]);
    if (rounded != v[i] || rounded < 1 || rounded > 8)
      fail(ErrorCode::InvalidCode, "flow code " + std::to_string(v[i]) + " at cell " +
                                       std::to_string(i) + " is outside 1..8");
    d8.codes[i] = static_cast<int>(rounded);
    d8.active[i] = 1;
  }
  return d8;
}

DrainagePlan build_drainage_plan(const D8Raster& d8) {
  const int nrows = d8.codes.nrows();
  const int ncols = d8.codes.ncols();
  if (nrows <= 0 || ncols <= 0) fail(ErrorCode::InvalidArgument, "empty raster");

  DrainagePlan plan;
  plan.nrows = nrows;
  plan.ncols = ncols;
  plan.cellsize_km = d8.cellsize_km;
  plan.active = d8.active;
  plan.downstream.assign(plan.cell_count(), kNoDownstream);
  plan.drained_area.assign(plan.cell_count(), 0.0);

  int n_active = 0;
  std::vector<int> indegree(plan.cell_count(), 0);
  for (size_t i = 0; i < plan.cell_count(); ++i) {
    if (!d8.active[i]) continue;
    ++n_active;
    int code = d8.codes[i];
    if (code < 1 || code > 8)
      fail(ErrorCode::InvalidCode, "active cell " + std::to_string(i) + " has code " +
                                       std::to_string(code));
    int r = d8.codes.row_of(i) + kD8RowOff[code];
    int c = d8.codes.col_of(i) + kD8ColOff[code];
    // Cells draining off-grid or into nodata are local outlets.
    if (!d8.codes.in_bounds(r, c) || !d8.active(r, c)) continue;
    plan.downstream[i] = static_cast<int32_t>(d8.codes.index(r, c));
  }
  for (size_t i = 0; i < plan.cell_count(); ++i)
    if (plan.downstream[i] != kNoDownstream) ++indegree[plan.downstream[i]];

  // Kahn with a min-heap on row-major index so the order is deterministic.
  std::priority_queue<int32_t, std::vector<int32_t>, std::greater<>> ready;
  for (size_t i = 0; i < plan.cell_count(); ++i)
    if (d8.active[i] && indegree[i] == 0) ready.push(static_cast<int32_t>(i));

  plan.topo_order.reserve(n_active);
  while (!ready.empty()) {
    int32_t cell = ready.top();
    ready.pop();
    plan.topo_order.push_back(cell);
    int32_t down = plan.downstream[cell];
    if (down != kNoDownstream && --indegree[down] == 0) ready.push(down);
  }
  if (static_cast<int>(plan.topo_order.size()) != n_active)
    fail(ErrorCode::CycleDetected, "flow-direction codes form a loop");

  const double area = plan.cell_area();
  for (int32_t cell : plan.topo_order) plan.drained_area[cell] += area;
  for (int32_t cell : plan.topo_order) {
    int32_t down = plan.downstream[cell];
    if (down != kNoDownstream) plan.drained_area[down] += plan.drained_area[cell];
  }
  return plan;
}

Catchment delineate_catchment(const DrainagePlan& plan, int row, int col,
                              const std::string& gauge_id) {
  if (row < 0 || row >= plan.nrows || col < 0 || col >= plan.ncols ||
      !plan.active[plan.active.index(row, col)])
    fail(ErrorCode::InactiveOutlet, "outlet (" + std::to_string(row) + "," +
                                        std::to_string(col) + ") is not an active cell");
  Catchment catchment;
  catchment.outlet = static_cast<int32_t>(plan.active.index(row, col));
  catchment.gauge_id = gauge_id;

  // Walk downstream pointers from every active cell; member iff the path hits the outlet.
  std::vector<uint8_t> reaches(plan.cell_count(), 0);
  reaches[catchment.outlet] = 1;
  for (auto it = plan.topo_order.rbegin(); it != plan.topo_order.rend(); ++it) {
    int32_t cell = *it;
    if (reaches[cell]) continue;
    int32_t down = plan.downstream[cell];
    if (down != kNoDownstream && reaches[down]) reaches[cell] = 1;
  }
  for (size_t i = 0; i < plan.cell_count(); ++i)
    if (reaches[i]) catchment.members.push_back(static_cast<int32_t>(i));
  return catchment;
}

}  // namespace hydrocal
