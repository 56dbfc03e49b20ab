#include <string>
#include <vector>

#include "hydrocal.h"
#include "hydrocal/d8.hpp"
#include "hydrocal/metrics.hpp"
#include "hydrocal/runner.hpp"

namespace {

thread_local std::string g_last_error;

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const hydrocal::Error& e) {
    g_last_error = e.what();
    return hydrocal::exit_code_for(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HC_ERR_NUMERIC;
  }
}

}  // namespace

struct hc_plan {
  hydrocal::DrainagePlan plan;
};

extern "C" {

const char* hc_last_error(void) { return g_last_error.c_str(); }

int hc_execute(const char* config_path, const char* mode, const char* out_dir, long long seed) {
  if (!config_path) {
    g_last_error = "config_path is required";
    return HC_ERR_CONFIG;
  }
  const uint64_t seed_value = seed >= 0 ? static_cast<uint64_t>(seed) : 0;
  hydrocal::RunOutcome outcome = hydrocal::execute_file(
      config_path, mode ? mode : "", out_dir ? out_dir : "", seed >= 0 ? &seed_value : nullptr);
  if (outcome.exit_code != 0) g_last_error = outcome.message;
  return outcome.exit_code;
}

int hc_plan_read(const char* d8_path, hc_plan** out) {
  return guarded([&] {
    if (!d8_path || !out) hydrocal::fail(hydrocal::ErrorCode::InvalidArgument, "null argument");
    auto plan = hydrocal::build_drainage_plan(
        hydrocal::D8Raster::from_text(hydrocal::read_text_raster(d8_path)));
    *out = new hc_plan{std::move(plan)};
    return HC_OK;
  });
}

void hc_plan_free(hc_plan* plan) { delete plan; }

int hc_plan_shape(const hc_plan* plan, int* nrows, int* ncols) {
  return guarded([&] {
    if (!plan || !nrows || !ncols)
      hydrocal::fail(hydrocal::ErrorCode::InvalidArgument, "null argument");
    *nrows = plan->plan.nrows;
    *ncols = plan->plan.ncols;
    return HC_OK;
  });
}

int hc_plan_drained_area(const hc_plan* plan, int row, int col, double* area_km2) {
  return guarded([&] {
    if (!plan || !area_km2)
      hydrocal::fail(hydrocal::ErrorCode::InvalidArgument, "null argument");
    if (row < 0 || row >= plan->plan.nrows || col < 0 || col >= plan->plan.ncols)
      hydrocal::fail(hydrocal::ErrorCode::InvalidArgument, "cell outside the raster");
    const size_t i = plan->plan.active.index(row, col);
    if (!plan->plan.is_active(i))
      hydrocal::fail(hydrocal::ErrorCode::InactiveOutlet, "cell has no flow direction");
    *area_km2 = plan->plan.drained_area[i];
    return HC_OK;
  });
}

int hc_nse(const double* sim, const double* obs, size_t n, double* out) {
  return guarded([&] {
    if (!sim || !obs || !out) hydrocal::fail(hydrocal::ErrorCode::InvalidArgument, "null argument");
    *out = hydrocal::nse(std::vector<double>(sim, sim + n), std::vector<double>(obs, obs + n));
    return HC_OK;
  });
}

int hc_kge(const double* sim, const double* obs, size_t n, double* out) {
  return guarded([&] {
    if (!sim || !obs || !out) hydrocal::fail(hydrocal::ErrorCode::InvalidArgument, "null argument");
    *out = hydrocal::kge(std::vector<double>(sim, sim + n), std::vector<double>(obs, obs + n));
    return HC_OK;
  });
}

int hc_baseflow(const double* discharge, size_t n, double* baseflow_out) {
  return guarded([&] {
    if (!discharge || !baseflow_out)
      hydrocal::fail(hydrocal::ErrorCode::InvalidArgument, "null argument");
    auto result = hydrocal::baseflow_separate(std::vector<double>(discharge, discharge + n));
    std::copy(result.baseflow.begin(), result.baseflow.end(), baseflow_out);
    return HC_OK;
  });
}

}  // extern "C"
