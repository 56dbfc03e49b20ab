#ifndef HYDROCAL_H
#define HYDROCAL_H

/* C interface to the rainfall-runoff modeling toolkit. All functions return
 * a status code; on failure hc_last_error() gives the message for the
 * calling thread. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define HC_OK 0
#define HC_ERR_CONFIG 2  /* bad configuration or arguments */
#define HC_ERR_DATA 3    /* unreadable/inconsistent input data */
#define HC_ERR_NUMERIC 4 /* numerical failure */

const char* hc_last_error(void);

/* Run one subcommand (run | segment | signatures | sensitivity | calibrate |
 * gradient-test | synth) from a configuration file. `mode` and `out_dir`
 * override the config when non-NULL; `seed` overrides when >= 0. */
int hc_execute(const char* config_path, const char* mode, const char* out_dir, long long seed);

/* Opaque drainage plan built from a D8 flow-direction raster file. */
typedef struct hc_plan hc_plan;
int hc_plan_read(const char* d8_path, hc_plan** out);
void hc_plan_free(hc_plan* plan);
int hc_plan_shape(const hc_plan* plan, int* nrows, int* ncols);
/* Drained area in km^2 at a cell; fails on inactive cells. */
int hc_plan_drained_area(const hc_plan* plan, int row, int col, double* area_km2);

/* Streamflow metrics over paired series of length n. */
int hc_nse(const double* sim, const double* obs, size_t n, double* out);
int hc_kge(const double* sim, const double* obs, size_t n, double* out);
/* Three-pass recursive baseflow separation; writes n values. */
int hc_baseflow(const double* discharge, size_t n, double* baseflow_out);

#ifdef __cplusplus
}
#endif

#endif /* HYDROCAL_H */
