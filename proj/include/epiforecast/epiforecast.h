#ifndef EPIFORECAST_H
#define EPIFORECAST_H

/* C interface of the epiforecast shared library. All functions are
 * thread-compatible: use one epf_ctx per thread, handles must not be shared
 * without external synchronization. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The numeric values are part of the ABI. */
typedef enum epf_status
{
    EPF_OK = 0,
    EPF_ERR_INVALID_ARGUMENT = 1,
    EPF_ERR_PARSE = 2,
    EPF_ERR_DOMAIN = 3,
    EPF_ERR_NUMERIC = 4,
    EPF_ERR_IO = 5,
    EPF_ERR_DEGENERATE = 6,
    EPF_ERR_SINGULAR = 7
} epf_status;

/* Owns the last error message of any call made with it. */
typedef struct epf_ctx epf_ctx;

/* Daily observed (infected, removed) counts for one region. */
typedef struct epf_series epf_series;

epf_ctx* epf_ctx_create(void);
void epf_ctx_destroy(epf_ctx* ctx);

/* Message of the most recent failed call on this context; empty string after
 * a success. The pointer stays valid until the next call with the context. */
const char* epf_last_error(const epf_ctx* ctx);

/* Library version, e.g. "1.0.0". */
const char* epf_version(void);

/* ---- pipeline ---------------------------------------------------------- */

/* Command-line style overrides applied on top of the config file. Zero (or
 * negative) fields keep the config's values. */
typedef struct epf_run_options
{
    double population;
    double adjustment_factor;
    int smooth_window;
    int jobs;
    int emit_plot_data; /* nonzero: also write plot CSVs after fit/forecast */
} epf_run_options;

/* Runs one pipeline step against a JSON config. `command` is one of
 * "train", "fit", "forecast", "evaluate", "plot-data". `options` may be
 * NULL. */
epf_status epf_run(epf_ctx* ctx, const char* command, const char* config_path, const epf_run_options* options);

/* ---- series ------------------------------------------------------------ */

/* Loads a `date,infected,removed` CSV with ISO-8601 dates on consecutive
 * days. The caller owns the handle and releases it with
 * epf_series_destroy. */
epf_status epf_series_load(epf_ctx* ctx, const char* csv_path, double population, epf_series** out);
void epf_series_destroy(epf_series* series);

/* Number of daily samples, or 0 for NULL. */
int epf_series_size(const epf_series* series);

/* ISO-8601 date of sample `index` written into `buffer` (needs >= 11 bytes
 * including the terminator). */
epf_status epf_series_date(epf_ctx* ctx, const epf_series* series, int index, char* buffer, size_t buffer_size);

/* Copies the infected and removed counts into caller arrays of
 * epf_series_size entries. Either pointer may be NULL to skip it. */
epf_status epf_series_values(epf_ctx* ctx, const epf_series* series, double* infected, double* removed);

/* Centered moving average of odd width `window`. */
epf_status epf_series_smooth(epf_ctx* ctx, const epf_series* in, int window, epf_series** out);

/* Multiplies both counts by an under-reporting correction factor. */
epf_status epf_series_adjust(epf_ctx* ctx, const epf_series* in, double factor, epf_series** out);

/* Replaces the removed counts by their running maximum. */
epf_status epf_series_monotone_removed(epf_ctx* ctx, const epf_series* in, epf_series** out);

/* Recovers the time-dependent SIR rates that reproduce the series exactly:
 * beta(t) = -N/(I S) dS/dt and gamma(t) = dR/dt / I by finite differences.
 * `beta` and `gamma` are caller arrays of epf_series_size entries; negative
 * samples are clamped to zero. Fails if any infected count is zero. */
epf_status epf_observed_rates(epf_ctx* ctx, const epf_series* series, double* beta, double* gamma);

/* ---- simulation -------------------------------------------------------- */

/* Integrates the SIR system with time-dependent rates. `beta` and `gamma`
 * hold `count` daily samples on [0, count-1] (linear interpolation between
 * samples); `infected`/`removed` receive `count` daily values starting from
 * (i0, r0). `substep` is the RK4 step in days (<= 0 picks 0.1). */
epf_status epf_simulate_sir(epf_ctx* ctx, double population, double i0, double r0, const double* beta,
                            const double* gamma, int count, double substep, double* infected, double* removed);

#ifdef __cplusplus
}
#endif

#endif /* EPIFORECAST_H */
