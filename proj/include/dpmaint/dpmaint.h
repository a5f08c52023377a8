/* Copyright 2026 The dpmaint Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the dpmaint shared library.
 *
 * Every function returns a dpm_status. On failure a message describing the
 * last error of the calling thread is available from dpm_last_error().
 * Handles are opaque and owned by the caller; release them with the
 * matching *_free function. Strings returned through char** out-parameters
 * are allocated by the library and released with dpm_string_free. */

#ifndef DPMAINT_DPMAINT_H_
#define DPMAINT_DPMAINT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DPM_API __declspec(dllexport)
#else
#define DPM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  DPM_OK = 0,
  DPM_INVALID_ARGUMENT = 1,
  DPM_PARSE_ERROR = 2,
  DPM_VALIDATION_ERROR = 3,
  DPM_IO_ERROR = 4,
  DPM_PROTOCOL_ERROR = 5,
  DPM_SOLVER_ERROR = 6,
  DPM_CONFIGURATION_ERROR = 7,
  DPM_INTERNAL_ERROR = 8
} dpm_status;

typedef struct dpm_experiment dpm_experiment;
typedef struct dpm_results dpm_results;

DPM_API const char* dpm_version(void);
DPM_API const char* dpm_status_name(dpm_status status);
/* Message of the last failed call on this thread; "" when none. */
DPM_API const char* dpm_last_error(void);
DPM_API void dpm_string_free(char* s);

/* ---- Experiment configuration ---- */

DPM_API dpm_status dpm_experiment_load(const char* path,
                                       dpm_experiment** out);
/* base_dir resolves relative case/partition paths; may be NULL. */
DPM_API dpm_status dpm_experiment_from_json(const char* json,
                                            const char* base_dir,
                                            dpm_experiment** out);
/* Defaults for the given case and partition (partition may be NULL). */
DPM_API dpm_status dpm_experiment_create(const char* case_path,
                                         const char* partition_path,
                                         dpm_experiment** out);
DPM_API void dpm_experiment_free(dpm_experiment* e);

/* Numeric overrides by config key, e.g. "noise_scale", "cl", "epsilon",
 * "rho_theta", "gamma", "lookback", "max_iterations", "noise_multiplier",
 * "min_threshold", "time_budget_s", "threads". Unknown keys fail with
 * DPM_INVALID_ARGUMENT. */
DPM_API dpm_status dpm_experiment_set(dpm_experiment* e, const char* key,
                                      double value);
/* String overrides: "eta_mode", "statistic", "backend", "case",
 * "partition". */
DPM_API dpm_status dpm_experiment_set_string(dpm_experiment* e,
                                             const char* key,
                                             const char* value);
DPM_API dpm_status dpm_experiment_set_seeds(dpm_experiment* e,
                                            const uint64_t* seeds,
                                            size_t count);
/* A NULL axis is left as configured. A non-NULL axis with count 0 clears
 * it, so the single configured value is used. */
DPM_API dpm_status dpm_experiment_set_sweep(dpm_experiment* e,
                                            const double* scales,
                                            size_t num_scales,
                                            const double* cls, size_t num_cls,
                                            const int* gammas,
                                            size_t num_gammas);
DPM_API dpm_status dpm_experiment_validate(const dpm_experiment* e);
DPM_API dpm_status dpm_experiment_to_json(const dpm_experiment* e,
                                          char** out);

/* ---- Runs ---- */

/* Configured point only (sweep axes ignored), one run per seed. With
 * with_centralized != 0 the centralized reference is solved first and the
 * gap is filled in; otherwise gaps are NaN. */
DPM_API dpm_status dpm_run(const dpm_experiment* e, int with_centralized,
                           dpm_results** out);
/* Full grid. Failing cells are recorded, not returned as errors. */
DPM_API dpm_status dpm_sweep(const dpm_experiment* e, int with_centralized,
                             dpm_results** out);
/* Centralized reference only; relaxed != 0 solves the relaxation. */
DPM_API dpm_status dpm_centralized(const dpm_experiment* e, int relaxed,
                                   dpm_results** out);
DPM_API void dpm_results_free(dpm_results* r);

typedef struct {
  double scale;
  double cl;
  int gamma;
  uint64_t seed;
  int ok; /* 0: the run failed, see dpm_results_cell_error */
  int converged;
  int relaxed_iterations;
  int binary_iterations;
  double objective;
  double gap;
  double flow_noise_norm_mw;
  double slack_mw;
  double wall_seconds;
} dpm_cell_info;

typedef struct {
  int available; /* 0 when no centralized solve was requested */
  int optimal;   /* search finished within its limits */
  double objective;
  double bound;
  double relaxed_objective;
  int64_t nodes;
  double slack_mw;
  double wall_seconds;
} dpm_centralized_info;

DPM_API size_t dpm_results_count(const dpm_results* r);
DPM_API dpm_status dpm_results_cell(const dpm_results* r, size_t index,
                                    dpm_cell_info* out);
/* Borrowed pointer valid until dpm_results_free. */
DPM_API const char* dpm_results_cell_error(const dpm_results* r,
                                           size_t index);
DPM_API const char* dpm_results_cell_status(const dpm_results* r,
                                            size_t index);
DPM_API dpm_status dpm_results_centralized(const dpm_results* r,
                                           dpm_centralized_info* out);

/* Output files; wall_time != 0 adds timing columns to the CSVs. */
DPM_API dpm_status dpm_results_write_trace(const dpm_results* r,
                                           const char* path, int wall_time);
DPM_API dpm_status dpm_results_write_summary(const dpm_results* r,
                                             const char* path, int wall_time);
DPM_API dpm_status dpm_results_write_plot(const dpm_results* r,
                                          const char* path);
DPM_API dpm_status dpm_results_report(const dpm_results* r, char** out);

/* Per-cell statistics from an existing summary.csv. */
DPM_API dpm_status dpm_report_from_summary(const char* summary_path,
                                           char** out);

/* ---- Privacy verification ---- */

typedef struct {
  double scale;        /* omega / epsilon */
  double epsilon;
  double gamma;        /* line conversion factor used for the angle noise */
  uint64_t samples;
  uint64_t seed;
  double significance; /* KS test level */
} dpm_verify_options;

DPM_API void dpm_verify_options_default(dpm_verify_options* o);
/* Runs the Laplace KS check and the density-ratio check with shift omega.
 * *pass is 1 when both pass. The report text lists both results. */
DPM_API dpm_status dpm_verify_dp(const dpm_verify_options* o, int* pass,
                                 char** report);

#ifdef __cplusplus
}
#endif

#endif /* DPMAINT_DPMAINT_H_ */
