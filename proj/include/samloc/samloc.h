/* Copyright 2026 The samloc Authors
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

/* C interface to libsamloc. Every object is an opaque handle created by a
 * *_create / *_load / *_read function and released by the matching
 * *_destroy. Functions return a samloc_status; on failure a message is
 * available from samloc_last_error() on the calling thread until the next
 * failing call on that thread. */

#ifndef SAMLOC_SAMLOC_H_
#define SAMLOC_SAMLOC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SAMLOC_BUILDING_LIBRARY)
#define SAMLOC_API __attribute__((visibility("default")))
#else
#define SAMLOC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum samloc_status {
  SAMLOC_OK = 0,
  SAMLOC_ERR_INVALID_ARGUMENT = 1,
  SAMLOC_ERR_OUT_OF_RANGE = 2,
  SAMLOC_ERR_FORMAT = 3,
  SAMLOC_ERR_IO = 4,
  SAMLOC_ERR_NOT_FOUND = 5,
  SAMLOC_ERR_SHAPE = 6,
  SAMLOC_ERR_STATE = 7,
  SAMLOC_ERR_CONFIG = 8,
  SAMLOC_ERR_INTERNAL = 9,
} samloc_status;

typedef struct samloc_config samloc_config;
typedef struct samloc_grid samloc_grid;
typedef struct samloc_model samloc_model;
typedef struct samloc_filter samloc_filter;
typedef struct samloc_pm samloc_pm;

SAMLOC_API const char* samloc_version(void);
SAMLOC_API const char* samloc_status_name(samloc_status status);
/* Message of the last failure on this thread; "" if none. */
SAMLOC_API const char* samloc_last_error(void);
/* Process exit code for a status: 0 ok, 2 configuration, 3 data. */
SAMLOC_API int samloc_exit_code(samloc_status status);

/* ---- Configuration ---------------------------------------------------- */

SAMLOC_API samloc_status samloc_config_create(samloc_config** out);
SAMLOC_API void samloc_config_destroy(samloc_config* config);
/* Applies a `key = value` file on top of the current values. */
SAMLOC_API samloc_status samloc_config_load(samloc_config* config,
                                            const char* path);
SAMLOC_API samloc_status samloc_config_set(samloc_config* config,
                                           const char* key, const char* value);
SAMLOC_API samloc_status samloc_config_validate(const samloc_config* config);

/* ---- Batch drivers ---------------------------------------------------- */

typedef struct samloc_run_summary {
  int runs;
  int converged;
  double convergence_rate;
  int steps_histogram[4]; /* 0-20, 21-40, 41-60, >60 */
} samloc_run_summary;

/* `summary` may be null. */
SAMLOC_API samloc_status samloc_localize(const samloc_config* config,
                                         samloc_run_summary* summary);
SAMLOC_API samloc_status samloc_genmap(const samloc_config* config);
SAMLOC_API samloc_status samloc_genlog(const samloc_config* config);
SAMLOC_API samloc_status samloc_pmexport_oracle(const samloc_config* config);

/* ---- Maps ------------------------------------------------------------- */

SAMLOC_API samloc_status samloc_grid_load(const char* pgm_path,
                                          const char* meta_path,
                                          samloc_grid** out);
SAMLOC_API void samloc_grid_destroy(samloc_grid* grid);
SAMLOC_API samloc_status samloc_grid_info(const samloc_grid* grid, int* width,
                                          int* height, double* resolution);
/* 1 when (x, y) lies in a free cell, else 0. */
SAMLOC_API samloc_status samloc_grid_is_free(const samloc_grid* grid, double x,
                                             double y, int* free_out);

/* ---- Probability maps ------------------------------------------------- */

SAMLOC_API samloc_status samloc_pm_read(const char* path, samloc_pm** out);
SAMLOC_API void samloc_pm_destroy(samloc_pm* pm);
SAMLOC_API samloc_status samloc_pm_dims(const samloc_pm* pm, int* h, int* w,
                                        int* k, int64_t* frame_id);
/* Copies the H*W*K values in (i, j, k) row-major order; `count` must match. */
SAMLOC_API samloc_status samloc_pm_values(const samloc_pm* pm, double* out,
                                          size_t count);

/* ---- Observation models and filters ----------------------------------- */

/* Built from the config's `model` and pose-grid keys. `grid` must outlive
 * the model. */
SAMLOC_API samloc_status samloc_model_create(const samloc_config* config,
                                             const samloc_grid* grid,
                                             samloc_model** out);
SAMLOC_API void samloc_model_destroy(samloc_model* model);
/* PM the model infers for one scan; release with samloc_pm_destroy. */
SAMLOC_API samloc_status samloc_model_infer(const samloc_model* model,
                                            const double* ranges, size_t count,
                                            int64_t frame_id, samloc_pm** out);

/* `model` may be null for filter = mcl. `grid` and `model` must outlive the
 * filter. The filter starts uniformly initialized with the config seed. */
SAMLOC_API samloc_status samloc_filter_create(const samloc_config* config,
                                              const samloc_grid* grid,
                                              const samloc_model* model,
                                              samloc_filter** out);
SAMLOC_API void samloc_filter_destroy(samloc_filter* filter);

typedef struct samloc_update_stats {
  int h_count;
  int l_count;
  int reinitialized;
  int pm_fallback;
} samloc_update_stats;

/* odom = {dx, dy, dtheta} in the robot frame; `stats` may be null. */
SAMLOC_API samloc_status samloc_filter_update(samloc_filter* filter,
                                              const double odom[3],
                                              const double* ranges,
                                              size_t count, int64_t frame_id,
                                              samloc_update_stats* stats);
SAMLOC_API samloc_status samloc_filter_estimate(const samloc_filter* filter,
                                                double pose[3]);
/* Writes up to `capacity` particles as {x, y, theta, weight_norm} rows;
 * `count` receives the particle count. */
SAMLOC_API samloc_status samloc_filter_particles(const samloc_filter* filter,
                                                 double* out, size_t capacity,
                                                 size_t* count);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* SAMLOC_SAMLOC_H_ */
