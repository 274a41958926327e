// Copyright 2026 The OccuKit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface of the occukit shared library. Every call returns an
 * occukit_status; on failure occukit_last_error() describes the problem
 * (per thread, valid until the next failing call on that thread). Handles
 * are opaque and owned by the caller. */
#ifndef OCCUKIT_OCCUKIT_H
#define OCCUKIT_OCCUKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OCCUKIT_API __declspec(dllexport)
#else
#define OCCUKIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum occukit_status {
  OCCUKIT_OK = 0,
  OCCUKIT_INVALID_ARGUMENT = 1,
  OCCUKIT_IO = 2,
  OCCUKIT_FORMAT = 3,
  OCCUKIT_SHAPE = 4,
  OCCUKIT_CHECK_FAILED = 5,
  OCCUKIT_INTERNAL = 6
} occukit_status;

typedef struct occukit_grid occukit_grid;
typedef struct occukit_config occukit_config;
typedef struct occukit_report occukit_report;

typedef void (*occukit_log_fn)(const char* line, void* user);

OCCUKIT_API const char* occukit_version(void);
OCCUKIT_API const char* occukit_last_error(void);

/* ---- grids ---- */
OCCUKIT_API occukit_status occukit_grid_load(const char* path, occukit_grid** out);
OCCUKIT_API occukit_status occukit_grid_save(const occukit_grid* g, const char* path);
OCCUKIT_API void occukit_grid_free(occukit_grid* g);
/* dims = {NX, NY, NZ} */
OCCUKIT_API occukit_status occukit_grid_dims(const occukit_grid* g, uint32_t dims[3]);
OCCUKIT_API occukit_status occukit_grid_class_count(const occukit_grid* g, uint32_t* out);
/* Borrowed pointer to NX*NY*NZ labels in ((ix*NY)+iy)*NZ+iz order. */
OCCUKIT_API occukit_status occukit_grid_labels(const occukit_grid* g, const uint8_t** labels, size_t* count);
OCCUKIT_API occukit_status occukit_grid_dump_bev_pgm(const occukit_grid* g, const char* path);

/* ---- configuration ---- */
/* path == NULL yields the defaults (OmniHD grid and class table). */
OCCUKIT_API occukit_status occukit_config_load(const char* path, occukit_config** out);
OCCUKIT_API void occukit_config_free(occukit_config* cfg);
OCCUKIT_API occukit_status occukit_config_seed(const occukit_config* cfg, uint64_t* seed);

/* ---- commands ---- */
OCCUKIT_API occukit_status occukit_gen_labels(const occukit_config* cfg, const char* scene_dir, occukit_grid** out,
                                              occukit_log_fn log, void* user);
/* Majority-label voxelization of a labeled MOPC (or .csv) cloud on the
 * configured grid. */
OCCUKIT_API occukit_status occukit_voxelize_cloud(const occukit_config* cfg, const char* cloud_path,
                                                  occukit_grid** out);

/* ignore may be NULL when n_ignore == 0. */
OCCUKIT_API occukit_status occukit_evaluate(const occukit_grid* pred, const occukit_grid* gt, const uint8_t* ignore,
                                            size_t n_ignore, occukit_report** out);
OCCUKIT_API double occukit_report_sc_iou(const occukit_report* r);
OCCUKIT_API double occukit_report_miou(const occukit_report* r);
/* Writes the IoU of class `cls` to *iou; returns OCCUKIT_OK with *present = 0
 * when the class appears in neither grid. */
OCCUKIT_API occukit_status occukit_report_class_iou(const occukit_report* r, uint32_t cls, double* iou, int* present);
/* JSON report using the configured class names (cfg may be NULL). */
OCCUKIT_API occukit_status occukit_report_write_json(const occukit_report* r, const occukit_config* cfg,
                                                     const char* path);
OCCUKIT_API void occukit_report_free(occukit_report* r);

/* weights_path == NULL uses weights initialized from the config seed.
 * frames == 0 keeps the configured frame count. prob_dump_path may be NULL. */
OCCUKIT_API occukit_status occukit_fuse_demo(const occukit_config* cfg, const char* weights_path, const char* scene_dir,
                                             uint32_t frames, occukit_grid** out, const char* prob_dump_path);
/* Writes freshly initialized fusion weights for the configured shapes
 * (frames == 0 keeps the configured frame count). */
OCCUKIT_API occukit_status occukit_weights_init(const occukit_config* cfg, uint64_t seed, uint32_t frames,
                                                const char* path);

typedef struct occukit_gradcheck_result {
  double ce;
  double lovasz;
  double scal_geo;
  double scal_sem;
  double total;
  uint64_t points;
} occukit_gradcheck_result;

/* Returns OCCUKIT_CHECK_FAILED (with *out filled) when any error reaches
 * the tolerance. */
OCCUKIT_API occukit_status occukit_gradcheck(uint64_t seed, uint32_t trials, occukit_gradcheck_result* out);
OCCUKIT_API double occukit_gradcheck_tolerance(void);

/* kind: "plane+car", "rain-noise" or "two-frame-motion". */
OCCUKIT_API occukit_status occukit_make_fixture(const char* kind, uint64_t seed, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* OCCUKIT_OCCUKIT_H */
