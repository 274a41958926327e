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

#include "occukit/occukit.h"

#include <exception>
#include <new>
#include <string>

#include "occukit/commands.hpp"
#include "occukit/config.hpp"
#include "occukit/error.hpp"
#include "occukit/fixtures.hpp"
#include "occukit/io.hpp"
#include "occukit/metrics.hpp"
#include "occukit/weights.hpp"

struct occukit_grid {
  occukit::VoxelGrid grid;
};

struct occukit_config {
  occukit::RunConfig cfg;
};

struct occukit_report {
  occukit::EvalReport report;
};

namespace {

thread_local std::string g_last_error;

occukit_status status_of(occukit::ErrorKind k) {
  switch (k) {
    case occukit::ErrorKind::invalid_argument: return OCCUKIT_INVALID_ARGUMENT;
    case occukit::ErrorKind::shape: return OCCUKIT_SHAPE;
    case occukit::ErrorKind::io: return OCCUKIT_IO;
    case occukit::ErrorKind::format: return OCCUKIT_FORMAT;
    case occukit::ErrorKind::check_failed: return OCCUKIT_CHECK_FAILED;
  }
  return OCCUKIT_INTERNAL;
}

template <class F>
occukit_status guard(F&& f) {
  try {
    f();
    return OCCUKIT_OK;
  } catch (const occukit::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return OCCUKIT_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return OCCUKIT_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return OCCUKIT_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) occukit::fail(occukit::ErrorKind::invalid_argument, std::string(what) + " must not be NULL");
}

const occukit::RunConfig& config_or_default(const occukit_config* cfg) {
  static const occukit::RunConfig defaults;
  return cfg != nullptr ? cfg->cfg : defaults;
}

}  // namespace

extern "C" {

const char* occukit_version(void) { return "0.1.0"; }

const char* occukit_last_error(void) { return g_last_error.c_str(); }

occukit_status occukit_grid_load(const char* path, occukit_grid** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new occukit_grid{occukit::load_grid(path)};
  });
}

occukit_status occukit_grid_save(const occukit_grid* g, const char* path) {
  return guard([&] {
    need(g, "grid");
    need(path, "path");
    occukit::save_grid(g->grid, path);
  });
}

void occukit_grid_free(occukit_grid* g) { delete g; }

occukit_status occukit_grid_dims(const occukit_grid* g, uint32_t dims[3]) {
  return guard([&] {
    need(g, "grid");
    need(dims, "dims");
    for (int i = 0; i < 3; ++i) dims[i] = g->grid.spec.dims()[i];
  });
}

occukit_status occukit_grid_class_count(const occukit_grid* g, uint32_t* out) {
  return guard([&] {
    need(g, "grid");
    need(out, "out");
    *out = g->grid.class_count;
  });
}

occukit_status occukit_grid_labels(const occukit_grid* g, const uint8_t** labels, size_t* count) {
  return guard([&] {
    need(g, "grid");
    need(labels, "labels");
    need(count, "count");
    *labels = g->grid.labels.data();
    *count = g->grid.labels.size();
  });
}

occukit_status occukit_grid_dump_bev_pgm(const occukit_grid* g, const char* path) {
  return guard([&] {
    need(g, "grid");
    need(path, "path");
    occukit::save_bev_pgm(g->grid, path);
  });
}

occukit_status occukit_config_load(const char* path, occukit_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new occukit_config{path != nullptr ? occukit::load_config(path) : occukit::RunConfig{}};
  });
}

void occukit_config_free(occukit_config* cfg) { delete cfg; }

occukit_status occukit_config_seed(const occukit_config* cfg, uint64_t* seed) {
  return guard([&] {
    need(seed, "seed");
    *seed = config_or_default(cfg).seed;
  });
}

occukit_status occukit_gen_labels(const occukit_config* cfg, const char* scene_dir, occukit_grid** out,
                                  occukit_log_fn log, void* user) {
  return guard([&] {
    need(scene_dir, "scene_dir");
    need(out, "out");
    occukit::LogFn fn;
    if (log != nullptr) fn = [&](const std::string& line) { log(line.c_str(), user); };
    *out = new occukit_grid{occukit::gen_labels(config_or_default(cfg), scene_dir, fn)};
  });
}

occukit_status occukit_voxelize_cloud(const occukit_config* cfg, const char* cloud_path, occukit_grid** out) {
  return guard([&] {
    need(cloud_path, "cloud_path");
    need(out, "out");
    const occukit::fs::path p(cloud_path);
    const occukit::PointCloud cloud = p.extension() == ".csv" ? occukit::load_cloud_csv(p) : occukit::load_cloud(p);
    const auto& c = config_or_default(cfg);
    *out = new occukit_grid{occukit::voxelize_labeled(cloud, c.grid, c.class_count())};
  });
}

occukit_status occukit_evaluate(const occukit_grid* pred, const occukit_grid* gt, const uint8_t* ignore,
                                size_t n_ignore, occukit_report** out) {
  return guard([&] {
    need(pred, "pred");
    need(gt, "gt");
    need(out, "out");
    if (n_ignore > 0) need(ignore, "ignore");
    const std::span<const std::uint8_t> ig(ignore, n_ignore);
    *out = new occukit_report{occukit::evaluate(pred->grid, gt->grid, ig)};
  });
}

double occukit_report_sc_iou(const occukit_report* r) { return r != nullptr ? r->report.sc_iou : 0.0; }

double occukit_report_miou(const occukit_report* r) { return r != nullptr ? r->report.miou : 0.0; }

occukit_status occukit_report_class_iou(const occukit_report* r, uint32_t cls, double* iou, int* present) {
  return guard([&] {
    need(r, "report");
    need(iou, "iou");
    need(present, "present");
    if (cls == 0 || cls >= r->report.per_class.size())
      occukit::fail(occukit::ErrorKind::invalid_argument, "class " + std::to_string(cls) + " outside the report");
    const auto& v = r->report.per_class[cls];
    *present = v.has_value() ? 1 : 0;
    *iou = v.value_or(0.0);
  });
}

occukit_status occukit_report_write_json(const occukit_report* r, const occukit_config* cfg, const char* path) {
  return guard([&] {
    need(r, "report");
    need(path, "path");
    const auto& c = config_or_default(cfg);
    occukit::write_text_atomic(path, occukit::eval_report_json(r->report, c.class_names));
  });
}

void occukit_report_free(occukit_report* r) { delete r; }

occukit_status occukit_fuse_demo(const occukit_config* cfg, const char* weights_path, const char* scene_dir,
                                 uint32_t frames, occukit_grid** out, const char* prob_dump_path) {
  return guard([&] {
    need(scene_dir, "scene_dir");
    need(out, "out");
    const auto& c = config_or_default(cfg);
    occukit::FusionConfig fc = c.fusion;
    if (frames != 0) fc.frames = frames;
    const occukit::BlockWeights w =
        weights_path != nullptr ? occukit::load_weights(weights_path) : occukit::init_weights(fc, c.seed);
    const occukit::Scene scene = occukit::load_scene(scene_dir);
    auto result = occukit::fuse_demo(c, w, scene, frames);
    if (prob_dump_path != nullptr) occukit::save_probabilities(result.probs, result.grid.spec, prob_dump_path);
    *out = new occukit_grid{std::move(result.grid)};
  });
}

occukit_status occukit_weights_init(const occukit_config* cfg, uint64_t seed, uint32_t frames, const char* path) {
  return guard([&] {
    need(path, "path");
    occukit::FusionConfig fc = config_or_default(cfg).fusion;
    if (frames != 0) fc.frames = frames;
    occukit::save_weights(occukit::init_weights(fc, seed), path);
  });
}

occukit_status occukit_gradcheck(uint64_t seed, uint32_t trials, occukit_gradcheck_result* out) {
  return guard([&] {
    need(out, "out");
    const auto r = occukit::gradcheck(seed, trials);
    *out = {r.ce, r.lovasz, r.scal_geo, r.scal_sem, r.total, r.points};
    if (!r.passed())
      occukit::fail(occukit::ErrorKind::check_failed,
                    "gradient check failed: worst relative error " + std::to_string(r.worst()));
  });
}

double occukit_gradcheck_tolerance(void) { return occukit::kGradcheckTolerance; }

occukit_status occukit_make_fixture(const char* kind, uint64_t seed, const char* out_dir) {
  return guard([&] {
    need(kind, "kind");
    need(out_dir, "out_dir");
    occukit::save_scene(occukit::make_fixture(kind, seed).scene, out_dir);
  });
}

}  // extern "C"
