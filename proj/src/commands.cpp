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

#include "occukit/commands.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "occukit/error.hpp"
#include "occukit/fixtures.hpp"
#include "occukit/fusion.hpp"
#include "occukit/io.hpp"
#include "occukit/losses.hpp"

namespace occukit {

std::size_t target_frame(const RunConfig& cfg, const Scene& scene) {
  if (scene.frames.empty()) fail(ErrorKind::invalid_argument, "scene has no frames");
  if (!cfg.current_frame) return scene.frames.size() - 1;
  for (std::size_t i = 0; i < scene.frames.size(); ++i)
    if (scene.frames[i].id == *cfg.current_frame) return i;
  fail(ErrorKind::invalid_argument, "current_frame '" + *cfg.current_frame + "' is not in the scene");
}

VoxelGrid gen_labels(const RunConfig& cfg, const fs::path& scene_dir, const LogFn& log, PipelineStats* stats) {
  const Scene scene = load_scene(scene_dir);
  const std::size_t current = target_frame(cfg, scene);
  PipelineStats st;
  VoxelGrid grid = run_pseudolabel_pipeline(scene, current, cfg.grid, cfg.class_count(), cfg.pseudolabel, &st);
  if (log) {
    log("frames " + std::to_string(scene.frames.size()) + ", target " + scene.frames[current].id);
    log("input " + std::to_string(st.input) + " points");
    log("extracted " + std::to_string(st.extracted) + " object points");
    log("filtered " + std::to_string(st.filtered) + " noise points");
    log("labeled " + std::to_string(st.labeled) + " static points (" + std::to_string(st.unknown) + " unknown)");
    log("dynamic " + std::to_string(st.dynamic) + " aggregated object points");
    log("voxelized " + std::to_string(st.voxelized) + " occupied voxels");
  }
  if (stats != nullptr) *stats = st;
  return grid;
}

VoxelGrid voxelize_labeled(const PointCloud& cloud, const GridSpec& spec, std::uint32_t class_count) {
  if (!cloud.has_labels()) fail(ErrorKind::invalid_argument, "voxelize needs a cloud with a class field");
  std::vector<std::size_t> known;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (cloud.label[i] != kUnknownClass) known.push_back(i);
  return voxelize_points(cloud.subset(known), spec, class_count).grid;
}

std::string eval_report_json(const EvalReport& r, std::span<const std::string> class_names) {
  if (class_names.size() != r.per_class.size())
    fail(ErrorKind::shape, "class table size does not match the evaluated grids");
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (std::size_t c = 1; c < r.per_class.size(); ++c) {
    if (r.per_class[c])
      per_class[class_names[c]] = *r.per_class[c];
    else
      per_class[class_names[c]] = nullptr;
  }
  const nlohmann::ordered_json doc = {{"sc_iou", r.sc_iou}, {"miou", r.miou}, {"per_class", per_class}};
  return doc.dump(2) + "\n";
}

FeaturePlane mask_features(const SemanticMask& m, std::size_t channels, std::size_t stride) {
  m.validate();
  if (channels == 0 || stride == 0) fail(ErrorKind::invalid_argument, "mask features need channels and stride > 0");
  const std::size_t h = (m.height + stride - 1) / stride, w = (m.width + stride - 1) / stride;
  FeaturePlane plane(channels, h, w);
  std::vector<double> count(h * w, 0.0);
  for (std::size_t v = 0; v < m.height; ++v)
    for (std::size_t u = 0; u < m.width; ++u) {
      const std::size_t cell = (v / stride) * w + u / stride;
      count[cell] += 1.0;
      const std::size_t k = v * m.width + u;
      if (m.cls[k] == kUnknownClass) continue;
      plane.at(m.cls[k] % channels, v / stride, u / stride) += m.conf[k];
    }
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t cell = 0; cell < h * w; ++cell) plane.values[c * h * w + cell] /= count[cell];
  return plane;
}

FuseDemoResult fuse_demo(const RunConfig& run, const BlockWeights& w, const Scene& scene, std::size_t frames) {
  FusionConfig cfg = run.fusion;
  if (frames != 0) cfg.frames = frames;
  cfg.validate();
  const GridSpec grid = run.demo_grid();
  if (grid.nx() != cfg.width || grid.ny() != cfg.height || grid.nz() != cfg.depth)
    fail(ErrorKind::shape, "fusion grid does not match the fusion dims");
  const std::size_t current = target_frame(run, scene);

  std::vector<FeatureVolume> volumes;
  std::vector<RigidPose> current_to_past;
  const RigidPose& pose_now = scene.frames[current].ego_to_global;
  for (std::size_t k = 0; k < cfg.frames; ++k) {
    const SceneFrame& f = scene.frames[current >= k ? current - k : 0];
    const FeatureVolume radar = rhs(pillar_encode(f.radar, grid, w, cfg), w, cfg);
    std::vector<FeaturePlane> planes;
    std::vector<CameraModel> cams;
    for (const SemanticMask& m : f.masks) {
      const auto it = std::find_if(scene.cameras.begin(), scene.cameras.end(),
                                   [&](const CameraModel& c) { return c.name == m.camera; });
      if (it == scene.cameras.end()) fail(ErrorKind::invalid_argument, "mask for unknown camera '" + m.camera + "'");
      planes.push_back(mask_features(m, cfg.image_channels));
      cams.push_back(*it);
    }
    const FeatureVolume camera = image_lift(planes, cams, grid, w, cfg);
    const LafResult fused = laf(camera, radar, w);
    volumes.push_back(gcf(fused.fused, camera, radar, w, cfg));
    if (k > 0) current_to_past.push_back(f.ego_to_global.inverse() * pose_now);
  }
  const FeatureVolume temporal = temporal_fuse(volumes, current_to_past, grid, w);
  const ClassProbabilities probs = occupancy_head(temporal, w);
  if (probs.classes != run.class_count())
    fail(ErrorKind::shape, "head output has " + std::to_string(probs.classes) + " classes, class table has " +
                               std::to_string(run.class_count()));
  return {argmax_grid(probs, grid), to_grid_order(probs, grid)};
}

// ---- gradcheck -------------------------------------------------------------

double GradcheckResult::worst() const { return std::max({ce, lovasz, scal_geo, scal_sem, total}); }

namespace {

struct Problem {
  ClassProbabilities probs;
  std::vector<std::uint8_t> labels;
};

Problem draw_problem(FixtureRng& rng, bool near_one_hot) {
  const auto n = static_cast<std::size_t>(4 + rng.next() % 13);
  const auto k = static_cast<std::size_t>(2 + rng.next() % 5);
  Problem p{ClassProbabilities(n, k), std::vector<std::uint8_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    p.labels[i] = static_cast<std::uint8_t>(rng.next() % k);
    if (near_one_hot) {
      // Mostly confident and right, sometimes confident and wrong.
      const std::size_t hot = rng.uniform() < 0.8 ? p.labels[i] : static_cast<std::size_t>(rng.next() % k);
      double rest = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        if (c == hot) continue;
        p.probs.at(i, c) = c == p.labels[i] ? rng.uniform(1e-3, 1e-2) : rng.uniform(1e-5, 1e-3);
        rest += p.probs.at(i, c);
      }
      p.probs.at(i, hot) = 1.0 - rest;
      continue;
    }
    std::vector<double> logits(k);
    for (double& l : logits) l = rng.uniform(-3.0, 3.0);
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& l : logits) z += (l = std::exp(l - mx));
    for (std::size_t c = 0; c < k; ++c) p.probs.at(i, c) = logits[c] / z;
  }
  return p;
}

/// Lovasz-softmax is piecewise linear with kinks where two voxel errors of a
/// class tie; central differences need every pair further apart than the step.
bool separated(const Problem& p) {
  std::vector<double> err(p.probs.voxels);
  for (std::size_t c = 0; c < p.probs.classes; ++c) {
    for (std::size_t i = 0; i < err.size(); ++i)
      err[i] = p.labels[i] == c ? 1.0 - p.probs.at(i, c) : p.probs.at(i, c);
    std::sort(err.begin(), err.end());
    for (std::size_t i = 1; i < err.size(); ++i)
      if (err[i] - err[i - 1] <= 4.0 * kGradcheckStep) return false;
  }
  return true;
}

Problem random_problem(FixtureRng& rng, bool near_one_hot) {
  for (;;) {
    Problem p = draw_problem(rng, near_one_hot);
    if (separated(p)) return p;
  }
}

double rel_error(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), kGradcheckFloor}); }

template <class Loss>
double check(const Problem& p, Loss&& loss) {
  const LossResult analytic = loss(p.probs);
  ClassProbabilities probe = p.probs;
  double worst = 0.0;
  for (std::size_t j = 0; j < probe.values.size(); ++j) {
    const double x = probe.values[j];
    probe.values[j] = x + kGradcheckStep;
    const double up = loss(probe).value;
    probe.values[j] = x - kGradcheckStep;
    const double down = loss(probe).value;
    probe.values[j] = x;
    const double numeric = (up - down) / (2.0 * kGradcheckStep);
    worst = std::max(worst, rel_error(analytic.gradient[j], numeric));
  }
  return worst;
}

}  // namespace

GradcheckResult gradcheck(std::uint64_t seed, std::size_t trials) {
  if (trials == 0) fail(ErrorKind::invalid_argument, "gradcheck needs at least one trial");
  FixtureRng rng(seed);
  GradcheckResult r;
  for (std::size_t t = 0; t < trials; ++t) {
    const Problem p = random_problem(rng, t % 4 == 3);
    const auto& y = p.labels;
    r.points += p.probs.values.size();
    r.ce = std::max(r.ce, check(p, [&](const ClassProbabilities& q) { return cross_entropy(q, y); }));
    r.lovasz = std::max(r.lovasz, check(p, [&](const ClassProbabilities& q) { return lovasz_softmax(q, y); }));
    r.scal_geo = std::max(r.scal_geo, check(p, [&](const ClassProbabilities& q) { return scal_geo(q, y); }));
    r.scal_sem = std::max(r.scal_sem, check(p, [&](const ClassProbabilities& q) { return scal_sem(q, y); }));
    r.total = std::max(r.total, check(p, [&](const ClassProbabilities& q) { return total_loss(q, y); }));
  }
  return r;
}

}  // namespace occukit
