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

#pragma once

// Command implementations shared by the C API and the CLI.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "occukit/config.hpp"
#include "occukit/grid.hpp"
#include "occukit/metrics.hpp"
#include "occukit/pseudolabel.hpp"
#include "occukit/weights.hpp"

namespace occukit {

namespace fs = std::filesystem;

using LogFn = std::function<void(const std::string&)>;

/// Index of the target frame: cfg.current_frame or the last frame.
std::size_t target_frame(const RunConfig& cfg, const Scene& scene);

VoxelGrid gen_labels(const RunConfig& cfg, const fs::path& scene_dir, const LogFn& log = {},
                     PipelineStats* stats = nullptr);

/// Majority-label voxelization of a labeled cloud; kUnknownClass points are
/// dropped first.
VoxelGrid voxelize_labeled(const PointCloud& cloud, const GridSpec& spec, std::uint32_t class_count);

/// {"sc_iou", "miou", "per_class": {name: iou | null}}
std::string eval_report_json(const EvalReport& r, std::span<const std::string> class_names);

/// Camera feature plane of one mask: one-hot of (class mod channels) scaled
/// by the confidence, average-pooled over blocks of `stride` pixels.
FeaturePlane mask_features(const SemanticMask& m, std::size_t channels, std::size_t stride = 8);

struct FuseDemoResult {
  VoxelGrid grid;
  ClassProbabilities probs;  // GridSpec linear order
};

/// Runs the fusion forward pass over cfg.demo_grid(). Uses the last
/// `frames` frames ending at the target (the oldest repeated when the scene
/// is shorter); frames = 0 means cfg.fusion.frames.
FuseDemoResult fuse_demo(const RunConfig& cfg, const BlockWeights& w, const Scene& scene, std::size_t frames = 0);

inline constexpr double kGradcheckStep = 1e-6;
inline constexpr double kGradcheckTolerance = 1e-4;
/// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
inline constexpr double kGradcheckFloor = 1e-3;

struct GradcheckResult {
  double ce = 0, lovasz = 0, scal_geo = 0, scal_sem = 0, total = 0;  // max relative errors
  std::size_t points = 0;  // gradient entries checked per loss
  double worst() const;
  bool passed() const { return worst() < kGradcheckTolerance; }
};

/// Central finite differences against the analytic gradients on `trials`
/// random problems; every fourth problem is near one-hot. Throws
/// Error(invalid_argument) when trials == 0.
GradcheckResult gradcheck(std::uint64_t seed, std::size_t trials);

}  // namespace occukit
