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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "occukit/grid.hpp"
#include "occukit/pseudolabel.hpp"
#include "occukit/weights.hpp"

namespace occukit {

/// free, car, pedestrian, rider, large vehicle, cycle, road obstacle,
/// traffic fence, drive. surf., sidewalk, vegetation, manmade.
const std::vector<std::string>& omnihd_class_names();

/// One JSON document. Keys (all optional, unknown keys rejected):
///   preset        "omnihd" | "nuscenes"
///   grid          {x: [min,max], y: [min,max], z: [min,max], voxel_size}
///   classes       class names, index = id, [0] must be "free"
///   pseudolabel   PseudoLabelParams fields
///   fusion        FusionConfig fields
///   fusion_grid   grid object for fuse-demo (default: 2 m voxels sized to
///                 the fusion dims, centered in x and y, z from -3)
///   seed          integer
///   current_frame frame id used as the target (default: last frame)
///   io            {scene, out, weights, report}
struct RunConfig {
  GridSpec grid = GridSpec::omnihd();
  std::vector<std::string> class_names = omnihd_class_names();
  PseudoLabelParams pseudolabel;
  FusionConfig fusion;
  std::optional<GridSpec> fusion_grid;
  std::uint64_t seed = 0;
  std::optional<std::string> current_frame;
  struct Paths {
    std::optional<std::string> scene, out, weights, report;
  } io;

  std::uint32_t class_count() const { return static_cast<std::uint32_t>(class_names.size()); }
  /// fusion_grid or the default derived from the fusion dims.
  GridSpec demo_grid() const;
  /// Checks every nested invariant.
  void validate() const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string dump_config(const RunConfig& cfg);

}  // namespace occukit
