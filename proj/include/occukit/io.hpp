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

// File formats. Binary containers are little-endian:
//   MOCG  occupancy grid         MOPC  point cloud
//   MOSM  semantic mask          MOPD  per-voxel class probabilities
// JSON: poses.json, cameras.json, boxes.json. Writes are atomic.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "occukit/geometry.hpp"
#include "occukit/grid.hpp"
#include "occukit/point_cloud.hpp"
#include "occukit/pseudolabel.hpp"

namespace occukit {

namespace fs = std::filesystem;

std::vector<std::uint8_t> encode_grid(const VoxelGrid& g);
VoxelGrid decode_grid(const std::vector<std::uint8_t>& bytes);
void save_grid(const VoxelGrid& g, const fs::path& path);
VoxelGrid load_grid(const fs::path& path);

/// Writes x, y, z plus every present channel (vx vy amp snr t, class, conf,
/// track) as f32 columns.
std::vector<std::uint8_t> encode_cloud(const PointCloud& pts);
/// Unknown fields are skipped; x, y and z are required.
PointCloud decode_cloud(const std::vector<std::uint8_t>& bytes);
void save_cloud(const PointCloud& pts, const fs::path& path);
PointCloud load_cloud(const fs::path& path);
/// Comma-separated text with a header row of MOPC field names.
PointCloud load_cloud_csv(const fs::path& path);

std::vector<std::uint8_t> encode_mask(const SemanticMask& m);
SemanticMask decode_mask(const std::vector<std::uint8_t>& bytes);
void save_mask(const SemanticMask& m, const fs::path& path);
SemanticMask load_mask(const fs::path& path);

/// "MOPD", u32 version, 3 x u32 dims, u32 classes, then f32 probabilities in
/// GridSpec linear order with classes contiguous.
void save_probabilities(const ClassProbabilities& probs, const GridSpec& spec, const fs::path& path);
ClassProbabilities load_probabilities(const fs::path& path, std::array<std::uint32_t, 3>* dims = nullptr);

struct FramePose {
  std::string frame_id;
  RigidPose ego_to_global;
};

std::vector<FramePose> load_poses(const fs::path& path);
void save_poses(const std::vector<FramePose>& poses, const fs::path& path);
std::vector<CameraModel> load_cameras(const fs::path& path);
void save_cameras(const std::vector<CameraModel>& cams, const fs::path& path);
std::vector<Box3D> load_boxes(const fs::path& path);
void save_boxes(const std::vector<Box3D>& boxes, const fs::path& path);

/// Scene directory: poses.json (frame order), cameras.json, boxes.json and
/// per frame <id>.mopc (LiDAR), <id>_<camera>.mosm for every camera and an
/// optional <id>_radar.mopc. A missing file is reported by name, checking in
/// that order.
Scene load_scene(const fs::path& dir);
void save_scene(const Scene& scene, const fs::path& dir);

/// Top-down binary PGM (P5): NX columns, NY rows with +y at the top. Each
/// pixel shows the highest non-free label of its column, scaled to
/// label * 255 / (class_count - 1); unknown voxels count as free.
void save_bev_pgm(const VoxelGrid& g, const fs::path& path);

void write_text_atomic(const fs::path& path, const std::string& text);

}  // namespace occukit
