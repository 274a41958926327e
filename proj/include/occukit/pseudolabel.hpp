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

// Pseudo-occupancy-label generation from LiDAR sweeps, 3D boxes and
// per-camera semantic masks.
//
//   per frame:  extract_objects -> drivable_region -> filter_noise
//               -> assign_semantics
//   sequence:   aggregate_dynamic (by track id), aggregate_static (global)
//   output:     generate_occupancy = voxelize + staged_nearest_neighbor

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "occukit/geometry.hpp"
#include "occukit/grid.hpp"
#include "occukit/point_cloud.hpp"

namespace occukit {

struct Box3D {
  std::int32_t id = 0;
  std::int32_t track_id = -1;
  std::uint8_t cls = 0;
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();  // (l, w, h)
  double yaw = 0.0;          // about +Z
  std::string frame_id;

  void validate() const;
  /// Box frame (origin at the center, x along the heading) to parent frame.
  RigidPose pose() const { return RigidPose::from_yaw(yaw, center); }
  /// Closed containment after undoing the yaw.
  bool contains(const Vec3& p) const;
};

struct SemanticMask {
  std::string camera;
  std::uint32_t width = 0, height = 0;
  std::vector<std::uint8_t> cls;  // row-major, v * width + u
  std::vector<float> conf;

  void validate() const;
};

/// Yawed rectangle on the ground plane.
struct Footprint {
  double cx = 0, cy = 0;
  double half_length = 0, half_width = 0;
  double yaw = 0;
  bool contains(double x, double y) const;
};

/// Union of footprints; containment ignores height.
struct DrivableRegion {
  std::vector<Footprint> parts;
  bool contains(const Vec3& p) const;
};

/// Every threshold of the pipeline.
struct PseudoLabelParams {
  std::size_t normal_neighbors = 16;   // k for PCA normals
  double normal_radius = 1.0;          // m, neighbor search radius
  double ground_max_angle_deg = 25.0;  // normal cone around +Z
  double planarity_max = 0.1;          // lambda_min / lambda_mid
  double ground_max_residual = 0.08;   // m, point-to-local-plane distance
  double noise_height = 0.3;           // m, minimum structure height above ground
  std::size_t min_neighbors = 4;       // non-ground support below this is noise
  double stage2_radius = 2.0;          // m, static label search radius
  double box_margin = 1.5;             // m, footprint dilation
  double ego_ahead = 30.0;             // m
  double ego_behind = 30.0;            // m
  double ego_side = 10.0;              // m, each side

  void validate() const;
};

struct ObjectPoints {
  Box3D box;
  PointCloud points;  // labeled with the box class and track id
};

struct ObjectSplit {
  std::vector<ObjectPoints> objects;  // one entry per box, in box order
  PointCloud remainder;               // points in no box
  std::vector<std::int32_t> owner;    // per input point: box position or -1
};

/// Splits a sweep into per-box point sets and the static remainder. A point
/// inside several boxes goes to the box with the nearest center.
ObjectSplit extract_objects(const PointCloud& pts, std::span<const Box3D> boxes);

/// Ego rectangle (ahead/behind/side around `ego`) plus every box footprint
/// dilated by the margin. Boxes are in the same frame as `ego`.
DrivableRegion drivable_region(const RigidPose& ego, std::span<const Box3D> boxes, const PseudoLabelParams& params);

enum class PointClass : std::uint8_t { outside_region, ground, structure, noise };

/// Rain-noise classification of every point (see filter_noise).
std::vector<PointClass> classify_noise(const PointCloud& pts, const DrivableRegion& region,
                                       const PseudoLabelParams& params);

/// Drops rain noise inside the drivable region. A point there is ground when
/// its k-neighborhood normal lies within the cone, the neighborhood is planar
/// and the point sits on that plane, or when it lies within the residual of
/// the mean height of such ground points within the radius. A non-ground point is noise when fewer
/// than min_neighbors non-ground points lie within the radius, or when the
/// local structure (the point plus those neighbors) tops out less than
/// noise_height above the mean height of nearby ground. Points outside the
/// region are never removed.
PointCloud filter_noise(const PointCloud& pts, const DrivableRegion& region, const PseudoLabelParams& params);

/// Labels each point with the most confident mask hit over all cameras
/// (ties: smaller depth, then camera name). Unseen points get kUnknownClass
/// and confidence 0. Masks are matched to cameras by name.
PointCloud assign_semantics(const PointCloud& pts, std::span<const SemanticMask> masks,
                            std::span<const CameraModel> cams);

struct FrameObjects {
  std::string frame_id;
  std::vector<ObjectPoints> objects;
};

/// Densifies every track present in the target frame: object points from all
/// frames of the window are moved into the box frame, united and placed at
/// the track's box in the target frame. Untracked boxes (track_id < 0)
/// contribute only their own points.
PointCloud aggregate_dynamic(std::span<const FrameObjects> window, const std::string& target_frame);

/// Moves each frame's static labeled points to the global frame and
/// concatenates them. ego_to_global[i] belongs to frames[i].
PointCloud aggregate_static(std::span<const PointCloud> frames, std::span<const RigidPose> ego_to_global);

/// Two-pass labeling of occupied voxels. `voxels` bins `cloud`. Stage 1: a
/// voxel holding a dynamic point takes the label of the dynamic point
/// nearest to its center. Stage 2: other occupied voxels take the label of
/// the nearest static labeled point within `stage2_radius`, else stay free.
/// Ties go to the smaller point index.
VoxelGrid staged_nearest_neighbor(std::span<const OccupiedVoxel> voxels, const PointCloud& cloud,
                                  std::span<const std::uint8_t> is_dynamic, const GridSpec& spec,
                                  std::uint32_t class_count, double stage2_radius);

/// Brings the global static cloud into the current frame, appends the
/// aggregated dynamic points, voxelizes and runs staged matching.
VoxelGrid generate_occupancy(const PointCloud& static_global, const PointCloud& dynamic_current,
                             const RigidPose& current_ego_to_global, const GridSpec& spec, std::uint32_t class_count,
                             const PseudoLabelParams& params);

struct SceneFrame {
  std::string id;
  RigidPose ego_to_global;
  PointCloud lidar;  // ego frame
  PointCloud radar;  // ego frame, optional
  std::vector<Box3D> boxes;
  std::vector<SemanticMask> masks;
};

struct Scene {
  std::vector<CameraModel> cameras;
  std::vector<SceneFrame> frames;
};

struct PipelineStats {
  std::size_t input = 0;       // LiDAR points over all frames
  std::size_t extracted = 0;   // points inside boxes
  std::size_t filtered = 0;    // removed as rain noise
  std::size_t labeled = 0;     // static points with a camera label
  std::size_t unknown = 0;     // static points no camera saw
  std::size_t dynamic = 0;     // aggregated dynamic points in the target frame
  std::size_t voxelized = 0;   // occupied voxels
};

/// Whole pipeline for frame `current` of the scene.
VoxelGrid run_pseudolabel_pipeline(const Scene& scene, std::size_t current, const GridSpec& spec,
                                   std::uint32_t class_count, const PseudoLabelParams& params,
                                   PipelineStats* stats = nullptr);

}  // namespace occukit
