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

#include <Eigen/Core>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occukit/grid.hpp"
#include "occukit/point_cloud.hpp"

namespace occukit {

using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Proper rigid transform p' = R p + t.
class RigidPose {
 public:
  RigidPose() = default;
  RigidPose(const Mat3& rotation, const Vec3& translation);

  /// Accepts a 4x4 homogeneous matrix; rejects non-orthonormal rotation
  /// blocks (|R R^T - I| > tol), det(R) < 0 or a bad last row.
  static RigidPose from_matrix(const Mat4& m, double tol = 1e-9);
  /// 16 numbers, row-major.
  static RigidPose from_row_major(std::span<const double> m, double tol = 1e-9);
  static RigidPose translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  /// Rotation about +Z by `yaw` radians followed by translation.
  static RigidPose from_yaw(double yaw, const Vec3& t);

  const Mat3& rotation() const { return r_; }
  const Vec3& translation() const { return t_; }
  Mat4 matrix() const;
  std::array<double, 16> row_major() const;

  Vec3 apply(const Vec3& p) const { return r_ * p + t_; }
  RigidPose inverse() const;
  /// (*this) * rhs: apply rhs first.
  RigidPose operator*(const RigidPose& rhs) const;

 private:
  Mat3 r_ = Mat3::Identity();
  Vec3 t_ = Vec3::Zero();
};

/// Transforms positions; every other channel is carried over unchanged.
PointCloud transform_points(const PointCloud& pts, const RigidPose& pose);

struct Projection {
  double u = 0.0;      // pixels
  double v = 0.0;      // pixels
  double depth = 0.0;  // meters along the optical axis
};

/// Zero-skew pinhole camera. Extrinsics map ego coordinates into the camera
/// frame (x right, y down, z forward).
struct CameraModel {
  std::string name;
  std::uint32_t width = 0, height = 0;
  double fx = 0, fy = 0, cx = 0, cy = 0;
  RigidPose extrinsics;

  /// fx, fy > 0 and the principal point inside the image.
  void validate() const;
  /// Empty when the point is behind the camera or lands outside
  /// [0,width) x [0,height).
  std::optional<Projection> project(const Vec3& p_ego) const;
  /// Camera-frame point for a pixel at the given depth.
  Vec3 unproject(double u, double v, double depth) const;
};

std::vector<std::optional<Projection>> project_to_image(const PointCloud& pts, const CameraModel& cam);

/// Continuous cell coordinates; integer values sit on cell centers.
using GridPos3 = std::array<double, 3>;  // (h, w, z) into a FeatureVolume
using GridPos2 = std::array<double, 2>;  // (h, w) into a FeaturePlane

struct Samples {
  std::size_t channels = 0;
  std::vector<double> values;        // positions x channels, row-major
  std::vector<std::uint8_t> outside;  // 1 when the position left the valid cube
  std::span<const double> row(std::size_t i) const { return {values.data() + i * channels, channels}; }
};

/// Trilinear interpolation of the 8 surrounding cells. Positions outside
/// [0, dim-1] on any axis yield zeros and a set `outside` flag.
Samples trilinear_sample(const FeatureVolume& vol, std::span<const GridPos3> positions);

/// Bilinear analogue of trilinear_sample.
Samples bilinear_sample(const FeaturePlane& plane, std::span<const GridPos2> positions);

/// Single-position bilinear sample written into `out` (plane.channels
/// entries). Returns false (and zero-fills) when outside.
bool bilinear_at(const FeaturePlane& plane, const GridPos2& pos, std::span<double> out);

}  // namespace occukit
