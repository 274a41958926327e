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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "occukit/point_cloud.hpp"

namespace occukit {

struct Range {
  double min = 0.0;
  double max = 0.0;
  double extent() const { return max - min; }
  bool operator==(const Range&) const = default;
};

using VoxelIndex = std::array<std::uint32_t, 3>;  // (ix, iy, iz)

/// Axis-aligned metric grid. Construct through GridSpec::make so the ranges
/// are guaranteed to be exact multiples of the voxel size.
class GridSpec {
 public:
  GridSpec() = default;

  /// Throws Error(invalid_argument) unless voxel_size > 0 and every extent is
  /// a positive integer multiple of voxel_size.
  static GridSpec make(Range x, Range y, Range z, double voxel_size);

  /// x (-60,60), y (-40,40), z (-3,5) at 0.5 m: 240 x 160 x 16.
  static GridSpec omnihd();
  /// x,y (-50,50), z (-3,5) at 0.5 m: 200 x 200 x 16.
  static GridSpec nuscenes();
  /// "omnihd" or "nuscenes"; throws on anything else.
  static GridSpec preset(std::string_view name);

  const Range& x() const { return x_; }
  const Range& y() const { return y_; }
  const Range& z() const { return z_; }
  double voxel_size() const { return voxel_; }
  std::uint32_t nx() const { return dims_[0]; }
  std::uint32_t ny() const { return dims_[1]; }
  std::uint32_t nz() const { return dims_[2]; }
  const std::array<std::uint32_t, 3>& dims() const { return dims_; }
  std::size_t voxel_count() const { return std::size_t{dims_[0]} * dims_[1] * dims_[2]; }

  /// ((ix * NY) + iy) * NZ + iz
  std::size_t linear(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
    return (std::size_t{ix} * dims_[1] + iy) * dims_[2] + iz;
  }
  std::size_t linear(const VoxelIndex& i) const { return linear(i[0], i[1], i[2]); }
  VoxelIndex unlinear(std::size_t l) const;

  /// Half-open [min, max) containment on every axis, floor indexing.
  std::optional<VoxelIndex> world_to_voxel(const Vec3& p) const;
  /// min + (i + 0.5) * voxel_size
  Vec3 voxel_center(const VoxelIndex& i) const;

  bool operator==(const GridSpec&) const = default;

 private:
  Range x_, y_, z_;
  double voxel_ = 0.0;
  std::array<std::uint32_t, 3> dims_{0, 0, 0};
};

/// Dense class-id grid in GridSpec linear order. Every label is either
/// < class_count or kUnknownClass (unobserved voxels in ground-truth grids).
struct VoxelGrid {
  GridSpec spec;
  std::uint32_t class_count = 0;
  std::vector<std::uint8_t> labels;

  VoxelGrid() = default;
  VoxelGrid(const GridSpec& s, std::uint32_t classes)
      : spec(s), class_count(classes), labels(s.voxel_count(), kFreeClass) {}

  std::uint8_t at(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
    return labels[spec.linear(ix, iy, iz)];
  }
  std::size_t occupied_count() const;
  void validate() const;

  bool operator==(const VoxelGrid&) const = default;
};

/// Indices of the points falling into one voxel.
struct OccupiedVoxel {
  std::size_t linear = 0;
  std::vector<std::size_t> points;  // ascending
};

/// Groups points by voxel. Output is sorted by linear index; points outside
/// the grid are dropped.
std::vector<OccupiedVoxel> bin_points(std::span<const Vec3> xyz, const GridSpec& spec);

struct Voxelization {
  VoxelGrid grid;
  std::vector<OccupiedVoxel> voxels;
};

/// Majority-label voxelization (ties go to the smaller class id). Every
/// label must be < class_count.
Voxelization voxelize_points(const PointCloud& pts, const GridSpec& spec, std::uint32_t class_count);

/// Dense C x H x W x Z tensor, index ((c*H + h)*W + w)*Z + z. When tied to a
/// GridSpec, H = NY, W = NX and Z = NZ.
struct FeatureVolume {
  std::size_t channels = 0, height = 0, width = 0, depth = 0;
  std::vector<double> values;

  FeatureVolume() = default;
  FeatureVolume(std::size_t c, std::size_t h, std::size_t w, std::size_t z)
      : channels(c), height(h), width(w), depth(z), values(c * h * w * z, 0.0) {}

  std::size_t index(std::size_t c, std::size_t h, std::size_t w, std::size_t z) const {
    return ((c * height + h) * width + w) * depth + z;
  }
  double& at(std::size_t c, std::size_t h, std::size_t w, std::size_t z) { return values[index(c, h, w, z)]; }
  double at(std::size_t c, std::size_t h, std::size_t w, std::size_t z) const { return values[index(c, h, w, z)]; }
  std::size_t cells() const { return height * width * depth; }
  bool same_shape(const FeatureVolume& o) const {
    return channels == o.channels && height == o.height && width == o.width && depth == o.depth;
  }
  bool all_finite() const;
};

/// Dense C x H x W tensor, index (c*H + h)*W + w.
struct FeaturePlane {
  std::size_t channels = 0, height = 0, width = 0;
  std::vector<double> values;

  FeaturePlane() = default;
  FeaturePlane(std::size_t c, std::size_t h, std::size_t w) : channels(c), height(h), width(w), values(c * h * w, 0.0) {}

  std::size_t index(std::size_t c, std::size_t h, std::size_t w) const { return (c * height + h) * width + w; }
  double& at(std::size_t c, std::size_t h, std::size_t w) { return values[index(c, h, w)]; }
  double at(std::size_t c, std::size_t h, std::size_t w) const { return values[index(c, h, w)]; }
  bool same_shape(const FeaturePlane& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
  bool all_finite() const;
};

/// Per-voxel class distributions, voxel-major (classes contiguous).
struct ClassProbabilities {
  std::size_t voxels = 0, classes = 0;
  std::vector<double> values;

  ClassProbabilities() = default;
  ClassProbabilities(std::size_t n, std::size_t k) : voxels(n), classes(k), values(n * k, 0.0) {}

  double& at(std::size_t i, std::size_t c) { return values[i * classes + c]; }
  double at(std::size_t i, std::size_t c) const { return values[i * classes + c]; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * classes, classes}; }
};

/// Height-to-channel: output channel c * Z + z holds input (c, :, :, z).
FeaturePlane h2c(const FeatureVolume& v);
/// Channel-to-height, the exact inverse of h2c. Throws Error(shape,
/// "bad C2H shape") when the channel count is not divisible by depth.
FeatureVolume c2h(const FeaturePlane& p, std::size_t depth);

}  // namespace occukit
