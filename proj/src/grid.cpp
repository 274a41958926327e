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

#include "occukit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "occukit/error.hpp"

namespace occukit {

namespace {

std::uint32_t axis_count(const Range& r, double voxel, const char* axis) {
  const double extent = r.extent();
  if (!std::isfinite(r.min) || !std::isfinite(r.max) || !(extent > 0.0))
    fail(ErrorKind::invalid_argument, std::string("grid ") + axis + " range must satisfy min < max");
  const double n = std::round(extent / voxel);
  if (n < 1.0 || std::abs(n * voxel - extent) > 1e-9 * std::max(1.0, std::abs(extent)))
    fail(ErrorKind::invalid_argument,
         std::string("grid ") + axis + " extent is not a positive multiple of the voxel size");
  if (n > 1e6) fail(ErrorKind::invalid_argument, std::string("grid ") + axis + " has too many voxels");
  return static_cast<std::uint32_t>(n);
}

std::optional<std::uint32_t> axis_index(double p, const Range& r, double voxel, std::uint32_t n) {
  if (!(p >= r.min && p < r.max)) return std::nullopt;
  const double k = std::floor((p - r.min) / voxel);
  return static_cast<std::uint32_t>(std::min<double>(k, n - 1));
}

}  // namespace

GridSpec GridSpec::make(Range x, Range y, Range z, double voxel_size) {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size))
    fail(ErrorKind::invalid_argument, "voxel size must be positive");
  GridSpec g;
  g.voxel_ = voxel_size;
  g.dims_ = {axis_count(x, voxel_size, "x"), axis_count(y, voxel_size, "y"), axis_count(z, voxel_size, "z")};
  // Snap max so that dims * voxel_size == extent holds exactly.
  x.max = x.min + g.dims_[0] * voxel_size;
  y.max = y.min + g.dims_[1] * voxel_size;
  z.max = z.min + g.dims_[2] * voxel_size;
  g.x_ = x;
  g.y_ = y;
  g.z_ = z;
  return g;
}

GridSpec GridSpec::omnihd() { return make({-60, 60}, {-40, 40}, {-3, 5}, 0.5); }

GridSpec GridSpec::nuscenes() { return make({-50, 50}, {-50, 50}, {-3, 5}, 0.5); }

GridSpec GridSpec::preset(std::string_view name) {
  if (name == "omnihd") return omnihd();
  if (name == "nuscenes") return nuscenes();
  fail(ErrorKind::invalid_argument, "unknown grid preset '" + std::string(name) + "'");
}

VoxelIndex GridSpec::unlinear(std::size_t l) const {
  const auto iz = static_cast<std::uint32_t>(l % dims_[2]);
  l /= dims_[2];
  const auto iy = static_cast<std::uint32_t>(l % dims_[1]);
  const auto ix = static_cast<std::uint32_t>(l / dims_[1]);
  return {ix, iy, iz};
}

std::optional<VoxelIndex> GridSpec::world_to_voxel(const Vec3& p) const {
  auto ix = axis_index(p.x(), x_, voxel_, dims_[0]);
  if (!ix) return std::nullopt;
  auto iy = axis_index(p.y(), y_, voxel_, dims_[1]);
  if (!iy) return std::nullopt;
  auto iz = axis_index(p.z(), z_, voxel_, dims_[2]);
  if (!iz) return std::nullopt;
  return VoxelIndex{*ix, *iy, *iz};
}

Vec3 GridSpec::voxel_center(const VoxelIndex& i) const {
  return {x_.min + (i[0] + 0.5) * voxel_, y_.min + (i[1] + 0.5) * voxel_, z_.min + (i[2] + 0.5) * voxel_};
}

std::size_t VoxelGrid::occupied_count() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](std::uint8_t l) { return l != kFreeClass; }));
}

void VoxelGrid::validate() const {
  if (labels.size() != spec.voxel_count())
    fail(ErrorKind::shape, "grid label count " + std::to_string(labels.size()) + " does not match dims");
  if (class_count == 0 || class_count > 255) fail(ErrorKind::invalid_argument, "class count must be in [1, 255]");
  for (std::uint8_t l : labels)
    if (l >= class_count && l != kUnknownClass)
      fail(ErrorKind::invalid_argument, "grid label " + std::to_string(l) + " exceeds class count");
}

std::vector<OccupiedVoxel> bin_points(std::span<const Vec3> xyz, const GridSpec& spec) {
  std::vector<std::pair<std::size_t, std::size_t>> keyed;  // (linear, point)
  keyed.reserve(xyz.size());
  for (std::size_t i = 0; i < xyz.size(); ++i)
    if (auto v = spec.world_to_voxel(xyz[i])) keyed.emplace_back(spec.linear(*v), i);
  std::sort(keyed.begin(), keyed.end());

  std::vector<OccupiedVoxel> out;
  for (const auto& [lin, pt] : keyed) {
    if (out.empty() || out.back().linear != lin) out.push_back({lin, {}});
    out.back().points.push_back(pt);
  }
  return out;
}

Voxelization voxelize_points(const PointCloud& pts, const GridSpec& spec, std::uint32_t class_count) {
  if (class_count == 0 || class_count > 255) fail(ErrorKind::invalid_argument, "class count must be in [1, 255]");
  if (!pts.empty() && !pts.has_labels()) fail(ErrorKind::invalid_argument, "voxelization needs class labels");
  pts.validate();
  for (std::uint8_t l : pts.label)
    if (l >= class_count)
      fail(ErrorKind::invalid_argument, "point label " + std::to_string(l) + " exceeds class count");

  Voxelization out{VoxelGrid(spec, class_count), bin_points(pts.xyz, spec)};
  std::vector<std::uint32_t> counts(class_count);
  for (const auto& vox : out.voxels) {
    std::fill(counts.begin(), counts.end(), 0u);
    for (std::size_t p : vox.points) ++counts[pts.label[p]];
    // max_element returns the first maximum, i.e. the smallest class id.
    const auto best = std::max_element(counts.begin(), counts.end()) - counts.begin();
    out.grid.labels[vox.linear] = static_cast<std::uint8_t>(best);
  }
  return out;
}

bool FeatureVolume::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

bool FeaturePlane::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

FeaturePlane h2c(const FeatureVolume& v) {
  FeaturePlane p(v.channels * v.depth, v.height, v.width);
  for (std::size_t c = 0; c < v.channels; ++c)
    for (std::size_t h = 0; h < v.height; ++h)
      for (std::size_t w = 0; w < v.width; ++w)
        for (std::size_t z = 0; z < v.depth; ++z) p.at(c * v.depth + z, h, w) = v.at(c, h, w, z);
  return p;
}

FeatureVolume c2h(const FeaturePlane& p, std::size_t depth) {
  if (depth == 0 || p.channels % depth != 0) fail(ErrorKind::shape, "bad C2H shape");
  FeatureVolume v(p.channels / depth, p.height, p.width, depth);
  for (std::size_t c = 0; c < v.channels; ++c)
    for (std::size_t h = 0; h < v.height; ++h)
      for (std::size_t w = 0; w < v.width; ++w)
        for (std::size_t z = 0; z < depth; ++z) v.at(c, h, w, z) = p.at(c * depth + z, h, w);
  return v;
}

}  // namespace occukit
