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
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace occukit {

using Vec3 = Eigen::Vector3d;

/// Class id for points no camera could label.
inline constexpr std::uint8_t kUnknownClass = 255;
/// Class id reserved for free space.
inline constexpr std::uint8_t kFreeClass = 0;

/// Struct-of-arrays point cloud. Positions are mandatory; every other channel
/// is either empty (absent) or has exactly size() entries.
struct PointCloud {
  std::vector<Vec3> xyz;

  // radar channels
  std::vector<double> vx, vy, amp, snr, t;

  // semantics
  std::vector<std::uint8_t> label;
  std::vector<float> conf;
  std::vector<std::int32_t> track;

  std::size_t size() const { return xyz.size(); }
  bool empty() const { return xyz.empty(); }
  bool has_radar() const { return !vx.empty(); }
  bool has_labels() const { return !label.empty(); }
  bool has_conf() const { return !conf.empty(); }
  bool has_track() const { return !track.empty(); }

  /// Throws Error(invalid_argument) when a present channel has the wrong
  /// length, a position is non-finite or a confidence is outside [0,1].
  void validate() const;

  /// Copy of the points at `indices`, channels preserved.
  PointCloud subset(std::span<const std::size_t> indices) const;

  /// Appends `other`. Channels present on only one side are padded
  /// (labels with kUnknownClass, confidences with 0, tracks with -1,
  /// radar channels with 0).
  void append(const PointCloud& other);

  void push_back(const Vec3& p) { xyz.push_back(p); }
};

}  // namespace occukit
