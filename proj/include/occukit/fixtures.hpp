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

// Synthetic scenes with analytically known contents.
//
//   plane+car         one frame: ground plane (class 8) around a parked car
//                     box (class 1, track 7), about 100k LiDAR points
//   rain-noise        one frame: ground, a wall (class 11) and isolated
//                     floating noise points inside the drivable region
//   two-frame-motion  two frames: ego moves 2 m forward while a car
//                     (track 3) drives 5 m forward

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "occukit/grid.hpp"
#include "occukit/pseudolabel.hpp"

namespace occukit {

/// mt19937_64 with a portable uniform double (53 high bits).
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

inline constexpr double kFixtureGroundZ = -1.75;
inline constexpr std::uint8_t kFixtureGroundClass = 8;
inline constexpr std::uint8_t kFixtureWallClass = 11;
inline constexpr std::uint8_t kFixtureCarClass = 1;

/// Vertical axis-aligned rectangle: the plane {axis = value} over
/// [lo, hi] on the other horizontal axis and [zlo, zhi].
struct FixtureWall {
  int axis = 0;  // 0: x = value, 1: y = value
  double value = 0, lo = 0, hi = 0, zlo = 0, zhi = 0;
  std::uint8_t cls = kFixtureWallClass;
};

struct Fixture {
  std::string kind;
  Scene scene;
  std::vector<FixtureWall> walls;
  /// Per LiDAR point of the last frame: 1 for injected rain noise.
  std::vector<std::uint8_t> noise;
};

const std::vector<std::string>& fixture_kinds();

/// Throws Error(invalid_argument) for an unknown kind.
Fixture make_fixture(std::string_view kind, std::uint64_t seed);

/// Six 192 x 128 cameras at the ego origin looking out at yaw 0, +-60,
/// +-120 and 180 degrees.
std::vector<CameraModel> camera_ring();

/// Ray-casts every pixel center against the ground plane and the walls.
/// Hits get the surface class with confidence 0.95; misses get
/// kUnknownClass and 0. `ego_to_global` places the camera rig.
SemanticMask analytic_mask(const CameraModel& cam, const RigidPose& ego_to_global,
                           const std::vector<FixtureWall>& walls);

/// Points on the six faces of a box, pulled 1 cm inside, about `spacing`
/// apart. Positions are in the box's parent frame.
std::vector<Vec3> box_surface(const Box3D& box, double spacing);

/// Ground-truth labels of the plane+car scene on `spec`: voxels on the
/// boundary layer of the car's voxel block are car, the ground layer is
/// drivable surface, everything else is free.
VoxelGrid expected_plane_car(const GridSpec& spec, std::uint32_t class_count);

}  // namespace occukit
