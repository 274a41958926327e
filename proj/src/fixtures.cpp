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

#include "occukit/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "occukit/error.hpp"

namespace occukit {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr float kMaskConfidence = 0.95f;

void add_ground(PointCloud& out, FixtureRng& rng, Range x, Range y, double spacing, const RigidPose& global_to_ego) {
  const auto nx = static_cast<std::size_t>(std::llround(x.extent() / spacing));
  const auto ny = static_cast<std::size_t>(std::llround(y.extent() / spacing));
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const Vec3 p(x.min + spacing * (static_cast<double>(i) + 0.5) + rng.uniform(-0.02, 0.02),
                   y.min + spacing * (static_cast<double>(j) + 0.5) + rng.uniform(-0.02, 0.02),
                   kFixtureGroundZ + rng.uniform(-0.02, 0.02));
      out.push_back(global_to_ego.apply(p));
    }
}

void add_wall(PointCloud& out, FixtureRng& rng, const FixtureWall& w, double spacing) {
  const auto nh = static_cast<std::size_t>(std::llround((w.hi - w.lo) / spacing));
  const auto nz = static_cast<std::size_t>(std::llround((w.zhi - w.zlo) / spacing));
  for (std::size_t i = 0; i <= nh; ++i)
    for (std::size_t k = 0; k <= nz; ++k) {
      const double along = w.lo + spacing * static_cast<double>(i);
      const double across = w.value + rng.uniform(-0.005, 0.005);
      const double z = w.zlo + spacing * static_cast<double>(k);
      out.push_back(w.axis == 0 ? Vec3(across, along, z) : Vec3(along, across, z));
    }
}

void add_radar(PointCloud& radar, FixtureRng& rng, const Vec3& p, double vx, double vy) {
  radar.push_back(p);
  radar.vx.push_back(vx);
  radar.vy.push_back(vy);
  radar.amp.push_back(rng.uniform(0.5, 1.0));
  radar.snr.push_back(rng.uniform(5.0, 20.0));
  radar.t.push_back(0.0);
}

/// Ground clutter plus every 8th object point, in the ego frame.
PointCloud make_radar(FixtureRng& rng, const std::vector<Vec3>& object_pts, double vx, double vy) {
  PointCloud radar;
  for (int i = 0; i < 300; ++i)
    add_radar(radar, rng, Vec3(rng.uniform(-24.0, 24.0), rng.uniform(-16.0, 16.0), kFixtureGroundZ), 0.0, 0.0);
  for (std::size_t i = 0; i < object_pts.size(); i += 8) add_radar(radar, rng, object_pts[i], vx, vy);
  return radar;
}

void add_masks(SceneFrame& f, const std::vector<CameraModel>& cams, const std::vector<FixtureWall>& walls) {
  for (const CameraModel& c : cams) f.masks.push_back(analytic_mask(c, f.ego_to_global, walls));
}

Fixture plane_car(std::uint64_t seed) {
  FixtureRng rng(seed);
  Fixture fx;
  fx.kind = "plane+car";
  fx.scene.cameras = camera_ring();
  SceneFrame f;
  f.id = "000";
  add_ground(f.lidar, rng, {-40.0, 40.0}, {-25.0, 25.0}, 0.2, RigidPose{});
  Box3D car;
  car.id = 1;
  car.track_id = 7;
  car.cls = kFixtureCarClass;
  car.center = Vec3(6.25, 2.0, -0.75);
  car.size = Vec3(4.5, 2.0, 1.5);
  car.frame_id = f.id;
  const auto surface = box_surface(car, 0.1);
  for (const Vec3& p : surface) f.lidar.push_back(p);
  f.boxes.push_back(car);
  f.radar = make_radar(rng, surface, 0.0, 0.0);
  add_masks(f, fx.scene.cameras, fx.walls);
  fx.noise.assign(f.lidar.size(), 0);
  fx.scene.frames.push_back(std::move(f));
  return fx;
}

Fixture rain_noise(std::uint64_t seed) {
  FixtureRng rng(seed);
  Fixture fx;
  fx.kind = "rain-noise";
  fx.scene.cameras = camera_ring();
  fx.walls.push_back({0, 10.25, -5.0, 5.0, kFixtureGroundZ, 1.25, kFixtureWallClass});
  SceneFrame f;
  f.id = "000";
  add_ground(f.lidar, rng, {-30.0, 30.0}, {-15.0, 15.0}, 0.2, RigidPose{});
  add_wall(f.lidar, rng, fx.walls[0], 0.1);
  const std::size_t clean = f.lidar.size();

  std::vector<Vec3> noise;
  for (int attempt = 0; attempt < 100000 && noise.size() < 200; ++attempt) {
    const Vec3 p(rng.uniform(-25.0, 25.0), rng.uniform(-8.0, 8.0), kFixtureGroundZ + rng.uniform(0.15, 1.2));
    if (std::abs(p.x() - 10.25) < 1.5 && std::abs(p.y()) < 6.5) continue;
    const bool crowded = std::any_of(noise.begin(), noise.end(), [&](const Vec3& q) {
      return std::hypot(p.x() - q.x(), p.y() - q.y()) < 1.2;
    });
    if (!crowded) noise.push_back(p);
  }
  for (const Vec3& p : noise) f.lidar.push_back(p);
  fx.noise.assign(f.lidar.size(), 0);
  std::fill(fx.noise.begin() + static_cast<std::ptrdiff_t>(clean), fx.noise.end(), 1);
  f.radar = make_radar(rng, {}, 0.0, 0.0);
  add_masks(f, fx.scene.cameras, fx.walls);
  fx.scene.frames.push_back(std::move(f));
  return fx;
}

Fixture two_frame_motion(std::uint64_t seed) {
  FixtureRng rng(seed);
  Fixture fx;
  fx.kind = "two-frame-motion";
  fx.scene.cameras = camera_ring();
  const double ego_x[2] = {0.0, 2.0};
  const double car_x[2] = {10.0, 15.0};
  for (int k = 0; k < 2; ++k) {
    SceneFrame f;
    f.id = k == 0 ? "000" : "001";
    f.ego_to_global = RigidPose::translation(Vec3(ego_x[k], 0.0, 0.0));
    const RigidPose to_ego = f.ego_to_global.inverse();
    add_ground(f.lidar, rng, {-30.0, 40.0}, {-15.0, 15.0}, 0.25, to_ego);
    Box3D car;
    car.id = 10 + k;
    car.track_id = 3;
    car.cls = kFixtureCarClass;
    car.center = to_ego.apply(Vec3(car_x[k], 0.0, -0.75));
    car.size = Vec3(4.5, 2.0, 1.5);
    car.frame_id = f.id;
    // Frame 0 sees the rear half of the car, frame 1 the front half.
    std::vector<Vec3> seen;
    for (const Vec3& p : box_surface(car, 0.1)) {
      const double local_x = p.x() - car.center.x();
      if (k == 0 ? local_x <= 0.0 : local_x >= 0.0) seen.push_back(p);
    }
    for (const Vec3& p : seen) f.lidar.push_back(p);
    f.boxes.push_back(car);
    f.radar = make_radar(rng, seen, 5.0, 0.0);
    add_masks(f, fx.scene.cameras, fx.walls);
    fx.scene.frames.push_back(std::move(f));
  }
  fx.noise.assign(fx.scene.frames.back().lidar.size(), 0);
  return fx;
}

}  // namespace

const std::vector<std::string>& fixture_kinds() {
  static const std::vector<std::string> kinds = {"plane+car", "rain-noise", "two-frame-motion"};
  return kinds;
}

Fixture make_fixture(std::string_view kind, std::uint64_t seed) {
  if (kind == "plane+car") return plane_car(seed);
  if (kind == "rain-noise") return rain_noise(seed);
  if (kind == "two-frame-motion") return two_frame_motion(seed);
  fail(ErrorKind::invalid_argument, "unknown fixture kind '" + std::string(kind) +
                                        "' (expected plane+car, rain-noise or two-frame-motion)");
}

std::vector<CameraModel> camera_ring() {
  const std::pair<const char*, double> rig[] = {{"front", 0.0},      {"front_left", 60.0}, {"back_left", 120.0},
                                                {"back", 180.0},     {"back_right", -120.0}, {"front_right", -60.0}};
  std::vector<CameraModel> cams;
  for (const auto& [name, yaw_deg] : rig) {
    const double c = std::cos(yaw_deg * kDeg), s = std::sin(yaw_deg * kDeg);
    Mat3 r;
    r << s, -c, 0.0,  // right
        0.0, 0.0, -1.0,  // down
        c, s, 0.0;       // forward
    CameraModel cam;
    cam.name = name;
    cam.width = 192;
    cam.height = 128;
    cam.fx = cam.fy = 55.0;
    cam.cx = 96.0;
    cam.cy = 64.0;
    cam.extrinsics = RigidPose(r, Vec3::Zero());
    cams.push_back(cam);
  }
  return cams;
}

SemanticMask analytic_mask(const CameraModel& cam, const RigidPose& ego_to_global,
                           const std::vector<FixtureWall>& walls) {
  cam.validate();
  SemanticMask m;
  m.camera = cam.name;
  m.width = cam.width;
  m.height = cam.height;
  m.cls.assign(std::size_t{cam.width} * cam.height, kUnknownClass);
  m.conf.assign(m.cls.size(), 0.0f);
  const RigidPose cam_to_global = ego_to_global * cam.extrinsics.inverse();
  const Vec3 o = cam_to_global.translation();
  for (std::uint32_t v = 0; v < cam.height; ++v)
    for (std::uint32_t u = 0; u < cam.width; ++u) {
      const Vec3 d = cam_to_global.rotation() *
                     Vec3((u + 0.5 - cam.cx) / cam.fx, (v + 0.5 - cam.cy) / cam.fy, 1.0);
      double best = std::numeric_limits<double>::infinity();
      std::uint8_t cls = kUnknownClass;
      if (d.z() < 0.0) {
        const double t = (kFixtureGroundZ - o.z()) / d.z();
        if (t > 0.0) {
          best = t;
          cls = kFixtureGroundClass;
        }
      }
      for (const FixtureWall& w : walls) {
        const double dn = d[w.axis];
        if (dn == 0.0) continue;
        const double t = (w.value - o[w.axis]) / dn;
        if (!(t > 0.0 && t < best)) continue;
        const Vec3 p = o + t * d;
        const double along = p[1 - w.axis];
        if (along >= w.lo && along <= w.hi && p.z() >= w.zlo && p.z() <= w.zhi) {
          best = t;
          cls = w.cls;
        }
      }
      if (cls != kUnknownClass) {
        m.cls[std::size_t{v} * cam.width + u] = cls;
        m.conf[std::size_t{v} * cam.width + u] = kMaskConfidence;
      }
    }
  return m;
}

std::vector<Vec3> box_surface(const Box3D& box, double spacing) {
  box.validate();
  constexpr double inset = 0.01;
  const Vec3 half = 0.5 * box.size - Vec3::Constant(inset);
  const auto samples = [&](double h) {
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * h / spacing)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = -h + 2.0 * h * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
  };
  const std::array<std::vector<double>, 3> axis = {samples(half.x()), samples(half.y()), samples(half.z())};
  const RigidPose pose = box.pose();
  std::vector<Vec3> out;
  for (int fixed = 0; fixed < 3; ++fixed) {
    const int a = (fixed + 1) % 3, b = (fixed + 2) % 3;
    for (double sign : {-1.0, 1.0})
      for (double pa : axis[a])
        for (double pb : axis[b]) {
          Vec3 local;
          local[fixed] = sign * half[fixed];
          local[a] = pa;
          local[b] = pb;
          out.push_back(pose.apply(local));
        }
  }
  return out;
}

VoxelGrid expected_plane_car(const GridSpec& spec, std::uint32_t class_count) {
  VoxelGrid g(spec, class_count);
  const double vs = spec.voxel_size();
  const Vec3 lo(4.0 + 0.01, 1.0 + 0.01, -1.5 + 0.01), hi(8.5 - 0.01, 3.0 - 0.01, 0.0 - 0.01);
  for (std::uint32_t ix = 0; ix < spec.nx(); ++ix)
    for (std::uint32_t iy = 0; iy < spec.ny(); ++iy)
      for (std::uint32_t iz = 0; iz < spec.nz(); ++iz) {
        const Vec3 vmin(spec.x().min + ix * vs, spec.y().min + iy * vs, spec.z().min + iz * vs);
        const Vec3 vmax = vmin + Vec3::Constant(vs);
        const std::size_t l = spec.linear(ix, iy, iz);
        if (kFixtureGroundZ >= vmin.z() && kFixtureGroundZ < vmax.z() && vmin.x() >= -40.0 && vmax.x() <= 40.0 &&
            vmin.y() >= -25.0 && vmax.y() <= 25.0)
          g.labels[l] = kFixtureGroundClass;
        // The inset box surface meets the voxel when the voxel touches the
        // closed box but is not inside its open interior.
        bool touches = true, interior = true;
        for (int a = 0; a < 3; ++a) {
          touches = touches && vmin[a] <= hi[a] && vmax[a] > lo[a];
          interior = interior && vmin[a] > lo[a] && vmax[a] <= hi[a];
        }
        if (touches && !interior) g.labels[l] = kFixtureCarClass;
      }
  return g;
}

}  // namespace occukit
