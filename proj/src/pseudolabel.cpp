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

#include "occukit/pseudolabel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "occukit/error.hpp"
#include "occukit/parallel.hpp"
#include "spatial_hash.hpp"

namespace occukit {

void Box3D::validate() const {
  if (!(size.x() > 0.0 && size.y() > 0.0 && size.z() > 0.0) || !size.allFinite())
    fail(ErrorKind::invalid_argument, "box " + std::to_string(id) + " has a non-positive size");
  if (!center.allFinite() || !std::isfinite(yaw))
    fail(ErrorKind::invalid_argument, "box " + std::to_string(id) + " has a non-finite pose");
}

bool Box3D::contains(const Vec3& p) const {
  const double dx = p.x() - center.x(), dy = p.y() - center.y(), dz = p.z() - center.z();
  const double c = std::cos(yaw), s = std::sin(yaw);
  const double lx = c * dx + s * dy;
  const double ly = -s * dx + c * dy;
  return std::abs(lx) <= 0.5 * size.x() && std::abs(ly) <= 0.5 * size.y() && std::abs(dz) <= 0.5 * size.z();
}

void SemanticMask::validate() const {
  const std::size_t n = std::size_t{width} * height;
  if (width == 0 || height == 0) fail(ErrorKind::invalid_argument, "mask '" + camera + "' is empty");
  if (cls.size() != n || conf.size() != n) fail(ErrorKind::shape, "mask '" + camera + "' arrays do not match its size");
  for (float c : conf)
    if (!(c >= 0.0f && c <= 1.0f)) fail(ErrorKind::invalid_argument, "mask '" + camera + "' confidence outside [0,1]");
}

bool Footprint::contains(double x, double y) const {
  const double dx = x - cx, dy = y - cy;
  const double c = std::cos(yaw), s = std::sin(yaw);
  return std::abs(c * dx + s * dy) <= half_length && std::abs(-s * dx + c * dy) <= half_width;
}

bool DrivableRegion::contains(const Vec3& p) const {
  return std::any_of(parts.begin(), parts.end(), [&](const Footprint& f) { return f.contains(p.x(), p.y()); });
}

void PseudoLabelParams::validate() const {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  const auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (normal_neighbors < 3) fail(ErrorKind::invalid_argument, "normal_neighbors must be at least 3");
  if (!positive(normal_radius)) fail(ErrorKind::invalid_argument, "normal_radius must be positive");
  if (!(ground_max_angle_deg >= 0.0 && ground_max_angle_deg <= 90.0))
    fail(ErrorKind::invalid_argument, "ground_max_angle_deg must lie in [0, 90]");
  if (!nonneg(planarity_max)) fail(ErrorKind::invalid_argument, "planarity_max must be non-negative");
  if (!nonneg(ground_max_residual)) fail(ErrorKind::invalid_argument, "ground_max_residual must be non-negative");
  if (!nonneg(noise_height)) fail(ErrorKind::invalid_argument, "noise_height must be non-negative");
  if (!positive(stage2_radius)) fail(ErrorKind::invalid_argument, "stage2_radius must be positive");
  if (!nonneg(box_margin)) fail(ErrorKind::invalid_argument, "box_margin must be non-negative");
  if (!nonneg(ego_ahead) || !nonneg(ego_behind) || !positive(ego_side) || !(ego_ahead + ego_behind > 0.0))
    fail(ErrorKind::invalid_argument, "ego rectangle must have positive area");
}

ObjectSplit extract_objects(const PointCloud& pts, std::span<const Box3D> boxes) {
  for (const Box3D& b : boxes) b.validate();
  ObjectSplit out;
  out.owner.assign(pts.size(), -1);
  parallel_for(pts.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < boxes.size(); ++b) {
        if (!boxes[b].contains(pts.xyz[i])) continue;
        const double d2 = detail::squared_distance(pts.xyz[i], boxes[b].center);
        if (d2 < best) {
          best = d2;
          out.owner[i] = static_cast<std::int32_t>(b);
        }
      }
    }
  });

  std::vector<std::vector<std::size_t>> members(boxes.size());
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (out.owner[i] < 0)
      rest.push_back(i);
    else
      members[static_cast<std::size_t>(out.owner[i])].push_back(i);
  }
  out.remainder = pts.subset(rest);
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    ObjectPoints obj{boxes[b], pts.subset(members[b])};
    obj.points.label.assign(obj.points.size(), boxes[b].cls);
    obj.points.track.assign(obj.points.size(), boxes[b].track_id);
    out.objects.push_back(std::move(obj));
  }
  return out;
}

DrivableRegion drivable_region(const RigidPose& ego, std::span<const Box3D> boxes, const PseudoLabelParams& params) {
  params.validate();
  DrivableRegion region;
  const Mat3& r = ego.rotation();
  const double ego_yaw = std::atan2(r(1, 0), r(0, 0));
  const Vec3 c = ego.apply(Vec3(0.5 * (params.ego_ahead - params.ego_behind), 0.0, 0.0));
  region.parts.push_back({c.x(), c.y(), 0.5 * (params.ego_ahead + params.ego_behind), params.ego_side, ego_yaw});
  for (const Box3D& b : boxes) {
    b.validate();
    region.parts.push_back({b.center.x(), b.center.y(), 0.5 * b.size.x() + params.box_margin,
                            0.5 * b.size.y() + params.box_margin, b.yaw});
  }
  return region;
}

std::vector<PointClass> classify_noise(const PointCloud& pts, const DrivableRegion& region,
                                       const PseudoLabelParams& params) {
  params.validate();
  const std::size_t n = pts.size();
  std::vector<PointClass> cls(n, PointClass::outside_region);
  std::vector<std::uint8_t> inside(n, 0);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    inside[i] = region.contains(pts.xyz[i]);
    any = any || inside[i];
  }
  if (!any) return cls;

  const detail::SpatialHash hash(pts.xyz, params.normal_radius);
  const double cos_max = std::cos(params.ground_max_angle_deg * std::numbers::pi / 180.0);

  // Ground flags for every point, so neighbors outside the region count too.
  std::vector<std::uint8_t> ground(n, 0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto nb = hash.knn(pts.xyz[i], params.normal_neighbors, params.normal_radius);
      if (nb.size() < 3) continue;
      Vec3 mean = Vec3::Zero();
      for (const auto& q : nb) mean += pts.xyz[q.index];
      mean /= static_cast<double>(nb.size());
      Mat3 cov = Mat3::Zero();
      for (const auto& q : nb) {
        const Vec3 d = pts.xyz[q.index] - mean;
        cov += d * d.transpose();
      }
      cov /= static_cast<double>(nb.size());
      const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
      const Vec3 ev = eig.eigenvalues();
      const Vec3 normal = eig.eigenvectors().col(0);
      if (!(ev[1] > 0.0)) continue;
      const bool upright = std::abs(normal.z()) >= cos_max;
      const bool planar = ev[0] <= params.planarity_max * ev[1];
      const bool on_plane = std::abs((pts.xyz[i] - mean).dot(normal)) <= params.ground_max_residual;
      ground[i] = upright && planar && on_plane;
    }
  });

  // Second pass: a point level with the nearby first-pass ground is ground too.
  std::vector<std::uint8_t> level(n, 0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (ground[i]) continue;
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& q : hash.radius(pts.xyz[i], params.normal_radius)) {
        if (!ground[q.index]) continue;
        sum += pts.xyz[q.index].z();
        ++count;
      }
      level[i] = count > 0 && std::abs(pts.xyz[i].z() - sum / static_cast<double>(count)) <= params.ground_max_residual;
    }
  });
  for (std::size_t i = 0; i < n; ++i) ground[i] = ground[i] || level[i];

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (!inside[i]) continue;
      if (ground[i]) {
        cls[i] = PointClass::ground;
        continue;
      }
      std::size_t support = 0, ground_count = 0;
      double top = pts.xyz[i].z(), ground_sum = 0.0;
      for (const auto& q : hash.radius(pts.xyz[i], params.normal_radius)) {
        if (q.index == i) continue;
        const double z = pts.xyz[q.index].z();
        if (ground[q.index]) {
          ground_sum += z;
          ++ground_count;
        } else {
          ++support;
          top = std::max(top, z);
        }
      }
      bool noise = support < params.min_neighbors;
      if (!noise && ground_count > 0) noise = top - ground_sum / static_cast<double>(ground_count) < params.noise_height;
      cls[i] = noise ? PointClass::noise : PointClass::structure;
    }
  });
  return cls;
}

PointCloud filter_noise(const PointCloud& pts, const DrivableRegion& region, const PseudoLabelParams& params) {
  const auto cls = classify_noise(pts, region, params);
  std::vector<std::size_t> keep;
  keep.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (cls[i] != PointClass::noise) keep.push_back(i);
  return pts.subset(keep);
}

PointCloud assign_semantics(const PointCloud& pts, std::span<const SemanticMask> masks,
                            std::span<const CameraModel> cams) {
  struct View {
    const CameraModel* cam;
    const SemanticMask* mask;
  };
  std::vector<View> views;
  for (const SemanticMask& m : masks) {
    m.validate();
    const auto it = std::find_if(cams.begin(), cams.end(), [&](const CameraModel& c) { return c.name == m.camera; });
    if (it == cams.end()) fail(ErrorKind::invalid_argument, "mask for unknown camera '" + m.camera + "'");
    if (it->width != m.width || it->height != m.height)
      fail(ErrorKind::shape, "mask '" + m.camera + "' size does not match the camera");
    it->validate();
    views.push_back({&*it, &m});
  }
  std::sort(views.begin(), views.end(), [](const View& a, const View& b) { return a.cam->name < b.cam->name; });

  PointCloud out = pts;
  out.label.assign(pts.size(), kUnknownClass);
  out.conf.assign(pts.size(), 0.0f);
  parallel_for(pts.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      bool hit = false;
      float best_conf = 0.0f;
      double best_depth = 0.0;
      std::uint8_t best_cls = kUnknownClass;
      for (const View& v : views) {
        const auto pr = v.cam->project(pts.xyz[i]);
        if (!pr) continue;
        const auto px = static_cast<std::size_t>(std::floor(pr->u));
        const auto py = static_cast<std::size_t>(std::floor(pr->v));
        const std::size_t k = py * v.mask->width + px;
        const std::uint8_t c = v.mask->cls[k];
        if (c == kUnknownClass) continue;
        const float conf = v.mask->conf[k];
        // Views are in name order, so a strict comparison keeps the first name on a full tie.
        if (!hit || conf > best_conf || (conf == best_conf && pr->depth < best_depth)) {
          hit = true;
          best_conf = conf;
          best_depth = pr->depth;
          best_cls = c;
        }
      }
      out.label[i] = best_cls;
      out.conf[i] = hit ? best_conf : 0.0f;
    }
  });
  return out;
}

PointCloud aggregate_dynamic(std::span<const FrameObjects> window, const std::string& target_frame) {
  const FrameObjects* target = nullptr;
  for (const FrameObjects& f : window)
    if (f.frame_id == target_frame) target = &f;
  if (target == nullptr) fail(ErrorKind::invalid_argument, "target frame '" + target_frame + "' is not in the window");

  PointCloud out;
  for (const ObjectPoints& obj : target->objects) {
    PointCloud local;
    if (obj.box.track_id < 0) {
      local = transform_points(obj.points, obj.box.pose().inverse());
    } else {
      for (const FrameObjects& f : window)
        for (const ObjectPoints& o : f.objects)
          if (o.box.track_id == obj.box.track_id) local.append(transform_points(o.points, o.box.pose().inverse()));
    }
    PointCloud placed = transform_points(local, obj.box.pose());
    placed.label.assign(placed.size(), obj.box.cls);
    placed.track.assign(placed.size(), obj.box.track_id);
    out.append(placed);
  }
  return out;
}

PointCloud aggregate_static(std::span<const PointCloud> frames, std::span<const RigidPose> ego_to_global) {
  if (frames.size() != ego_to_global.size())
    fail(ErrorKind::invalid_argument, "aggregate_static needs one pose per frame (" + std::to_string(frames.size()) +
                                          " frames, " + std::to_string(ego_to_global.size()) + " poses)");
  PointCloud out;
  for (std::size_t f = 0; f < frames.size(); ++f) out.append(transform_points(frames[f], ego_to_global[f]));
  return out;
}

VoxelGrid staged_nearest_neighbor(std::span<const OccupiedVoxel> voxels, const PointCloud& cloud,
                                  std::span<const std::uint8_t> is_dynamic, const GridSpec& spec,
                                  std::uint32_t class_count, double stage2_radius) {
  if (is_dynamic.size() != cloud.size()) fail(ErrorKind::shape, "dynamic flags do not match the cloud");
  if (!cloud.empty() && !cloud.has_labels()) fail(ErrorKind::invalid_argument, "staged matching needs point labels");
  if (class_count == 0 || class_count > kUnknownClass)
    fail(ErrorKind::invalid_argument, "class count must lie in [1, 254]");

  std::vector<std::size_t> dynamic, labeled_static;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::uint8_t l = cloud.label[i];
    if (is_dynamic[i]) {
      if (l >= class_count) fail(ErrorKind::invalid_argument, "dynamic point " + std::to_string(i) + " has no valid class");
      dynamic.push_back(i);
    } else if (l != kUnknownClass) {
      if (l >= class_count) fail(ErrorKind::invalid_argument, "static point " + std::to_string(i) + " has class " +
                                                                   std::to_string(l) + " outside the class table");
      labeled_static.push_back(i);
    }
  }

  const double vs = spec.voxel_size();
  const detail::SpatialHash dyn_hash(cloud.xyz, vs, dynamic);
  const detail::SpatialHash static_hash(cloud.xyz, stage2_radius, labeled_static);
  // A point inside the voxel is at most half a diagonal from its center.
  const double dyn_radius = vs * std::sqrt(3.0);

  VoxelGrid grid(spec, class_count);
  parallel_for(voxels.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      const OccupiedVoxel& vox = voxels[v];
      if (vox.linear >= grid.labels.size()) fail(ErrorKind::shape, "voxel index outside the grid");
      const Vec3 center = spec.voxel_center(spec.unlinear(vox.linear));
      const bool has_dynamic =
          std::any_of(vox.points.begin(), vox.points.end(), [&](std::size_t i) { return is_dynamic[i] != 0; });
      std::uint8_t label = kFreeClass;
      if (has_dynamic) {
        const auto nb = dyn_hash.nearest(center, dyn_radius);
        label = cloud.label[nb->index];
      } else if (const auto nb = static_hash.nearest(center, stage2_radius)) {
        label = cloud.label[nb->index];
      }
      grid.labels[vox.linear] = label;
    }
  });
  return grid;
}

VoxelGrid generate_occupancy(const PointCloud& static_global, const PointCloud& dynamic_current,
                             const RigidPose& current_ego_to_global, const GridSpec& spec, std::uint32_t class_count,
                             const PseudoLabelParams& params) {
  params.validate();
  if (!dynamic_current.empty() && !dynamic_current.has_labels())
    fail(ErrorKind::invalid_argument, "dynamic points need labels");
  PointCloud cloud = transform_points(static_global, current_ego_to_global.inverse());
  if (!cloud.has_labels()) cloud.label.assign(cloud.size(), kUnknownClass);
  const std::size_t n_static = cloud.size();
  cloud.append(dynamic_current);
  std::vector<std::uint8_t> is_dynamic(cloud.size(), 0);
  std::fill(is_dynamic.begin() + static_cast<std::ptrdiff_t>(n_static), is_dynamic.end(), 1);
  const auto voxels = bin_points(cloud.xyz, spec);
  return staged_nearest_neighbor(voxels, cloud, is_dynamic, spec, class_count, params.stage2_radius);
}

VoxelGrid run_pseudolabel_pipeline(const Scene& scene, std::size_t current, const GridSpec& spec,
                                   std::uint32_t class_count, const PseudoLabelParams& params, PipelineStats* stats) {
  params.validate();
  if (current >= scene.frames.size()) fail(ErrorKind::invalid_argument, "current frame index outside the scene");
  PipelineStats st;
  std::vector<FrameObjects> window;
  std::vector<PointCloud> statics;
  std::vector<RigidPose> poses;
  for (const SceneFrame& f : scene.frames) {
    f.lidar.validate();
    st.input += f.lidar.size();
    ObjectSplit split = extract_objects(f.lidar, f.boxes);
    st.extracted += f.lidar.size() - split.remainder.size();
    const DrivableRegion region = drivable_region(RigidPose{}, f.boxes, params);
    PointCloud kept = filter_noise(split.remainder, region, params);
    st.filtered += split.remainder.size() - kept.size();
    PointCloud labeled = assign_semantics(kept, f.masks, scene.cameras);
    for (std::uint8_t l : labeled.label) {
      if (l == kUnknownClass)
        ++st.unknown;
      else if (l >= class_count)
        fail(ErrorKind::invalid_argument, "frame '" + f.id + "' mask class " + std::to_string(l) +
                                              " outside the class table");
      else
        ++st.labeled;
    }
    for (const Box3D& b : f.boxes)
      if (b.cls >= class_count || b.cls == kFreeClass)
        fail(ErrorKind::invalid_argument, "box " + std::to_string(b.id) + " has class " + std::to_string(b.cls) +
                                              " outside the object classes");
    window.push_back({f.id, std::move(split.objects)});
    statics.push_back(std::move(labeled));
    poses.push_back(f.ego_to_global);
  }
  const PointCloud global = aggregate_static(statics, poses);
  const PointCloud dynamic = aggregate_dynamic(window, scene.frames[current].id);
  st.dynamic = dynamic.size();
  VoxelGrid grid = generate_occupancy(global, dynamic, scene.frames[current].ego_to_global, spec, class_count, params);
  st.voxelized = grid.occupied_count();
  if (stats != nullptr) *stats = st;
  return grid;
}

}  // namespace occukit
