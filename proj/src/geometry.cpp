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

#include "occukit/geometry.hpp"

#include <Eigen/LU>
#include <cmath>

#include "occukit/error.hpp"

namespace occukit {

RigidPose::RigidPose(const Mat3& rotation, const Vec3& translation) : r_(rotation), t_(translation) {}

RigidPose RigidPose::from_matrix(const Mat4& m, double tol) {
  if (!m.allFinite()) fail(ErrorKind::invalid_argument, "pose matrix has non-finite entries");
  if (std::abs(m(3, 0)) > tol || std::abs(m(3, 1)) > tol || std::abs(m(3, 2)) > tol || std::abs(m(3, 3) - 1.0) > tol)
    fail(ErrorKind::invalid_argument, "pose matrix last row must be (0,0,0,1)");
  const Mat3 r = m.block<3, 3>(0, 0);
  if ((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > tol)
    fail(ErrorKind::invalid_argument, "pose rotation block is not orthonormal");
  if (r.determinant() < 0.0) fail(ErrorKind::invalid_argument, "pose rotation block is a reflection");
  return {r, m.block<3, 1>(0, 3)};
}

RigidPose RigidPose::from_row_major(std::span<const double> m, double tol) {
  if (m.size() != 16) fail(ErrorKind::invalid_argument, "pose matrix needs 16 numbers");
  Mat4 mat;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) mat(r, c) = m[r * 4 + c];
  return from_matrix(mat, tol);
}

RigidPose RigidPose::from_yaw(double yaw, const Vec3& t) {
  Mat3 r;
  const double c = std::cos(yaw), s = std::sin(yaw);
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return {r, t};
}

Mat4 RigidPose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(0, 0) = r_;
  m.block<3, 1>(0, 3) = t_;
  return m;
}

std::array<double, 16> RigidPose::row_major() const {
  std::array<double, 16> out{};
  const Mat4 m = matrix();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out[r * 4 + c] = m(r, c);
  return out;
}

RigidPose RigidPose::inverse() const {
  const Mat3 rt = r_.transpose();
  return {rt, -(rt * t_)};
}

RigidPose RigidPose::operator*(const RigidPose& rhs) const { return {r_ * rhs.r_, r_ * rhs.t_ + t_}; }

PointCloud transform_points(const PointCloud& pts, const RigidPose& pose) {
  PointCloud out = pts;
  for (auto& p : out.xyz) p = pose.apply(p);
  return out;
}

void CameraModel::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) fail(ErrorKind::invalid_argument, "camera '" + name + "': focal lengths must be positive");
  if (width == 0 || height == 0) fail(ErrorKind::invalid_argument, "camera '" + name + "': empty image size");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height))
    fail(ErrorKind::invalid_argument, "camera '" + name + "': principal point outside the image");
}

std::optional<Projection> CameraModel::project(const Vec3& p_ego) const {
  const Vec3 pc = extrinsics.apply(p_ego);
  if (!(pc.z() > 0.0)) return std::nullopt;
  const double u = fx * pc.x() / pc.z() + cx;
  const double v = fy * pc.y() / pc.z() + cy;
  if (!(u >= 0.0 && u < width && v >= 0.0 && v < height)) return std::nullopt;
  return Projection{u, v, pc.z()};
}

Vec3 CameraModel::unproject(double u, double v, double depth) const {
  return {(u - cx) / fx * depth, (v - cy) / fy * depth, depth};
}

std::vector<std::optional<Projection>> project_to_image(const PointCloud& pts, const CameraModel& cam) {
  std::vector<std::optional<Projection>> out;
  out.reserve(pts.size());
  for (const auto& p : pts.xyz) out.push_back(cam.project(p));
  return out;
}

namespace {

struct AxisTaps {
  std::size_t i0, i1;
  double f;  // weight of i1
};

std::optional<AxisTaps> taps(double p, std::size_t n) {
  if (n == 0 || !(p >= 0.0 && p <= static_cast<double>(n - 1))) return std::nullopt;
  const double fl = std::floor(p);
  const auto i0 = static_cast<std::size_t>(fl);
  const std::size_t i1 = i0 + 1 < n ? i0 + 1 : i0;
  return AxisTaps{i0, i1, p - fl};
}

}  // namespace

Samples trilinear_sample(const FeatureVolume& vol, std::span<const GridPos3> positions) {
  Samples s{vol.channels, std::vector<double>(positions.size() * vol.channels, 0.0),
            std::vector<std::uint8_t>(positions.size(), 0)};
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto th = taps(positions[i][0], vol.height);
    const auto tw = taps(positions[i][1], vol.width);
    const auto tz = taps(positions[i][2], vol.depth);
    if (!th || !tw || !tz) {
      s.outside[i] = 1;
      continue;
    }
    const std::size_t hs[2] = {th->i0, th->i1}, ws[2] = {tw->i0, tw->i1}, zs[2] = {tz->i0, tz->i1};
    const double wh[2] = {1.0 - th->f, th->f}, ww[2] = {1.0 - tw->f, tw->f}, wz[2] = {1.0 - tz->f, tz->f};
    double* out = s.values.data() + i * vol.channels;
    for (std::size_t c = 0; c < vol.channels; ++c) {
      double acc = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int d = 0; d < 2; ++d) acc += wh[a] * ww[b] * wz[d] * vol.at(c, hs[a], ws[b], zs[d]);
      out[c] = acc;
    }
  }
  return s;
}

bool bilinear_at(const FeaturePlane& plane, const GridPos2& pos, std::span<double> out) {
  const auto th = taps(pos[0], plane.height);
  const auto tw = taps(pos[1], plane.width);
  if (!th || !tw) {
    std::fill(out.begin(), out.end(), 0.0);
    return false;
  }
  const double w00 = (1.0 - th->f) * (1.0 - tw->f), w01 = (1.0 - th->f) * tw->f;
  const double w10 = th->f * (1.0 - tw->f), w11 = th->f * tw->f;
  for (std::size_t c = 0; c < plane.channels; ++c) {
    out[c] = w00 * plane.at(c, th->i0, tw->i0) + w01 * plane.at(c, th->i0, tw->i1) +
             w10 * plane.at(c, th->i1, tw->i0) + w11 * plane.at(c, th->i1, tw->i1);
  }
  return true;
}

Samples bilinear_sample(const FeaturePlane& plane, std::span<const GridPos2> positions) {
  Samples s{plane.channels, std::vector<double>(positions.size() * plane.channels, 0.0),
            std::vector<std::uint8_t>(positions.size(), 0)};
  for (std::size_t i = 0; i < positions.size(); ++i) {
    std::span<double> row(s.values.data() + i * plane.channels, plane.channels);
    if (!bilinear_at(plane, positions[i], row)) s.outside[i] = 1;
  }
  return s;
}

}  // namespace occukit
