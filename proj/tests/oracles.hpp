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

// Brute-force reference implementations used as test oracles. Each one is a
// direct transcription of the definition, written without the library's
// spatial hashing, sorting tricks or shared helpers.

#include <Eigen/Geometry>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "occukit/fusion.hpp"
#include "occukit/grid.hpp"
#include "occukit/pseudolabel.hpp"

namespace oracle {

using occukit::ClassProbabilities;
using occukit::FeaturePlane;
using occukit::FeatureVolume;
using occukit::GridSpec;
using occukit::PointCloud;
using occukit::Vec3;
using occukit::VoxelGrid;

inline double d2(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

/// floor((p - min) / voxel) on each axis, half-open bounds.
inline std::optional<std::array<long, 3>> voxel_of(const Vec3& p, const GridSpec& s) {
  const double lo[3] = {s.x().min, s.y().min, s.z().min};
  const double hi[3] = {s.x().max, s.y().max, s.z().max};
  const long n[3] = {static_cast<long>(s.nx()), static_cast<long>(s.ny()), static_cast<long>(s.nz())};
  std::array<long, 3> idx{};
  for (int a = 0; a < 3; ++a) {
    if (!(p[a] >= lo[a] && p[a] < hi[a])) return std::nullopt;
    idx[a] = static_cast<long>(std::floor((p[a] - lo[a]) / s.voxel_size()));
    if (idx[a] < 0 || idx[a] >= n[a]) return std::nullopt;
  }
  return idx;
}

inline std::size_t linear_of(const std::array<long, 3>& i, const GridSpec& s) {
  return (static_cast<std::size_t>(i[0]) * s.ny() + static_cast<std::size_t>(i[1])) * s.nz() +
         static_cast<std::size_t>(i[2]);
}

inline Vec3 center_of(std::size_t linear, const GridSpec& s) {
  const std::size_t iz = linear % s.nz(), iy = (linear / s.nz()) % s.ny(), ix = linear / (std::size_t{s.nz()} * s.ny());
  return {s.x().min + (static_cast<double>(ix) + 0.5) * s.voxel_size(),
          s.y().min + (static_cast<double>(iy) + 0.5) * s.voxel_size(),
          s.z().min + (static_cast<double>(iz) + 0.5) * s.voxel_size()};
}

/// Per-point loop: count labels per voxel, majority with smallest-id ties.
inline VoxelGrid voxelize(const PointCloud& pts, const GridSpec& s, std::uint32_t classes) {
  std::map<std::size_t, std::map<std::uint8_t, std::size_t>> counts;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (auto v = voxel_of(pts.xyz[i], s)) ++counts[linear_of(*v, s)][pts.label[i]];
  VoxelGrid g(s, classes);
  for (const auto& [lin, hist] : counts) {
    std::uint8_t best = 0;
    std::size_t best_n = 0;
    for (const auto& [label, n] : hist)
      if (n > best_n) best = label, best_n = n;
    g.labels[lin] = best;
  }
  return g;
}

/// Exhaustive two-pass labeling: voxels with a dynamic point take the
/// nearest dynamic point anywhere; other occupied voxels take the nearest
/// labeled static point within the radius. Ties to the smaller index.
inline VoxelGrid staged(const PointCloud& cloud, const std::vector<std::uint8_t>& is_dynamic, const GridSpec& s,
                        std::uint32_t classes, double radius) {
  std::map<std::size_t, bool> occupied;  // linear -> holds a dynamic point
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (auto v = voxel_of(cloud.xyz[i], s)) occupied[linear_of(*v, s)] |= is_dynamic[i] != 0;
  VoxelGrid g(s, classes);
  for (const auto& [lin, dyn] : occupied) {
    const Vec3 c = center_of(lin, s);
    double best = std::numeric_limits<double>::infinity();
    std::uint8_t label = occukit::kFreeClass;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if ((is_dynamic[i] != 0) != dyn) continue;
      if (!dyn && cloud.label[i] == occukit::kUnknownClass) continue;
      const double d = d2(c, cloud.xyz[i]);
      if (!dyn && d > radius * radius) continue;
      if (d < best) best = d, label = cloud.label[i];
    }
    g.labels[lin] = label;
  }
  return g;
}

/// Box membership by the direct inequality on rotated coordinates.
inline bool in_box(const Vec3& p, const occukit::Box3D& b) {
  const Eigen::Matrix3d r = Eigen::AngleAxisd(b.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Vec3 local = r.transpose() * (p - b.center);
  return std::abs(local.x()) <= b.size.x() / 2 && std::abs(local.y()) <= b.size.y() / 2 &&
         std::abs(local.z()) <= b.size.z() / 2;
}

/// Lovasz extension of the Jaccard loss as a level-set integral:
/// f(m) = sum over distinct levels v_k (descending) of (v_k - v_{k+1}) J({m >= v_k}),
/// J(S) = |S| / |G u S|.
inline double lovasz_class(const std::vector<double>& m, const std::vector<bool>& gt) {
  std::set<double, std::greater<>> levels(m.begin(), m.end());
  levels.insert(0.0);
  double total = 0.0;
  for (auto it = levels.begin(); std::next(it) != levels.end(); ++it) {
    const double hi = *it, lo = *std::next(it);
    std::size_t s = 0, uni = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const bool in_s = m[i] >= hi;
      s += in_s;
      uni += in_s || gt[i];
    }
    total += (hi - lo) * (uni == 0 ? 0.0 : static_cast<double>(s) / static_cast<double>(uni));
  }
  return total;
}

inline double lovasz_softmax(const ClassProbabilities& p, const std::vector<std::uint8_t>& labels) {
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < p.classes; ++c) {
    std::vector<double> m(p.voxels);
    std::vector<bool> gt(p.voxels);
    bool any = false;
    for (std::size_t i = 0; i < p.voxels; ++i) {
      gt[i] = labels[i] == c;
      any = any || gt[i];
      m[i] = gt[i] ? 1.0 - p.at(i, c) : p.at(i, c);
    }
    if (!any) continue;
    sum += lovasz_class(m, gt);
    ++present;
  }
  return sum / static_cast<double>(present);
}

/// Four-corner bilinear interpolation, zero outside [0, H-1] x [0, W-1].
inline double bilinear(const FeaturePlane& f, std::size_t c, double h, double w) {
  if (h < 0 || w < 0 || h > static_cast<double>(f.height - 1) || w > static_cast<double>(f.width - 1)) return 0.0;
  const long h0 = static_cast<long>(std::floor(h)), w0 = static_cast<long>(std::floor(w));
  double acc = 0.0;
  for (long dh = 0; dh <= 1; ++dh)
    for (long dw = 0; dw <= 1; ++dw) {
      const long hh = h0 + dh, ww = w0 + dw;
      const double wt = (dh ? h - h0 : 1.0 - (h - h0)) * (dw ? w - w0 : 1.0 - (w - w0));
      if (wt == 0.0 || hh >= static_cast<long>(f.height) || ww >= static_cast<long>(f.width)) continue;
      acc += wt * f.at(c, static_cast<std::size_t>(hh), static_cast<std::size_t>(ww));
    }
  return acc;
}

/// Eight-corner trilinear interpolation, zero outside the cube.
inline double trilinear(const FeatureVolume& v, std::size_t c, double h, double w, double z) {
  const double pos[3] = {h, w, z};
  const double dims[3] = {static_cast<double>(v.height), static_cast<double>(v.width), static_cast<double>(v.depth)};
  for (int a = 0; a < 3; ++a)
    if (pos[a] < 0 || pos[a] > dims[a] - 1) return 0.0;
  double acc = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    double wt = 1.0;
    long idx[3];
    for (int a = 0; a < 3; ++a) {
      const long base = static_cast<long>(std::floor(pos[a]));
      const double frac = pos[a] - static_cast<double>(base);
      const int bit = (corner >> a) & 1;
      idx[a] = base + bit;
      wt *= bit ? frac : 1.0 - frac;
    }
    if (wt == 0.0) continue;
    if (idx[0] >= static_cast<long>(v.height) || idx[1] >= static_cast<long>(v.width) ||
        idx[2] >= static_cast<long>(v.depth))
      continue;
    acc += wt * v.at(c, static_cast<std::size_t>(idx[0]), static_cast<std::size_t>(idx[1]),
                     static_cast<std::size_t>(idx[2]));
  }
  return acc;
}

/// Straight-line multi-head deformable attention for one query vector `q`
/// at reference (rh, rw). The value projection is applied to the sampled
/// raw values, which equals sampling the projected plane.
inline std::vector<double> mda_point(const std::vector<double>& q, const FeaturePlane& value, double rh, double rw,
                                     const occukit::MdaParams& p) {
  const std::size_t md = p.model_dim, hd = md / p.heads, qd = p.query_dim;
  const double limit = static_cast<double>(value.height + value.width) / 4.0;
  std::vector<double> concat(md, 0.0);
  for (std::size_t h = 0; h < p.heads; ++h) {
    std::vector<double> logit(p.points);
    for (std::size_t s = 0; s < p.points; ++s) {
      const std::size_t row = h * p.points + s;
      logit[s] = p.attn_b.data[row];
      for (std::size_t j = 0; j < qd; ++j) logit[s] += p.attn_w.data[row * qd + j] * q[j];
    }
    double z = 0.0;
    for (double l : logit) z += std::exp(l);
    for (std::size_t s = 0; s < p.points; ++s) {
      double off[2];
      for (int k = 0; k < 2; ++k) {
        const std::size_t row = (h * p.points + s) * 2 + k;
        double o = p.offset_b.data[row];
        for (std::size_t j = 0; j < qd; ++j) o += p.offset_w.data[row * qd + j] * q[j];
        off[k] = std::min(std::max(o, -limit), limit);
      }
      const double sh = rh + off[0], sw = rw + off[1];
      const bool inside = sh >= 0 && sw >= 0 && sh <= static_cast<double>(value.height - 1) &&
                          sw <= static_cast<double>(value.width - 1);
      const double a = std::exp(logit[s]) / z;
      for (std::size_t d = 0; d < hd; ++d) {
        const std::size_t r = h * hd + d;
        if (!inside) continue;
        double v = p.value_b.data[r];
        for (std::size_t c = 0; c < p.value_dim; ++c) v += p.value_w.data[r * p.value_dim + c] * bilinear(value, c, sh, sw);
        concat[r] += a * v;
      }
    }
  }
  std::vector<double> out(md);
  for (std::size_t r = 0; r < md; ++r) {
    out[r] = p.out_b.data[r];
    for (std::size_t d = 0; d < md; ++d) out[r] += p.out_w.data[r * md + d] * concat[d];
  }
  return out;
}

inline void fill_normal(std::vector<double>& v, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  for (double& x : v) x = n(rng);
}

}  // namespace oracle
