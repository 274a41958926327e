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

// Uniform-cell hash over a point set for radius and nearest-neighbor queries.
// Results are ordered by (squared distance, point index), so they do not
// depend on hash iteration order.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "occukit/point_cloud.hpp"

namespace occukit::detail {

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

struct Neighbor {
  double d2;
  std::size_t index;
  bool operator<(const Neighbor& o) const { return d2 < o.d2 || (d2 == o.d2 && index < o.index); }
};

class SpatialHash {
 public:
  /// Indexes xyz[i] for every i in `members` (all points when empty).
  SpatialHash(std::span<const Vec3> xyz, double cell) : xyz_(xyz), cell_(cell), inv_(1.0 / cell) {
    for (std::size_t i = 0; i < xyz.size(); ++i) insert(i);
  }

  /// Indexes only `members`; an empty list gives an empty hash.
  SpatialHash(std::span<const Vec3> xyz, double cell, std::span<const std::size_t> members)
      : xyz_(xyz), cell_(cell), inv_(1.0 / cell) {
    for (std::size_t i : members) insert(i);
  }

  /// All indexed points within `radius` (inclusive), sorted.
  std::vector<Neighbor> radius(const Vec3& q, double radius) const {
    std::vector<Neighbor> out;
    const double r2 = radius * radius;
    const long span = static_cast<long>(std::ceil(radius * inv_));
    const auto c = key(q);
    for (long dx = -span; dx <= span; ++dx)
      for (long dy = -span; dy <= span; ++dy)
        for (long dz = -span; dz <= span; ++dz) {
          auto it = cells_.find(pack(c[0] + dx, c[1] + dy, c[2] + dz));
          if (it == cells_.end()) continue;
          for (std::size_t i : it->second) {
            const double d2 = squared_distance(q, xyz_[i]);
            if (d2 <= r2) out.push_back({d2, i});
          }
        }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Up to k nearest points within `radius`, sorted.
  std::vector<Neighbor> knn(const Vec3& q, std::size_t k, double radius) const {
    auto all = this->radius(q, radius);
    if (all.size() > k) all.resize(k);
    return all;
  }

  /// Nearest indexed point accepted by `accept` within `radius` (inclusive),
  /// ties broken by the smaller index.
  std::optional<Neighbor> nearest(const Vec3& q, double radius,
                                  const std::function<bool(std::size_t)>& accept = {}) const {
    std::optional<Neighbor> best;
    const double r2 = radius * radius;
    const auto c = key(q);
    const long max_ring = static_cast<long>(std::ceil(radius * inv_)) + 1;
    for (long ring = 0; ring <= max_ring; ++ring) {
      // Any point in ring r is at least (r - 1) cells away from q.
      const double bound = (ring - 1) * cell_;
      if (ring > 1 && ((best && bound * bound > best->d2) || bound > radius)) break;
      for (long dx = -ring; dx <= ring; ++dx)
        for (long dy = -ring; dy <= ring; ++dy)
          for (long dz = -ring; dz <= ring; ++dz) {
            if (std::max({std::labs(dx), std::labs(dy), std::labs(dz)}) != ring) continue;
            auto it = cells_.find(pack(c[0] + dx, c[1] + dy, c[2] + dz));
            if (it == cells_.end()) continue;
            for (std::size_t i : it->second) {
              const double d2 = squared_distance(q, xyz_[i]);
              if (d2 > r2) continue;
              if (accept && !accept(i)) continue;
              const Neighbor n{d2, i};
              if (!best || n < *best) best = n;
            }
          }
    }
    return best;
  }

 private:
  std::array<long, 3> key(const Vec3& p) const {
    return {static_cast<long>(std::floor(p.x() * inv_)), static_cast<long>(std::floor(p.y() * inv_)),
            static_cast<long>(std::floor(p.z() * inv_))};
  }
  static std::uint64_t pack(long x, long y, long z) {
    const auto m = [](long v) { return static_cast<std::uint64_t>(v + (1l << 20)) & 0x1FFFFFu; };
    return (m(x) << 42) | (m(y) << 21) | m(z);
  }
  void insert(std::size_t i) {
    const auto k = key(xyz_[i]);
    cells_[pack(k[0], k[1], k[2])].push_back(i);
  }

  std::span<const Vec3> xyz_;
  double cell_;
  double inv_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace occukit::detail
