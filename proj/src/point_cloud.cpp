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

#include "occukit/point_cloud.hpp"

#include <cmath>
#include <string>

#include "occukit/error.hpp"

namespace occukit {

namespace {

template <typename T>
void check_channel(const std::vector<T>& ch, std::size_t n, const char* name) {
  if (!ch.empty() && ch.size() != n)
    fail(ErrorKind::invalid_argument, std::string("point channel '") + name + "' has " +
                                          std::to_string(ch.size()) + " entries, expected " +
                                          std::to_string(n));
}

template <typename T>
void pick(std::vector<T>& out, const std::vector<T>& in, std::span<const std::size_t> idx) {
  if (in.empty()) return;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(in[i]);
}

template <typename T>
void join(std::vector<T>& a, std::size_t na, const std::vector<T>& b, std::size_t nb, T pad) {
  if (a.empty() && b.empty()) return;
  if (a.empty()) a.assign(na, pad);
  if (b.empty()) {
    a.insert(a.end(), nb, pad);
  } else {
    a.insert(a.end(), b.begin(), b.end());
  }
}

}  // namespace

void PointCloud::validate() const {
  const std::size_t n = size();
  check_channel(vx, n, "vx");
  check_channel(vy, n, "vy");
  check_channel(amp, n, "amp");
  check_channel(snr, n, "snr");
  check_channel(t, n, "t");
  check_channel(label, n, "class");
  check_channel(conf, n, "conf");
  check_channel(track, n, "track");
  for (const auto& p : xyz)
    if (!p.allFinite()) fail(ErrorKind::invalid_argument, "non-finite point position");
  for (float c : conf)
    if (!(c >= 0.0f && c <= 1.0f)) fail(ErrorKind::invalid_argument, "confidence outside [0,1]");
}

PointCloud PointCloud::subset(std::span<const std::size_t> idx) const {
  PointCloud out;
  out.xyz.reserve(idx.size());
  for (std::size_t i : idx) out.xyz.push_back(xyz[i]);
  pick(out.vx, vx, idx);
  pick(out.vy, vy, idx);
  pick(out.amp, amp, idx);
  pick(out.snr, snr, idx);
  pick(out.t, t, idx);
  pick(out.label, label, idx);
  pick(out.conf, conf, idx);
  pick(out.track, track, idx);
  return out;
}

void PointCloud::append(const PointCloud& o) {
  const std::size_t na = size();
  const std::size_t nb = o.size();
  join(vx, na, o.vx, nb, 0.0);
  join(vy, na, o.vy, nb, 0.0);
  join(amp, na, o.amp, nb, 0.0);
  join(snr, na, o.snr, nb, 0.0);
  join(t, na, o.t, nb, 0.0);
  join(label, na, o.label, nb, kUnknownClass);
  join(conf, na, o.conf, nb, 0.0f);
  join(track, na, o.track, nb, std::int32_t{-1});
  xyz.insert(xyz.end(), o.xyz.begin(), o.xyz.end());
}

}  // namespace occukit
