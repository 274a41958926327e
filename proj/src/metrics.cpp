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

#include "occukit/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "occukit/error.hpp"

namespace occukit {

namespace {

void check_pair(const VoxelGrid& pred, const VoxelGrid& gt) {
  if (!(pred.spec == gt.spec)) fail(ErrorKind::shape, "prediction and ground truth use different grid specs");
  if (pred.labels.size() != gt.labels.size() || pred.labels.size() != pred.spec.voxel_count())
    fail(ErrorKind::shape, "grid label counts do not match their spec");
}

bool ignored(std::uint8_t l, std::span<const std::uint8_t> ignore) {
  return std::find(ignore.begin(), ignore.end(), l) != ignore.end();
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::row_sum(std::size_t gt) const {
  return std::accumulate(counts_.begin() + gt * k_, counts_.begin() + (gt + 1) * k_, std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::uint64_t s = 0;
  for (std::size_t g = 0; g < k_; ++g) s += at(g, pred);
  return s;
}

ConfusionMatrix confusion(const VoxelGrid& pred, const VoxelGrid& gt, std::span<const std::uint8_t> ignore) {
  check_pair(pred, gt);
  if (pred.class_count != gt.class_count) fail(ErrorKind::shape, "prediction and ground truth class counts differ");
  ConfusionMatrix m(gt.class_count);
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const std::uint8_t g = gt.labels[i], p = pred.labels[i];
    if (ignored(g, ignore)) continue;
    if (g >= gt.class_count || p >= gt.class_count)
      fail(ErrorKind::invalid_argument, "label outside the class table at voxel " + std::to_string(i) +
                                            " (pass it via the ignore set)");
    ++m.at(g, p);
  }
  return m;
}

std::optional<double> iou(const ConfusionMatrix& m, std::size_t cls) {
  const std::uint64_t tp = m.at(cls, cls);
  const std::uint64_t fp = m.col_sum(cls) - tp;
  const std::uint64_t fn = m.row_sum(cls) - tp;
  const std::uint64_t denom = tp + fp + fn;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(denom);
}

double miou(const ConfusionMatrix& m) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 1; c < m.classes(); ++c)
    if (auto v = iou(m, c)) {
      sum += *v;
      ++n;
    }
  if (n == 0) fail(ErrorKind::invalid_argument, "no semantic class present in prediction or ground truth");
  return sum / static_cast<double>(n);
}

double sc_iou(const VoxelGrid& pred, const VoxelGrid& gt, std::span<const std::uint8_t> ignore) {
  check_pair(pred, gt);
  std::uint64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    if (ignored(gt.labels[i], ignore)) continue;
    const bool a = pred.labels[i] != kFreeClass, b = gt.labels[i] != kFreeClass;
    inter += a && b;
    uni += a || b;
  }
  if (uni == 0) fail(ErrorKind::invalid_argument, "both grids are entirely free");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

EvalReport evaluate(const VoxelGrid& pred, const VoxelGrid& gt, std::span<const std::uint8_t> ignore) {
  const ConfusionMatrix m = confusion(pred, gt, ignore);
  EvalReport r;
  r.sc_iou = sc_iou(pred, gt, ignore);
  r.miou = miou(m);
  r.per_class.resize(m.classes());
  for (std::size_t c = 1; c < m.classes(); ++c) r.per_class[c] = iou(m, c);
  return r;
}

}  // namespace occukit
