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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "occukit/grid.hpp"

namespace occukit {

/// K x K voxel counts, rows = ground truth, columns = prediction.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 0) : k_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const { return k_; }
  std::uint64_t at(std::size_t gt, std::size_t pred) const { return counts_[gt * k_ + pred]; }
  std::uint64_t& at(std::size_t gt, std::size_t pred) { return counts_[gt * k_ + pred]; }
  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t gt) const;
  std::uint64_t col_sum(std::size_t pred) const;

 private:
  std::size_t k_;
  std::vector<std::uint64_t> counts_;
};

/// Counts voxels whose ground-truth label is not in `ignore`. Grids must share
/// a GridSpec and class count; remaining labels must be < class count.
ConfusionMatrix confusion(const VoxelGrid& pred, const VoxelGrid& gt, std::span<const std::uint8_t> ignore = {});

/// TP / (TP + FP + FN); empty when the class appears in neither grid.
std::optional<double> iou(const ConfusionMatrix& m, std::size_t cls);

/// Mean IoU over the semantic classes (free excluded) that are present.
/// Throws Error(invalid_argument) when none is.
double miou(const ConfusionMatrix& m);

/// IoU of the occupied (label != free) sets, over voxels whose ground truth
/// is not ignored. Throws when both grids are entirely free.
double sc_iou(const VoxelGrid& pred, const VoxelGrid& gt, std::span<const std::uint8_t> ignore = {});

struct EvalReport {
  double sc_iou = 0.0;
  double miou = 0.0;
  std::vector<std::optional<double>> per_class;  // index = class id; [0] (free) unused
};

EvalReport evaluate(const VoxelGrid& pred, const VoxelGrid& gt, std::span<const std::uint8_t> ignore = {});

}  // namespace occukit
