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

// Occupancy training losses over per-voxel class probabilities. Every loss
// returns its value together with the analytic gradient with respect to the
// probability entries (treated as independent variables).

#include <cstdint>
#include <span>
#include <vector>

#include "occukit/grid.hpp"

namespace occukit {

struct LossResult {
  double value = 0.0;
  std::vector<double> gradient;  // same layout as ClassProbabilities::values
};

/// Weights of the composite loss: CE, Lovasz, geometric and semantic affinity.
struct LossWeights {
  double ce = 1.0;
  double lovasz = 5.0;
  double scal_geo = 1.0;
  double scal_sem = 1.0;
};

inline constexpr double kCrossEntropyFloor = 1e-12;
inline constexpr double kAffinityFloor = 1e-6;

/// Weighted mean of -log(max(p_true, 1e-12)) over voxels with ignore[i] == 0.
/// `ignore` may be empty; `class_weights` may be empty (uniform). Throws
/// Error(invalid_argument, "empty loss support") when nothing is left.
LossResult cross_entropy(const ClassProbabilities& probs, std::span<const std::uint8_t> labels,
                         std::span<const std::uint8_t> ignore = {}, std::span<const double> class_weights = {});

/// Lovasz-softmax: mean over classes present in `labels` of the Lovasz
/// extension of the Jaccard loss evaluated at the per-voxel errors. The
/// sort permutation (descending error, ties by voxel index) is held fixed
/// for the gradient.
LossResult lovasz_softmax(const ClassProbabilities& probs, std::span<const std::uint8_t> labels);

/// Soft precision / recall / specificity terms for one binary problem.
/// x are scores in [0,1], target[i] marks positives. Ratios are clamped to
/// [1e-6, 1] before the log; empty sides drop their terms. Writes
/// d(loss)/dx into grad (same length as x).
double affinity_loss(std::span<const double> x, std::span<const std::uint8_t> target, std::span<double> grad);

/// Geometric scene-class affinity on occupied = 1 - p(free) vs label != 0.
LossResult scal_geo(const ClassProbabilities& probs, std::span<const std::uint8_t> labels);

/// Semantic scene-class affinity: affinity_loss on p(c) vs label == c,
/// averaged over every class present in `labels`.
LossResult scal_sem(const ClassProbabilities& probs, std::span<const std::uint8_t> labels);

/// ce + 5 lovasz + scal_geo + scal_sem (by default).
LossResult total_loss(const ClassProbabilities& probs, std::span<const std::uint8_t> labels,
                      const LossWeights& weights = {});

}  // namespace occukit
