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

#include "occukit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "occukit/error.hpp"

namespace occukit {

namespace {

void check_inputs(const ClassProbabilities& probs, std::span<const std::uint8_t> labels) {
  if (probs.values.size() != probs.voxels * probs.classes)
    fail(ErrorKind::shape, "probability block does not match voxels x classes");
  if (labels.size() != probs.voxels) fail(ErrorKind::shape, "label count does not match the probability block");
  for (std::uint8_t l : labels)
    if (l >= probs.classes) fail(ErrorKind::invalid_argument, "label " + std::to_string(l) + " exceeds class count");
  if (probs.voxels == 0) fail(ErrorKind::invalid_argument, "empty loss support");
}

}  // namespace

LossResult cross_entropy(const ClassProbabilities& probs, std::span<const std::uint8_t> labels,
                         std::span<const std::uint8_t> ignore, std::span<const double> class_weights) {
  if (labels.size() != probs.voxels) fail(ErrorKind::shape, "label count does not match the probability block");
  if (!ignore.empty() && ignore.size() != probs.voxels) fail(ErrorKind::shape, "ignore mask does not match voxels");
  if (!class_weights.empty() && class_weights.size() != probs.classes)
    fail(ErrorKind::shape, "class weights do not match the class count");

  LossResult r{0.0, std::vector<double>(probs.values.size(), 0.0)};
  double total_weight = 0.0;
  for (std::size_t i = 0; i < probs.voxels; ++i) {
    if (!ignore.empty() && ignore[i]) continue;
    if (labels[i] >= probs.classes) fail(ErrorKind::invalid_argument, "label exceeds class count");
    total_weight += class_weights.empty() ? 1.0 : class_weights[labels[i]];
  }
  if (!(total_weight > 0.0)) fail(ErrorKind::invalid_argument, "empty loss support");

  for (std::size_t i = 0; i < probs.voxels; ++i) {
    if (!ignore.empty() && ignore[i]) continue;
    const std::size_t y = labels[i];
    const double wy = (class_weights.empty() ? 1.0 : class_weights[y]) / total_weight;
    const double p = probs.at(i, y);
    if (p > kCrossEntropyFloor) {
      r.value -= wy * std::log(p);
      r.gradient[i * probs.classes + y] = -wy / p;
    } else {
      r.value -= wy * std::log(kCrossEntropyFloor);
    }
  }
  return r;
}

LossResult lovasz_softmax(const ClassProbabilities& probs, std::span<const std::uint8_t> labels) {
  check_inputs(probs, labels);
  const std::size_t n = probs.voxels, K = probs.classes;
  LossResult r{0.0, std::vector<double>(probs.values.size(), 0.0)};

  std::vector<bool> present(K, false);
  for (std::uint8_t l : labels) present[l] = true;
  const auto n_present = static_cast<double>(std::count(present.begin(), present.end(), true));

  std::vector<double> err(n);
  std::vector<std::size_t> order(n);
  for (std::size_t c = 0; c < K; ++c) {
    if (!present[c]) continue;
    std::size_t gts = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool fg = labels[i] == c;
      gts += fg;
      err[i] = fg ? 1.0 - probs.at(i, c) : probs.at(i, c);
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return err[a] > err[b]; });

    // Jaccard loss of each sorted prefix; its forward differences weight the errors.
    double prev = 0.0, loss = 0.0;
    std::size_t fg_seen = 0, bg_seen = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = order[k];
      (labels[i] == c ? fg_seen : bg_seen) += 1;
      const double inter = static_cast<double>(gts - fg_seen);
      const double uni = static_cast<double>(gts + bg_seen);
      const double jac = 1.0 - inter / uni;
      const double g = jac - prev;
      prev = jac;
      loss += err[i] * g;
      const double derr = labels[i] == c ? -1.0 : 1.0;
      r.gradient[i * K + c] += derr * g / n_present;
    }
    r.value += loss / n_present;
  }
  return r;
}

double affinity_loss(std::span<const double> x, std::span<const std::uint8_t> target, std::span<double> grad) {
  double inter = 0.0, sum_x = 0.0, spec_num = 0.0;
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum_x += x[i];
    if (target[i]) {
      inter += x[i];
      ++pos;
    } else {
      spec_num += 1.0 - x[i];
      ++neg;
    }
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;

  if (pos > 0) {
    // precision = inter / sum_x
    const double precision = sum_x > 0.0 ? inter / sum_x : 0.0;
    if (precision > kAffinityFloor) {
      loss -= std::log(precision);
      for (std::size_t i = 0; i < x.size(); ++i) grad[i] -= (target[i] ? 1.0 / inter : 0.0) - 1.0 / sum_x;
    } else {
      loss -= std::log(kAffinityFloor);
    }
    // recall = inter / pos
    const double recall = inter / static_cast<double>(pos);
    if (recall > kAffinityFloor) {
      loss -= std::log(recall);
      for (std::size_t i = 0; i < x.size(); ++i)
        if (target[i]) grad[i] -= 1.0 / inter;
    } else {
      loss -= std::log(kAffinityFloor);
    }
  }
  if (neg > 0) {
    const double specificity = spec_num / static_cast<double>(neg);
    if (specificity > kAffinityFloor) {
      loss -= std::log(specificity);
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!target[i]) grad[i] += 1.0 / spec_num;
    } else {
      loss -= std::log(kAffinityFloor);
    }
  }
  return loss;
}

LossResult scal_geo(const ClassProbabilities& probs, std::span<const std::uint8_t> labels) {
  check_inputs(probs, labels);
  const std::size_t n = probs.voxels;
  std::vector<double> x(n), gx(n);
  std::vector<std::uint8_t> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 1.0 - probs.at(i, kFreeClass);
    target[i] = labels[i] != kFreeClass;
  }
  LossResult r{affinity_loss(x, target, gx), std::vector<double>(probs.values.size(), 0.0)};
  for (std::size_t i = 0; i < n; ++i) r.gradient[i * probs.classes + kFreeClass] = -gx[i];
  return r;
}

LossResult scal_sem(const ClassProbabilities& probs, std::span<const std::uint8_t> labels) {
  check_inputs(probs, labels);
  const std::size_t n = probs.voxels, K = probs.classes;
  std::vector<bool> present(K, false);
  for (std::uint8_t l : labels) present[l] = true;
  const auto count = static_cast<double>(std::count(present.begin(), present.end(), true));

  LossResult r{0.0, std::vector<double>(probs.values.size(), 0.0)};
  std::vector<double> x(n), gx(n);
  std::vector<std::uint8_t> target(n);
  for (std::size_t c = 0; c < K; ++c) {
    if (!present[c]) continue;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = probs.at(i, c);
      target[i] = labels[i] == c;
    }
    r.value += affinity_loss(x, target, gx) / count;
    for (std::size_t i = 0; i < n; ++i) r.gradient[i * K + c] += gx[i] / count;
  }
  return r;
}

LossResult total_loss(const ClassProbabilities& probs, std::span<const std::uint8_t> labels, const LossWeights& lw) {
  const LossResult parts[4] = {cross_entropy(probs, labels), lovasz_softmax(probs, labels), scal_geo(probs, labels),
                               scal_sem(probs, labels)};
  const double weights[4] = {lw.ce, lw.lovasz, lw.scal_geo, lw.scal_sem};
  LossResult r{0.0, std::vector<double>(probs.values.size(), 0.0)};
  for (int k = 0; k < 4; ++k) {
    r.value += weights[k] * parts[k].value;
    for (std::size_t i = 0; i < r.gradient.size(); ++i) r.gradient[i] += weights[k] * parts[k].gradient[i];
  }
  return r;
}

}  // namespace occukit
