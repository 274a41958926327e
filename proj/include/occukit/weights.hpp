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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace occukit {

/// Shapes shared by every fusion block.
struct FusionConfig {
  std::size_t channels = 8;        // C
  std::size_t height = 16;         // H (grid NY)
  std::size_t width = 24;          // W (grid NX)
  std::size_t depth = 4;           // Z (grid NZ)
  std::size_t heads = 4;           // n_h
  std::size_t points = 4;          // n_s, sampling points per head
  std::size_t frames = 3;          // T
  std::size_t classes = 12;        // free + 11 semantic classes
  std::size_t image_channels = 8;  // channels of the camera feature planes

  std::size_t bev_channels() const { return channels * depth; }  // C' = C * Z
  /// n_h, n_s, T >= 1, n_h divides C', n_h divides C (image lift), all dims > 0.
  void validate() const;
};

/// Per-point input width of the pillar encoder: x y z vx vy amp snr t plus
/// the (dx, dy) offset from the pillar center.
inline constexpr std::size_t kPillarInputs = 10;

struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> d);
  std::size_t numel() const;
  bool operator==(const Tensor&) const = default;
};

/// Named parameter tensors for every fusion block. Layer stacks use
/// "<prefix>.<i>.weight" / "<prefix>.<i>.bias" with i = 0, 1, ...
class BlockWeights {
 public:
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  /// Throws Error(shape) naming the tensor when it is missing or its dims
  /// differ from `dims`.
  const Tensor& get(const std::string& name, const std::vector<std::size_t>& dims) const;
  const Tensor& get(const std::string& name) const;
  void set(const std::string& name, Tensor t);
  /// Number of consecutive "<prefix>.<i>.weight" entries.
  std::size_t stack_depth(const std::string& prefix) const;
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }
  bool all_finite() const;

  bool operator==(const BlockWeights&) const = default;

 private:
  std::map<std::string, Tensor> tensors_;
};

/// Deterministic initialization with a generator seeded from (seed, tensor
/// name): ".weight" matrices are drawn from N(0, 2 / fan_in), every other
/// tensor from N(0, 0.02); batch-norm scales start at 1 and shifts at 0.
BlockWeights init_weights(const FusionConfig& cfg, std::uint64_t seed);

/// Same tensor set with every value set to zero.
BlockWeights zero_weights(const FusionConfig& cfg);

/// "MOBW" container: magic, u32 version (1), u32 tensor count, then per tensor
/// a 32-byte NUL-padded name, u32 rank, rank x u32 dims and f64 data.
/// Little-endian.
std::vector<std::uint8_t> encode_weights(const BlockWeights& w);
BlockWeights decode_weights(const std::vector<std::uint8_t>& bytes);
void save_weights(const BlockWeights& w, const std::filesystem::path& path);
BlockWeights load_weights(const std::filesystem::path& path);

}  // namespace occukit
