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

// Forward-only reference implementations of the radar/camera fusion blocks.
// Every block is a pure function of its inputs and a BlockWeights bundle.

#include <span>
#include <string>
#include <vector>

#include "occukit/geometry.hpp"
#include "occukit/grid.hpp"
#include "occukit/weights.hpp"

namespace occukit {

/// 3x3x3 convolution, stride 1, zero padding. weight: [Cout, Cin, 3, 3, 3]
/// over the (h, w, z) axes, bias: [Cout].
FeatureVolume conv3d(const FeatureVolume& in, const Tensor& weight, const Tensor& bias);

double sigmoid(double x);
double softplus(double x);

/// PointPillars-style BEV encoding: each radar point is decorated with its
/// offset from the pillar center, passed through a shared Linear + ReLU and
/// max-pooled per pillar. Empty pillars stay zero. The pillar lattice is the
/// (NY, NX) footprint of `grid`, which must equal (cfg.height, cfg.width).
FeaturePlane pillar_encode(const PointCloud& radar, const GridSpec& grid, const BlockWeights& w, const FusionConfig& cfg);

/// Decorated per-point input of the pillar encoder (kPillarInputs values).
std::array<double, kPillarInputs> pillar_features(const PointCloud& radar, std::size_t i, const GridSpec& grid,
                                                  const VoxelIndex& cell);

struct RhsTrace {
  FeatureVolume initial;    // BEV plane repeated along Z
  FeatureVolume gate;       // sigmoid(G_r(initial + P_h))
  FeatureVolume modulated;  // initial * gate
  FeatureVolume attention;  // Conv(modulated)
  FeatureVolume output;     // RadarEncoder(initial + attention)
};

/// Radar height self-attention with every intermediate kept.
RhsTrace rhs_trace(const FeaturePlane& bev, const BlockWeights& w, const FusionConfig& cfg);
FeatureVolume rhs(const FeaturePlane& bev, const BlockWeights& w, const FusionConfig& cfg);

struct LafResult {
  FeatureVolume fused;   // W * F_c + (1 - W) * F_r
  FeatureVolume weight;  // 1 x H x W x Z, values in [0, 1]
};

/// Local adaptive fusion of camera and radar voxel features.
LafResult laf(const FeatureVolume& camera, const FeatureVolume& radar, const BlockWeights& w);

/// Parameters of one multi-head deformable attention instance.
struct MdaParams {
  std::size_t heads = 1, points = 1;
  std::size_t query_dim = 0, value_dim = 0, model_dim = 0;
  Tensor offset_w, offset_b;  // [heads*points*2, query_dim]: (dh, dw) per sample
  Tensor attn_w, attn_b;      // [heads*points, query_dim]
  Tensor value_w, value_b;    // [model_dim, value_dim]; head h owns rows h*model_dim/heads ...
  Tensor out_w, out_b;        // [model_dim, model_dim]

  /// Reads "<prefix>.{offset,attn,value,out}.{weight,bias}" and checks shapes.
  static MdaParams from(const BlockWeights& w, const std::string& prefix, std::size_t heads, std::size_t points,
                        std::size_t query_dim, std::size_t value_dim, std::size_t model_dim);
  /// Zero offsets, equal logits, identity value and output projections.
  /// Needs query_dim arbitrary and value_dim == model_dim.
  static MdaParams identity(std::size_t heads, std::size_t points, std::size_t query_dim, std::size_t dim);
};

/// value_proj applied at every cell: model_dim x H x W.
FeaturePlane project_values(const FeaturePlane& value, const MdaParams& p);

/// Deformable attention over an already projected value plane. `queries` is
/// refs.size() x query_dim row-major; returns refs.size() x model_dim.
/// Offsets are in cell units, clamped to +-(H + W) / 4 of the value plane.
std::vector<double> attend(std::span<const double> queries, const FeaturePlane& projected,
                           std::span<const GridPos2> refs, const MdaParams& p);

/// Plane-level MDA: the query at cell (h, w) is query + pos_enc there, its
/// reference point is refs[h * W + w] in value-plane coordinates.
FeaturePlane mda(const FeaturePlane& query, const FeaturePlane& value, const FeaturePlane& pos_enc,
                 std::span<const GridPos2> refs, const MdaParams& p);

/// Reference points on every cell center of an H x W plane, row-major.
std::vector<GridPos2> cell_centers(std::size_t height, std::size_t width);

/// Per-cell Linear on a plane. weight: [out, in], bias: [out].
FeaturePlane linear_plane(const FeaturePlane& in, const Tensor& weight, const Tensor& bias);

struct GcfTrace {
  FeaturePlane laf_bev, camera_bev, radar_bev;
  FeaturePlane attended;  // sum of both MDA streams
  FeatureVolume output;   // Conv(C2H(attended) + F_laf)
};

/// Global cross-attention fusion.
GcfTrace gcf_trace(const FeatureVolume& fused, const FeatureVolume& camera, const FeatureVolume& radar,
                   const BlockWeights& w, const FusionConfig& cfg);
FeatureVolume gcf(const FeatureVolume& fused, const FeatureVolume& camera, const FeatureVolume& radar,
                  const BlockWeights& w, const FusionConfig& cfg);

struct AlignedVolume {
  FeatureVolume features;
  std::vector<std::uint8_t> outside;  // per cell, (h*W + w)*Z + z
};

/// Samples `past` at the current-frame voxel centers mapped through
/// `current_to_past` (trilinear, zero outside).
AlignedVolume align_to_current(const FeatureVolume& past, const RigidPose& current_to_past, const GridSpec& grid);

/// Temporal fusion. volumes[0] is the current frame, volumes[k] lies k frames
/// back; current_to_past[k-1] maps current-frame coordinates into frame k.
/// Runs the "temporal" conv -> batch-norm -> ReLU stack on the concatenation.
FeatureVolume temporal_fuse(std::span<const FeatureVolume> volumes, std::span<const RigidPose> current_to_past,
                            const GridSpec& grid, const BlockWeights& w);

/// Single-scale camera lift: every voxel center is projected into each
/// camera, deformable attention runs on that camera's feature plane around
/// the projected pixel, and valid cameras are averaged. Invisible voxels are
/// zero.
FeatureVolume image_lift(std::span<const FeaturePlane> planes, std::span<const CameraModel> cams,
                         const GridSpec& grid, const BlockWeights& w, const FusionConfig& cfg);

/// Feature-plane coordinates of an image pixel position.
GridPos2 pixel_to_plane(const Projection& px, const CameraModel& cam, const FeaturePlane& plane);

/// Linear stack "head.<i>" with ReLU between layers and a softmax over
/// classes. Output rows follow FeatureVolume cell order (h*W + w)*Z + z.
ClassProbabilities occupancy_head(const FeatureVolume& features, const BlockWeights& w);

/// Argmax (ties to the smaller class) in GridSpec order; cell (h, w, z) maps
/// to voxel (ix = w, iy = h, iz = z).
VoxelGrid argmax_grid(const ClassProbabilities& probs, const GridSpec& grid);

/// Re-orders head output rows into GridSpec linear order.
ClassProbabilities to_grid_order(const ClassProbabilities& probs, const GridSpec& grid);

}  // namespace occukit
