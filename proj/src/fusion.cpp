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

#include "occukit/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "occukit/error.hpp"
#include "occukit/parallel.hpp"

namespace occukit {

namespace {

std::string shape_str(const FeatureVolume& v) {
  return std::to_string(v.channels) + "x" + std::to_string(v.height) + "x" + std::to_string(v.width) + "x" +
         std::to_string(v.depth);
}

FeatureVolume apply(FeatureVolume v, double (*fn)(double)) {
  for (double& x : v.values) x = fn(x);
  return v;
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

const Tensor& conv_weight(const BlockWeights& w, const std::string& prefix, std::size_t in_channels) {
  const Tensor& t = w.get(prefix + ".weight");
  if (t.dims.size() != 5 || t.dims[1] != in_channels || t.dims[2] != 3 || t.dims[3] != 3 || t.dims[4] != 3)
    fail(ErrorKind::shape, prefix + ": conv kernel must be [Cout, " + std::to_string(in_channels) + ", 3, 3, 3]");
  return t;
}

FeatureVolume conv_layer(const FeatureVolume& in, const BlockWeights& w, const std::string& prefix) {
  const Tensor& k = conv_weight(w, prefix, in.channels);
  return conv3d(in, k, w.get(prefix + ".bias", {k.dims[0]}));
}

// Conv stack "<prefix>.<i>" with `between` after every layer but the last and
// `last` after the final one.
FeatureVolume conv_stack(FeatureVolume x, const BlockWeights& w, const std::string& prefix, double (*between)(double),
                         double (*last)(double)) {
  const std::size_t depth = w.stack_depth(prefix);
  if (depth == 0) fail(ErrorKind::shape, prefix + ": no layers");
  for (std::size_t i = 0; i < depth; ++i) {
    x = conv_layer(x, w, prefix + "." + std::to_string(i));
    x = apply(std::move(x), i + 1 < depth ? between : last);
  }
  return x;
}

FeatureVolume add(FeatureVolume a, const FeatureVolume& b) {
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] += b.values[i];
  return a;
}

void require_grid_matches(const GridSpec& grid, std::size_t h, std::size_t w, std::size_t z, const char* block) {
  if (grid.ny() != h || grid.nx() != w || grid.nz() != z)
    fail(ErrorKind::shape, std::string(block) + ": grid dims do not match the feature volume (H=NY, W=NX, Z=NZ)");
}

// Bilinear sample of channels [c0, c0 + n) into out.
void sample_range(const FeaturePlane& plane, double ph, double pw, std::size_t c0, std::size_t n, double* out) {
  const double hmax = static_cast<double>(plane.height - 1), wmax = static_cast<double>(plane.width - 1);
  if (!(ph >= 0.0 && ph <= hmax && pw >= 0.0 && pw <= wmax)) {
    std::fill(out, out + n, 0.0);
    return;
  }
  const double fh = std::floor(ph), fw = std::floor(pw);
  const auto h0 = static_cast<std::size_t>(fh), w0 = static_cast<std::size_t>(fw);
  const std::size_t h1 = h0 + 1 < plane.height ? h0 + 1 : h0, w1 = w0 + 1 < plane.width ? w0 + 1 : w0;
  const double ah = ph - fh, aw = pw - fw;
  const double w00 = (1 - ah) * (1 - aw), w01 = (1 - ah) * aw, w10 = ah * (1 - aw), w11 = ah * aw;
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t ch = c0 + c;
    out[c] = w00 * plane.at(ch, h0, w0) + w01 * plane.at(ch, h0, w1) + w10 * plane.at(ch, h1, w0) +
             w11 * plane.at(ch, h1, w1);
  }
}

Tensor eye(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data[i * n + i] = 1.0;
  return t;
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

FeatureVolume conv3d(const FeatureVolume& in, const Tensor& weight, const Tensor& bias) {
  if (weight.dims.size() != 5 || weight.dims[1] != in.channels || weight.dims[2] != 3 || weight.dims[3] != 3 ||
      weight.dims[4] != 3)
    fail(ErrorKind::shape, "conv3d: kernel does not match input channels");
  const std::size_t co = weight.dims[0];
  if (bias.dims != std::vector<std::size_t>{co}) fail(ErrorKind::shape, "conv3d: bias does not match kernel");
  const std::size_t ci = in.channels, H = in.height, W = in.width, Z = in.depth;
  FeatureVolume out(co, H, W, Z);
  parallel_for(co * H, [&](std::size_t begin, std::size_t end) {
    for (std::size_t job = begin; job < end; ++job) {
      const std::size_t o = job / H, h = job % H;
      for (std::size_t w = 0; w < W; ++w)
        for (std::size_t z = 0; z < Z; ++z) {
          double acc = bias.data[o];
          for (std::size_t c = 0; c < ci; ++c) {
            const double* k = weight.data.data() + (o * ci + c) * 27;
            for (int dh = 0; dh < 3; ++dh) {
              const long hh = static_cast<long>(h) + dh - 1;
              if (hh < 0 || hh >= static_cast<long>(H)) continue;
              for (int dw = 0; dw < 3; ++dw) {
                const long ww = static_cast<long>(w) + dw - 1;
                if (ww < 0 || ww >= static_cast<long>(W)) continue;
                for (int dz = 0; dz < 3; ++dz) {
                  const long zz = static_cast<long>(z) + dz - 1;
                  if (zz < 0 || zz >= static_cast<long>(Z)) continue;
                  acc += k[(dh * 3 + dw) * 3 + dz] * in.at(c, hh, ww, zz);
                }
              }
            }
          }
          out.at(o, h, w, z) = acc;
        }
    }
  });
  return out;
}

std::array<double, kPillarInputs> pillar_features(const PointCloud& radar, std::size_t i, const GridSpec& grid,
                                                  const VoxelIndex& cell) {
  const Vec3& p = radar.xyz[i];
  const Vec3 center = grid.voxel_center(cell);
  return {p.x(),         p.y(),        p.z(),           radar.vx[i],     radar.vy[i],
          radar.amp[i],  radar.snr[i], radar.t[i],      p.x() - center.x(), p.y() - center.y()};
}

FeaturePlane pillar_encode(const PointCloud& radar, const GridSpec& grid, const BlockWeights& w, const FusionConfig& cfg) {
  require_grid_matches(grid, cfg.height, cfg.width, grid.nz(), "pillar_encode");
  const std::size_t C = cfg.channels;
  const Tensor& weight = w.get("pillar.weight", {C, kPillarInputs});
  const Tensor& bias = w.get("pillar.bias", {C});
  radar.validate();
  if (!radar.empty() && !(radar.has_radar() && !radar.vy.empty() && !radar.amp.empty() && !radar.snr.empty() &&
                          !radar.t.empty()))
    fail(ErrorKind::invalid_argument, "pillar_encode: radar points need vx, vy, amp, snr and t");

  FeaturePlane out(C, cfg.height, cfg.width);  // ReLU outputs are >= 0, so zero is the max-pool identity
  for (std::size_t i = 0; i < radar.size(); ++i) {
    const auto cell = grid.world_to_voxel(radar.xyz[i]);
    if (!cell) continue;
    const auto f = pillar_features(radar, i, grid, *cell);
    const std::size_t h = (*cell)[1], wc = (*cell)[0];
    for (std::size_t c = 0; c < C; ++c) {
      double acc = bias.data[c];
      for (std::size_t j = 0; j < kPillarInputs; ++j) acc += weight.data[c * kPillarInputs + j] * f[j];
      double& slot = out.at(c, h, wc);
      slot = std::max(slot, relu(acc));
    }
  }
  return out;
}

RhsTrace rhs_trace(const FeaturePlane& bev, const BlockWeights& w, const FusionConfig& cfg) {
  const std::size_t C = cfg.channels, H = cfg.height, W = cfg.width, Z = cfg.depth;
  if (bev.channels != C || bev.height != H || bev.width != W)
    fail(ErrorKind::shape, "rhs: BEV plane does not match the configured C x H x W");
  const Tensor& pos = w.get("rhs.pos_h", {C, Z});

  RhsTrace t;
  t.initial = FeatureVolume(C, H, W, Z);
  FeatureVolume encoded(C, H, W, Z);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t h = 0; h < H; ++h)
      for (std::size_t x = 0; x < W; ++x)
        for (std::size_t z = 0; z < Z; ++z) {
          t.initial.at(c, h, x, z) = bev.at(c, h, x);
          encoded.at(c, h, x, z) = bev.at(c, h, x) + pos.data[c * Z + z];
        }

  t.gate = conv_stack(std::move(encoded), w, "rhs.gate", relu, sigmoid);
  if (!t.gate.same_shape(t.initial)) fail(ErrorKind::shape, "rhs: gate network must preserve the channel count");
  t.modulated = t.initial;
  for (std::size_t i = 0; i < t.modulated.values.size(); ++i) t.modulated.values[i] *= t.gate.values[i];
  t.attention = conv_layer(t.modulated, w, "rhs.att");
  if (!t.attention.same_shape(t.initial)) fail(ErrorKind::shape, "rhs: attention conv must preserve the channel count");
  t.output = conv_stack(add(t.initial, t.attention), w, "rhs.encoder", softplus, softplus);
  return t;
}

FeatureVolume rhs(const FeaturePlane& bev, const BlockWeights& w, const FusionConfig& cfg) {
  return rhs_trace(bev, w, cfg).output;
}

LafResult laf(const FeatureVolume& camera, const FeatureVolume& radar, const BlockWeights& w) {
  if (!camera.same_shape(radar))
    fail(ErrorKind::shape, "laf: camera volume " + shape_str(camera) + " vs radar volume " + shape_str(radar));
  FeatureVolume cat(camera.channels * 2, camera.height, camera.width, camera.depth);
  std::copy(camera.values.begin(), camera.values.end(), cat.values.begin());
  std::copy(radar.values.begin(), radar.values.end(), cat.values.begin() + camera.values.size());

  LafResult r;
  r.weight = conv_stack(std::move(cat), w, "laf", relu, sigmoid);
  if (r.weight.channels != 1) fail(ErrorKind::shape, "laf: weight network must emit one channel");
  r.fused = FeatureVolume(camera.channels, camera.height, camera.width, camera.depth);
  const std::size_t cells = camera.cells();
  for (std::size_t c = 0; c < camera.channels; ++c)
    for (std::size_t i = 0; i < cells; ++i) {
      const std::size_t k = c * cells + i;
      // lerp stays inside [min, max] of its endpoints for weights in [0, 1].
      r.fused.values[k] = std::lerp(radar.values[k], camera.values[k], r.weight.values[i]);
    }
  return r;
}

MdaParams MdaParams::from(const BlockWeights& w, const std::string& prefix, std::size_t heads, std::size_t points,
                          std::size_t query_dim, std::size_t value_dim, std::size_t model_dim) {
  if (heads == 0 || points == 0 || model_dim % heads != 0)
    fail(ErrorKind::shape, prefix + ": model dim must be divisible by the head count");
  MdaParams p;
  p.heads = heads;
  p.points = points;
  p.query_dim = query_dim;
  p.value_dim = value_dim;
  p.model_dim = model_dim;
  p.offset_w = w.get(prefix + ".offset.weight", {heads * points * 2, query_dim});
  p.offset_b = w.get(prefix + ".offset.bias", {heads * points * 2});
  p.attn_w = w.get(prefix + ".attn.weight", {heads * points, query_dim});
  p.attn_b = w.get(prefix + ".attn.bias", {heads * points});
  p.value_w = w.get(prefix + ".value.weight", {model_dim, value_dim});
  p.value_b = w.get(prefix + ".value.bias", {model_dim});
  p.out_w = w.get(prefix + ".out.weight", {model_dim, model_dim});
  p.out_b = w.get(prefix + ".out.bias", {model_dim});
  return p;
}

MdaParams MdaParams::identity(std::size_t heads, std::size_t points, std::size_t query_dim, std::size_t dim) {
  MdaParams p;
  p.heads = heads;
  p.points = points;
  p.query_dim = query_dim;
  p.value_dim = dim;
  p.model_dim = dim;
  p.offset_w = Tensor({heads * points * 2, query_dim});
  p.offset_b = Tensor({heads * points * 2});
  p.attn_w = Tensor({heads * points, query_dim});
  p.attn_b = Tensor({heads * points});
  p.value_w = eye(dim);
  p.value_b = Tensor({dim});
  p.out_w = eye(dim);
  p.out_b = Tensor({dim});
  return p;
}

FeaturePlane linear_plane(const FeaturePlane& in, const Tensor& weight, const Tensor& bias) {
  if (weight.dims.size() != 2 || weight.dims[1] != in.channels || bias.dims != std::vector<std::size_t>{weight.dims[0]})
    fail(ErrorKind::shape, "linear: weight does not match input channels");
  const std::size_t out_ch = weight.dims[0], cells = in.height * in.width;
  FeaturePlane out(out_ch, in.height, in.width);
  for (std::size_t o = 0; o < out_ch; ++o)
    for (std::size_t i = 0; i < cells; ++i) {
      double acc = bias.data[o];
      for (std::size_t c = 0; c < in.channels; ++c) acc += weight.data[o * in.channels + c] * in.values[c * cells + i];
      out.values[o * cells + i] = acc;
    }
  return out;
}

FeaturePlane project_values(const FeaturePlane& value, const MdaParams& p) {
  if (value.channels != p.value_dim) fail(ErrorKind::shape, "mda: value plane channels do not match the value projection");
  return linear_plane(value, p.value_w, p.value_b);
}

std::vector<double> attend(std::span<const double> queries, const FeaturePlane& projected,
                           std::span<const GridPos2> refs, const MdaParams& p) {
  const std::size_t n = refs.size(), qd = p.query_dim, md = p.model_dim, hd = md / p.heads;
  if (queries.size() != n * qd) fail(ErrorKind::shape, "mda: query block does not match the reference points");
  if (projected.channels != md) fail(ErrorKind::shape, "mda: projected plane does not match the model dim");
  const double limit = static_cast<double>(projected.height + projected.width) / 4.0;

  std::vector<double> out(n * md, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> logits(p.points), concat(md), sample(hd);
    for (std::size_t i = begin; i < end; ++i) {
      const double* q = queries.data() + i * qd;
      auto dot = [&](const Tensor& wt, const Tensor& b, std::size_t row) {
        double acc = b.data[row];
        for (std::size_t j = 0; j < qd; ++j) acc += wt.data[row * qd + j] * q[j];
        return acc;
      };
      std::fill(concat.begin(), concat.end(), 0.0);
      for (std::size_t h = 0; h < p.heads; ++h) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < p.points; ++s) {
          logits[s] = dot(p.attn_w, p.attn_b, h * p.points + s);
          peak = std::max(peak, logits[s]);
        }
        double norm = 0.0;
        for (double& l : logits) norm += (l = std::exp(l - peak));
        for (std::size_t s = 0; s < p.points; ++s) {
          const std::size_t row = (h * p.points + s) * 2;
          const double dh = std::clamp(dot(p.offset_w, p.offset_b, row), -limit, limit);
          const double dw = std::clamp(dot(p.offset_w, p.offset_b, row + 1), -limit, limit);
          sample_range(projected, refs[i][0] + dh, refs[i][1] + dw, h * hd, hd, sample.data());
          const double a = logits[s] / norm;
          for (std::size_t d = 0; d < hd; ++d) concat[h * hd + d] += a * sample[d];
        }
      }
      double* o = out.data() + i * md;
      for (std::size_t r = 0; r < md; ++r) {
        double acc = p.out_b.data[r];
        for (std::size_t d = 0; d < md; ++d) acc += p.out_w.data[r * md + d] * concat[d];
        o[r] = acc;
      }
    }
  });
  return out;
}

std::vector<GridPos2> cell_centers(std::size_t height, std::size_t width) {
  std::vector<GridPos2> refs;
  refs.reserve(height * width);
  for (std::size_t h = 0; h < height; ++h)
    for (std::size_t w = 0; w < width; ++w) refs.push_back({static_cast<double>(h), static_cast<double>(w)});
  return refs;
}

FeaturePlane mda(const FeaturePlane& query, const FeaturePlane& value, const FeaturePlane& pos_enc,
                 std::span<const GridPos2> refs, const MdaParams& p) {
  if (!query.same_shape(pos_enc)) fail(ErrorKind::shape, "mda: positional encoding does not match the query plane");
  if (query.channels != p.query_dim) fail(ErrorKind::shape, "mda: query channels do not match the parameters");
  const std::size_t cells = query.height * query.width;
  if (refs.size() != cells) fail(ErrorKind::shape, "mda: need one reference point per query cell");

  std::vector<double> q(cells * p.query_dim);
  for (std::size_t i = 0; i < cells; ++i)
    for (std::size_t c = 0; c < p.query_dim; ++c)
      q[i * p.query_dim + c] = query.values[c * cells + i] + pos_enc.values[c * cells + i];

  const auto flat = attend(q, project_values(value, p), refs, p);
  FeaturePlane out(p.model_dim, query.height, query.width);
  for (std::size_t i = 0; i < cells; ++i)
    for (std::size_t c = 0; c < p.model_dim; ++c) out.values[c * cells + i] = flat[i * p.model_dim + c];
  return out;
}

GcfTrace gcf_trace(const FeatureVolume& fused, const FeatureVolume& camera, const FeatureVolume& radar,
                   const BlockWeights& w, const FusionConfig& cfg) {
  if (!fused.same_shape(camera) || !fused.same_shape(radar))
    fail(ErrorKind::shape, "gcf: LAF " + shape_str(fused) + ", camera " + shape_str(camera) + " and radar " +
                               shape_str(radar) + " volumes must match");
  if (fused.channels != cfg.channels || fused.height != cfg.height || fused.width != cfg.width || fused.depth != cfg.depth)
    fail(ErrorKind::shape, "gcf: volumes do not match the configured C x H x W x Z");
  const std::size_t cp = cfg.bev_channels();
  auto project = [&](const FeatureVolume& v, const std::string& name) {
    return linear_plane(h2c(v), w.get("gcf." + name + ".weight", {cp, cp}), w.get("gcf." + name + ".bias", {cp}));
  };

  GcfTrace t;
  t.laf_bev = project(fused, "proj_laf");
  t.camera_bev = project(camera, "proj_c");
  t.radar_bev = project(radar, "proj_r");

  const auto refs = cell_centers(cfg.height, cfg.width);
  auto pos = [&](const std::string& name) {
    FeaturePlane p(cp, cfg.height, cfg.width);
    p.values = w.get(name, {cp, cfg.height, cfg.width}).data;
    return p;
  };
  const auto mda_c = MdaParams::from(w, "gcf.mda_c", cfg.heads, cfg.points, cp, cp, cp);
  const auto mda_r = MdaParams::from(w, "gcf.mda_r", cfg.heads, cfg.points, cp, cp, cp);
  t.attended = mda(t.laf_bev, t.camera_bev, pos("gcf.pos_c"), refs, mda_c);
  const FeaturePlane radar_stream = mda(t.laf_bev, t.radar_bev, pos("gcf.pos_r"), refs, mda_r);
  for (std::size_t i = 0; i < t.attended.values.size(); ++i) t.attended.values[i] += radar_stream.values[i];

  t.output = conv_layer(add(c2h(t.attended, cfg.depth), fused), w, "gcf.conv");
  if (!t.output.same_shape(fused)) fail(ErrorKind::shape, "gcf: final conv must preserve the channel count");
  return t;
}

FeatureVolume gcf(const FeatureVolume& fused, const FeatureVolume& camera, const FeatureVolume& radar,
                  const BlockWeights& w, const FusionConfig& cfg) {
  return gcf_trace(fused, camera, radar, w, cfg).output;
}

AlignedVolume align_to_current(const FeatureVolume& past, const RigidPose& current_to_past, const GridSpec& grid) {
  require_grid_matches(grid, past.height, past.width, past.depth, "temporal_fuse");
  const double vs = grid.voxel_size();
  std::vector<GridPos3> positions;
  positions.reserve(past.cells());
  for (std::uint32_t h = 0; h < past.height; ++h)
    for (std::uint32_t x = 0; x < past.width; ++x)
      for (std::uint32_t z = 0; z < past.depth; ++z) {
        const Vec3 q = current_to_past.apply(grid.voxel_center({x, h, z}));
        positions.push_back({(q.y() - grid.y().min) / vs - 0.5, (q.x() - grid.x().min) / vs - 0.5,
                             (q.z() - grid.z().min) / vs - 0.5});
      }
  const Samples s = trilinear_sample(past, positions);
  AlignedVolume out{FeatureVolume(past.channels, past.height, past.width, past.depth), s.outside};
  const std::size_t cells = past.cells();
  for (std::size_t i = 0; i < cells; ++i)
    for (std::size_t c = 0; c < past.channels; ++c) out.features.values[c * cells + i] = s.values[i * past.channels + c];
  return out;
}

FeatureVolume temporal_fuse(std::span<const FeatureVolume> volumes, std::span<const RigidPose> current_to_past,
                            const GridSpec& grid, const BlockWeights& w) {
  if (volumes.empty()) fail(ErrorKind::invalid_argument, "temporal_fuse: need at least one frame");
  if (current_to_past.size() + 1 != volumes.size())
    fail(ErrorKind::invalid_argument, "temporal_fuse: " + std::to_string(volumes.size()) + " volumes need " +
                                          std::to_string(volumes.size() - 1) + " relative poses, got " +
                                          std::to_string(current_to_past.size()));
  const FeatureVolume& cur = volumes[0];
  for (const auto& v : volumes)
    if (!v.same_shape(cur)) fail(ErrorKind::shape, "temporal_fuse: frame volumes differ in shape");
  require_grid_matches(grid, cur.height, cur.width, cur.depth, "temporal_fuse");

  FeatureVolume x(cur.channels * volumes.size(), cur.height, cur.width, cur.depth);
  std::copy(cur.values.begin(), cur.values.end(), x.values.begin());
  for (std::size_t k = 1; k < volumes.size(); ++k) {
    const auto aligned = align_to_current(volumes[k], current_to_past[k - 1], grid);
    std::copy(aligned.features.values.begin(), aligned.features.values.end(), x.values.begin() + k * cur.values.size());
  }

  const std::size_t depth = w.stack_depth("temporal");
  if (depth == 0) fail(ErrorKind::shape, "temporal: no layers");
  for (std::size_t i = 0; i < depth; ++i) {
    const std::string prefix = "temporal." + std::to_string(i);
    x = conv_layer(x, w, prefix);
    const Tensor& scale = w.get(prefix + ".bn_scale", {x.channels});
    const Tensor& shift = w.get(prefix + ".bn_shift", {x.channels});
    const std::size_t cells = x.cells();
    for (std::size_t c = 0; c < x.channels; ++c)
      for (std::size_t j = 0; j < cells; ++j) {
        double& v = x.values[c * cells + j];
        v = relu(scale.data[c] * v + shift.data[c]);
      }
  }
  return x;
}

GridPos2 pixel_to_plane(const Projection& px, const CameraModel& cam, const FeaturePlane& plane) {
  // Pixel i covers [i, i + 1); feature cell j covers the matching scaled span.
  return {px.v * static_cast<double>(plane.height) / cam.height - 0.5,
          px.u * static_cast<double>(plane.width) / cam.width - 0.5};
}

FeatureVolume image_lift(std::span<const FeaturePlane> planes, std::span<const CameraModel> cams,
                         const GridSpec& grid, const BlockWeights& w, const FusionConfig& cfg) {
  if (planes.size() != cams.size()) fail(ErrorKind::invalid_argument, "image_lift: one feature plane per camera");
  require_grid_matches(grid, cfg.height, cfg.width, cfg.depth, "image_lift");
  const std::size_t C = cfg.channels, H = cfg.height, W = cfg.width, Z = cfg.depth;
  const Tensor& query = w.get("lift.query", {C, Z});
  const auto params = MdaParams::from(w, "lift.mda", cfg.heads, cfg.points, C, cfg.image_channels, C);

  FeatureVolume out(C, H, W, Z);
  const std::size_t cells = out.cells();
  std::vector<std::uint32_t> hits(cells, 0);
  for (std::size_t k = 0; k < cams.size(); ++k) {
    if (planes[k].channels != cfg.image_channels)
      fail(ErrorKind::shape, "image_lift: camera '" + cams[k].name + "' plane has the wrong channel count");
    std::vector<double> queries;
    std::vector<GridPos2> refs;
    std::vector<std::size_t> cell_of;
    for (std::uint32_t h = 0; h < H; ++h)
      for (std::uint32_t x = 0; x < W; ++x)
        for (std::uint32_t z = 0; z < Z; ++z) {
          const auto px = cams[k].project(grid.voxel_center({x, h, z}));
          if (!px) continue;
          refs.push_back(pixel_to_plane(*px, cams[k], planes[k]));
          for (std::size_t c = 0; c < C; ++c) queries.push_back(query.data[c * Z + z]);
          cell_of.push_back(out.index(0, h, x, z));
        }
    if (refs.empty()) continue;
    const auto feats = attend(queries, project_values(planes[k], params), refs, params);
    for (std::size_t i = 0; i < refs.size(); ++i) {
      ++hits[cell_of[i]];
      for (std::size_t c = 0; c < C; ++c) out.values[c * cells + cell_of[i]] += feats[i * C + c];
    }
  }
  for (std::size_t i = 0; i < cells; ++i)
    if (hits[i] > 1)
      for (std::size_t c = 0; c < C; ++c) out.values[c * cells + i] /= hits[i];
  return out;
}

ClassProbabilities occupancy_head(const FeatureVolume& features, const BlockWeights& w) {
  const std::size_t layers = w.stack_depth("head");
  if (layers == 0) fail(ErrorKind::shape, "head: no layers");
  std::vector<const Tensor*> ws, bs;
  std::size_t in = features.channels;
  for (std::size_t i = 0; i < layers; ++i) {
    const std::string prefix = "head." + std::to_string(i);
    const Tensor& wt = w.get(prefix + ".weight");
    if (wt.dims.size() != 2 || wt.dims[1] != in)
      fail(ErrorKind::shape, prefix + ": weight must be [out, " + std::to_string(in) + "]");
    ws.push_back(&wt);
    bs.push_back(&w.get(prefix + ".bias", {wt.dims[0]}));
    in = wt.dims[0];
  }
  const std::size_t classes = in, cells = features.cells();
  ClassProbabilities probs(cells, classes);
  parallel_for(cells, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x, y;
    for (std::size_t i = begin; i < end; ++i) {
      x.resize(features.channels);
      for (std::size_t c = 0; c < features.channels; ++c) x[c] = features.values[c * cells + i];
      for (std::size_t l = 0; l < layers; ++l) {
        const Tensor& wt = *ws[l];
        const std::size_t o = wt.dims[0], n = wt.dims[1];
        y.assign(o, 0.0);
        for (std::size_t r = 0; r < o; ++r) {
          double acc = bs[l]->data[r];
          for (std::size_t j = 0; j < n; ++j) acc += wt.data[r * n + j] * x[j];
          y[r] = l + 1 < layers ? relu(acc) : acc;
        }
        std::swap(x, y);
      }
      const double peak = *std::max_element(x.begin(), x.end());
      double norm = 0.0;
      for (double& v : x) norm += (v = std::exp(v - peak));
      for (std::size_t c = 0; c < classes; ++c) probs.at(i, c) = x[c] / norm;
    }
  });
  return probs;
}

ClassProbabilities to_grid_order(const ClassProbabilities& probs, const GridSpec& grid) {
  if (probs.voxels != grid.voxel_count()) fail(ErrorKind::shape, "probabilities do not match the grid");
  ClassProbabilities out(probs.voxels, probs.classes);
  const std::size_t H = grid.ny(), W = grid.nx(), Z = grid.nz();
  for (std::uint32_t h = 0; h < H; ++h)
    for (std::uint32_t x = 0; x < W; ++x)
      for (std::uint32_t z = 0; z < Z; ++z) {
        const std::size_t src = (std::size_t{h} * W + x) * Z + z, dst = grid.linear(x, h, z);
        std::copy_n(probs.values.begin() + src * probs.classes, probs.classes, out.values.begin() + dst * probs.classes);
      }
  return out;
}

VoxelGrid argmax_grid(const ClassProbabilities& probs, const GridSpec& grid) {
  const ClassProbabilities ordered = to_grid_order(probs, grid);
  VoxelGrid g(grid, static_cast<std::uint32_t>(probs.classes));
  for (std::size_t i = 0; i < ordered.voxels; ++i) {
    const auto row = ordered.row(i);
    g.labels[i] = static_cast<std::uint8_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return g;
}

}  // namespace occukit
