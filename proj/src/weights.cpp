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

#include "occukit/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>

#include "binary_io.hpp"
#include "occukit/error.hpp"

namespace occukit {

namespace {

constexpr std::uint32_t kWeightsVersion = 1;
constexpr std::size_t kNameWidth = 32;

std::string dims_str(const std::vector<std::size_t>& d) {
  std::string s = "[";
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
  return s + "]";
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

// Visits every tensor of the architecture with its shape; `kind` is 1 for
// batch-norm scales, 2 for batch-norm shifts, 0 otherwise.
void for_each_tensor(const FusionConfig& cfg,
                     const std::function<void(const std::string&, std::vector<std::size_t>, int)>& fn) {
  const std::size_t c = cfg.channels, cp = cfg.bev_channels();
  const std::size_t offsets = cfg.heads * cfg.points * 2, logits = cfg.heads * cfg.points;
  auto conv = [&](const std::string& prefix, std::size_t out, std::size_t in) {
    fn(prefix + ".weight", {out, in, 3, 3, 3}, 0);
    fn(prefix + ".bias", {out}, 0);
  };
  auto linear = [&](const std::string& prefix, std::size_t out, std::size_t in) {
    fn(prefix + ".weight", {out, in}, 0);
    fn(prefix + ".bias", {out}, 0);
  };
  auto mda = [&](const std::string& prefix, std::size_t query, std::size_t value, std::size_t model) {
    linear(prefix + ".offset", offsets, query);
    linear(prefix + ".attn", logits, query);
    linear(prefix + ".value", model, value);
    linear(prefix + ".out", model, model);
  };

  linear("pillar", c, kPillarInputs);

  fn("rhs.pos_h", {c, cfg.depth}, 0);
  conv("rhs.gate.0", c, c);
  conv("rhs.gate.1", c, c);
  conv("rhs.att", c, c);
  conv("rhs.encoder.0", c, c);
  conv("rhs.encoder.1", c, c);

  conv("laf.0", c, 2 * c);
  conv("laf.1", 1, c);

  linear("gcf.proj_laf", cp, cp);
  linear("gcf.proj_c", cp, cp);
  linear("gcf.proj_r", cp, cp);
  fn("gcf.pos_c", {cp, cfg.height, cfg.width}, 0);
  fn("gcf.pos_r", {cp, cfg.height, cfg.width}, 0);
  mda("gcf.mda_c", cp, cp, cp);
  mda("gcf.mda_r", cp, cp, cp);
  conv("gcf.conv", c, c);

  fn("lift.query", {c, cfg.depth}, 0);
  mda("lift.mda", c, cfg.image_channels, c);

  conv("temporal.0", c, cfg.frames * c);
  fn("temporal.0.bn_scale", {c}, 1);
  fn("temporal.0.bn_shift", {c}, 2);
  conv("temporal.1", c, c);
  fn("temporal.1.bn_scale", {c}, 1);
  fn("temporal.1.bn_shift", {c}, 2);

  linear("head.0", c, c);
  linear("head.1", cfg.classes, c);
}

}  // namespace

void FusionConfig::validate() const {
  if (channels == 0 || height == 0 || width == 0 || depth == 0 || classes == 0 || image_channels == 0)
    fail(ErrorKind::invalid_argument, "fusion dims must be positive");
  if (heads == 0 || points == 0 || frames == 0)
    fail(ErrorKind::invalid_argument, "fusion heads, points and frames must be >= 1");
  if (bev_channels() % heads != 0) fail(ErrorKind::invalid_argument, "C*Z must be divisible by the head count");
  if (channels % heads != 0) fail(ErrorKind::invalid_argument, "C must be divisible by the head count");
  if (classes > 255) fail(ErrorKind::invalid_argument, "at most 255 classes");
}

Tensor::Tensor(std::vector<std::size_t> d) : dims(std::move(d)), data(numel(), 0.0) {}

std::size_t Tensor::numel() const {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

const Tensor& BlockWeights::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) fail(ErrorKind::shape, "missing weight tensor '" + name + "'");
  return it->second;
}

const Tensor& BlockWeights::get(const std::string& name, const std::vector<std::size_t>& dims) const {
  const Tensor& t = get(name);
  if (t.dims != dims)
    fail(ErrorKind::shape, "weight tensor '" + name + "' has shape " + dims_str(t.dims) + ", expected " + dims_str(dims));
  return t;
}

void BlockWeights::set(const std::string& name, Tensor t) {
  if (name.empty() || name.size() > kNameWidth) fail(ErrorKind::invalid_argument, "bad weight tensor name '" + name + "'");
  if (t.data.size() != t.numel()) fail(ErrorKind::shape, "weight tensor '" + name + "' data does not match its dims");
  tensors_[name] = std::move(t);
}

std::size_t BlockWeights::stack_depth(const std::string& prefix) const {
  std::size_t n = 0;
  while (contains(prefix + "." + std::to_string(n) + ".weight")) ++n;
  return n;
}

bool BlockWeights::all_finite() const {
  for (const auto& [name, t] : tensors_)
    for (double v : t.data)
      if (!std::isfinite(v)) return false;
  return true;
}

BlockWeights init_weights(const FusionConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  BlockWeights w;
  for_each_tensor(cfg, [&](const std::string& name, std::vector<std::size_t> dims, int kind) {
    Tensor t(std::move(dims));
    if (kind == 1) {
      std::fill(t.data.begin(), t.data.end(), 1.0);
    } else if (kind == 0) {
      const std::uint64_t h = fnv1a(name);
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
      std::mt19937_64 rng(seq);
      const bool matrix = t.dims.size() >= 2 && name.ends_with(".weight");
      const double sd = matrix ? std::sqrt(2.0 / static_cast<double>(t.numel() / t.dims[0])) : 0.02;
      // Box-Muller on 53-bit uniforms keeps the draws identical across standard libraries.
      const auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
      for (double& v : t.data) {
        const double u1 = 1.0 - uniform(), u2 = uniform();
        v = sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      }
    }
    w.set(name, std::move(t));
  });
  return w;
}

BlockWeights zero_weights(const FusionConfig& cfg) {
  cfg.validate();
  BlockWeights w;
  for_each_tensor(cfg, [&](const std::string& name, std::vector<std::size_t> dims, int) { w.set(name, Tensor(std::move(dims))); });
  return w;
}

std::vector<std::uint8_t> encode_weights(const BlockWeights& w) {
  detail::ByteWriter out;
  out.bytes("MOBW");
  out.u32(kWeightsVersion);
  out.u32(static_cast<std::uint32_t>(w.tensors().size()));
  for (const auto& [name, t] : w.tensors()) {
    out.fixed(name, kNameWidth, '\0');
    out.u32(static_cast<std::uint32_t>(t.dims.size()));
    for (std::size_t d : t.dims) out.u32(static_cast<std::uint32_t>(d));
    for (double v : t.data) out.f64(v);
  }
  return std::move(out.data());
}

BlockWeights decode_weights(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader in(bytes, "MOBW weights");
  if (bytes.size() < 4 || in.bytes(4) != "MOBW") fail(ErrorKind::format, "bad MOBW header");
  if (in.u32() != kWeightsVersion) fail(ErrorKind::format, "unsupported MOBW version");
  const std::uint32_t count = in.u32();
  BlockWeights w;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.fixed(kNameWidth, '\0');
    const std::uint32_t rank = in.u32();
    if (rank > 8) fail(ErrorKind::format, "MOBW tensor '" + name + "' has implausible rank");
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = in.u32();
    Tensor t(std::move(dims));
    in.need(t.numel() * 8);
    for (double& v : t.data) v = in.f64();
    if (w.contains(name)) fail(ErrorKind::format, "duplicate MOBW tensor '" + name + "'");
    w.set(name, std::move(t));
  }
  if (in.remaining() != 0) fail(ErrorKind::format, "trailing bytes after MOBW tensors");
  return w;
}

void save_weights(const BlockWeights& w, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_weights(w));
}

BlockWeights load_weights(const std::filesystem::path& path) {
  try {
    return decode_weights(detail::read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::format) fail(ErrorKind::format, e.what() + std::string(" in ") + path.string());
    throw;
  }
}

}  // namespace occukit
