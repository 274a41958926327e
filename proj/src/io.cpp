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

#include "occukit/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "binary_io.hpp"
#include "json.hpp"
#include "occukit/error.hpp"

namespace occukit {

namespace {

using json = nlohmann::json;
using detail::ByteReader;
using detail::ByteWriter;

constexpr std::uint32_t kVersion = 1;

void expect_magic(ByteReader& r, std::string_view magic) {
  if (r.remaining() < 8 || r.bytes(4) != magic) fail(ErrorKind::format, "bad " + std::string(magic) + " header");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    fail(ErrorKind::format, "unsupported " + std::string(magic) + " version " + std::to_string(version));
}

template <class F>
auto with_path(const fs::path& path, F&& f) {
  try {
    return f(detail::read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    fail(e.kind(), std::string(e.what()) + " in " + path.string());
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::format, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

template <class F>
auto parse_json(const fs::path& path, F&& f) {
  const json doc = read_json(path);
  try {
    return f(doc);
  } catch (const json::exception& e) {
    fail(ErrorKind::format, "invalid " + path.filename().string() + ": " + e.what());
  } catch (const Error& e) {
    fail(e.kind() == ErrorKind::io ? ErrorKind::format : e.kind(),
         "invalid " + path.filename().string() + ": " + e.what());
  }
}

template <std::size_t N>
std::array<double, N> numbers(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != N)
    fail(ErrorKind::format, std::string("'") + key + "' must hold " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = a[i].get<double>();
  return out;
}

const std::vector<std::string> kFieldNames = {"x", "y", "z", "vx", "vy", "amp", "snr", "t", "class", "conf", "track"};

}  // namespace

void write_text_atomic(const fs::path& path, const std::string& text) {
  detail::write_file_atomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

// ---- MOCG ----------------------------------------------------------------

std::vector<std::uint8_t> encode_grid(const VoxelGrid& g) {
  g.validate();
  ByteWriter w;
  w.bytes("MOCG");
  w.u32(kVersion);
  for (const Range* r : {&g.spec.x(), &g.spec.y(), &g.spec.z()}) {
    w.f64(r->min);
    w.f64(r->max);
  }
  w.f64(g.spec.voxel_size());
  for (std::uint32_t d : g.spec.dims()) w.u32(d);
  w.u32(g.class_count);
  w.data().insert(w.data().end(), g.labels.begin(), g.labels.end());
  return std::move(w.data());
}

VoxelGrid decode_grid(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "MOCG grid");
  expect_magic(r, "MOCG");
  std::array<Range, 3> ranges;
  for (Range& rg : ranges) {
    rg.min = r.f64();
    rg.max = r.f64();
  }
  const double vs = r.f64();
  std::array<std::uint32_t, 3> dims{r.u32(), r.u32(), r.u32()};
  const std::uint32_t classes = r.u32();
  GridSpec spec;
  try {
    spec = GridSpec::make(ranges[0], ranges[1], ranges[2], vs);
  } catch (const Error& e) {
    fail(ErrorKind::format, std::string("bad MOCG grid spec: ") + e.what());
  }
  if (spec.dims() != dims) fail(ErrorKind::format, "MOCG dims disagree with its ranges");
  if (classes == 0 || classes > 255) fail(ErrorKind::format, "bad MOCG class count");
  VoxelGrid g(spec, classes);
  if (r.remaining() != g.labels.size())
    fail(ErrorKind::format, r.remaining() < g.labels.size() ? "truncated MOCG grid" : "trailing bytes after MOCG grid");
  const std::string body = r.bytes(g.labels.size());
  std::copy(body.begin(), body.end(), g.labels.begin());
  try {
    g.validate();
  } catch (const Error& e) {
    fail(ErrorKind::format, e.what());
  }
  return g;
}

void save_grid(const VoxelGrid& g, const fs::path& path) { detail::write_file_atomic(path, encode_grid(g)); }

VoxelGrid load_grid(const fs::path& path) {
  return with_path(path, [](const std::vector<std::uint8_t>& b) { return decode_grid(b); });
}

// ---- MOPC ----------------------------------------------------------------

std::vector<std::uint8_t> encode_cloud(const PointCloud& pts) {
  pts.validate();
  std::vector<std::string> fields = {"x", "y", "z"};
  if (pts.has_radar()) fields.insert(fields.end(), {"vx", "vy", "amp", "snr", "t"});
  if (pts.has_labels()) fields.push_back("class");
  if (pts.has_conf()) fields.push_back("conf");
  if (pts.has_track()) fields.push_back("track");

  ByteWriter w;
  w.bytes("MOPC");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(pts.size()));
  w.u32(static_cast<std::uint32_t>(fields.size()));
  for (const auto& f : fields) w.fixed(f, 16, ' ');
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (const auto& f : fields) {
      double v = 0.0;
      if (f == "x") v = pts.xyz[i].x();
      else if (f == "y") v = pts.xyz[i].y();
      else if (f == "z") v = pts.xyz[i].z();
      else if (f == "vx") v = pts.vx[i];
      else if (f == "vy") v = pts.vy[i];
      else if (f == "amp") v = pts.amp[i];
      else if (f == "snr") v = pts.snr[i];
      else if (f == "t") v = pts.t[i];
      else if (f == "class") v = pts.label[i];
      else if (f == "conf") v = pts.conf[i];
      else v = pts.track[i];
      w.f32(static_cast<float>(v));
    }
  }
  return std::move(w.data());
}

namespace {

PointCloud cloud_from_columns(const std::vector<std::string>& fields, std::size_t n,
                              const std::vector<double>& data) {
  std::map<std::string, std::size_t> col;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    if (col.count(fields[f])) fail(ErrorKind::format, "duplicate point field '" + fields[f] + "'");
    col[fields[f]] = f;
  }
  for (const char* req : {"x", "y", "z"})
    if (!col.count(req)) fail(ErrorKind::format, std::string("point cloud lacks the '") + req + "' field");
  const std::size_t nf = fields.size();
  const auto get = [&](std::size_t i, const std::string& name) { return data[i * nf + col.at(name)]; };

  PointCloud pts;
  pts.xyz.resize(n);
  for (std::size_t i = 0; i < n; ++i) pts.xyz[i] = Vec3(get(i, "x"), get(i, "y"), get(i, "z"));
  const bool radar = std::any_of(kFieldNames.begin() + 3, kFieldNames.begin() + 8,
                                 [&](const std::string& f) { return col.count(f) != 0; });
  if (radar) {
    for (auto [name, dst] : {std::pair{"vx", &pts.vx}, {"vy", &pts.vy}, {"amp", &pts.amp}, {"snr", &pts.snr},
                             {"t", &pts.t}}) {
      dst->assign(n, 0.0);
      if (col.count(name))
        for (std::size_t i = 0; i < n; ++i) (*dst)[i] = get(i, name);
    }
  }
  if (col.count("class")) {
    pts.label.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = get(i, "class");
      if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v))
        fail(ErrorKind::format, "point " + std::to_string(i) + " has a non-integer class");
      pts.label[i] = static_cast<std::uint8_t>(v);
    }
  }
  if (col.count("conf")) {
    pts.conf.resize(n);
    for (std::size_t i = 0; i < n; ++i) pts.conf[i] = static_cast<float>(get(i, "conf"));
  }
  if (col.count("track")) {
    pts.track.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = get(i, "track");
      if (!(std::abs(v) < 2147483647.0) || v != std::floor(v))
        fail(ErrorKind::format, "point " + std::to_string(i) + " has a non-integer track id");
      pts.track[i] = static_cast<std::int32_t>(v);
    }
  }
  try {
    pts.validate();
  } catch (const Error& e) {
    fail(ErrorKind::format, e.what());
  }
  return pts;
}

}  // namespace

PointCloud decode_cloud(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "MOPC cloud");
  expect_magic(r, "MOPC");
  const std::uint32_t n = r.u32();
  const std::uint32_t nf = r.u32();
  if (nf == 0 || nf > 64) fail(ErrorKind::format, "bad MOPC field count");
  std::vector<std::string> fields(nf);
  for (auto& f : fields) f = r.fixed(16, ' ');
  if (r.remaining() != std::size_t{n} * nf * 4)
    fail(ErrorKind::format,
         r.remaining() < std::size_t{n} * nf * 4 ? "truncated MOPC cloud" : "trailing bytes after MOPC cloud");
  std::vector<double> data(std::size_t{n} * nf);
  for (double& v : data) v = r.f32();
  return cloud_from_columns(fields, n, data);
}

void save_cloud(const PointCloud& pts, const fs::path& path) { detail::write_file_atomic(path, encode_cloud(pts)); }

PointCloud load_cloud(const fs::path& path) {
  return with_path(path, [](const std::vector<std::uint8_t>& b) { return decode_cloud(b); });
}

PointCloud load_cloud_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  const auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
  };
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::format, "empty CSV " + path.string());
  const auto fields = split(line);
  std::vector<double> data;
  std::size_t n = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != fields.size())
      fail(ErrorKind::format, path.string() + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(fields.size()) + " columns");
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        data.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        fail(ErrorKind::format, path.string() + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      }
    }
    ++n;
  }
  try {
    return cloud_from_columns(fields, n, data);
  } catch (const Error& e) {
    fail(e.kind(), std::string(e.what()) + " in " + path.string());
  }
}

// ---- MOSM ----------------------------------------------------------------

std::vector<std::uint8_t> encode_mask(const SemanticMask& m) {
  m.validate();
  ByteWriter w;
  w.bytes("MOSM");
  w.u32(kVersion);
  w.fixed(m.camera, 16, '\0');
  w.u32(m.width);
  w.u32(m.height);
  for (std::size_t i = 0; i < m.cls.size(); ++i) {
    w.u8(m.cls[i]);
    w.f32(m.conf[i]);
  }
  return std::move(w.data());
}

SemanticMask decode_mask(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "MOSM mask");
  expect_magic(r, "MOSM");
  SemanticMask m;
  m.camera = r.fixed(16, '\0');
  m.width = r.u32();
  m.height = r.u32();
  const std::size_t n = std::size_t{m.width} * m.height;
  if (r.remaining() != n * 5)
    fail(ErrorKind::format, r.remaining() < n * 5 ? "truncated MOSM mask" : "trailing bytes after MOSM mask");
  m.cls.resize(n);
  m.conf.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.cls[i] = r.u8();
    m.conf[i] = r.f32();
  }
  try {
    m.validate();
  } catch (const Error& e) {
    fail(ErrorKind::format, e.what());
  }
  return m;
}

void save_mask(const SemanticMask& m, const fs::path& path) { detail::write_file_atomic(path, encode_mask(m)); }

SemanticMask load_mask(const fs::path& path) {
  return with_path(path, [](const std::vector<std::uint8_t>& b) { return decode_mask(b); });
}

// ---- MOPD ----------------------------------------------------------------

void save_probabilities(const ClassProbabilities& probs, const GridSpec& spec, const fs::path& path) {
  if (probs.voxels != spec.voxel_count() || probs.values.size() != probs.voxels * probs.classes)
    fail(ErrorKind::shape, "probability dump does not match the grid");
  ByteWriter w;
  w.bytes("MOPD");
  w.u32(kVersion);
  for (std::uint32_t d : spec.dims()) w.u32(d);
  w.u32(static_cast<std::uint32_t>(probs.classes));
  for (double v : probs.values) w.f32(static_cast<float>(v));
  detail::write_file_atomic(path, w.data());
}

ClassProbabilities load_probabilities(const fs::path& path, std::array<std::uint32_t, 3>* dims) {
  return with_path(path, [&](const std::vector<std::uint8_t>& b) {
    ByteReader r(b, "MOPD dump");
    expect_magic(r, "MOPD");
    std::array<std::uint32_t, 3> d{r.u32(), r.u32(), r.u32()};
    const std::uint32_t k = r.u32();
    ClassProbabilities p(std::size_t{d[0]} * d[1] * d[2], k);
    if (r.remaining() != p.values.size() * 4) fail(ErrorKind::format, "MOPD size does not match its header");
    for (double& v : p.values) v = r.f32();
    if (dims != nullptr) *dims = d;
    return p;
  });
}

// ---- JSON ----------------------------------------------------------------

std::vector<FramePose> load_poses(const fs::path& path) {
  return parse_json(path, [](const json& doc) {
    if (!doc.is_array()) fail(ErrorKind::format, "expected an array of poses");
    std::vector<FramePose> out;
    std::set<std::string> seen;
    for (const json& j : doc) {
      FramePose p;
      p.frame_id = j.at("frame_id").get<std::string>();
      if (p.frame_id.empty() || !seen.insert(p.frame_id).second)
        fail(ErrorKind::format, "empty or duplicate frame_id '" + p.frame_id + "'");
      const auto m = numbers<16>(j, "matrix");
      p.ego_to_global = RigidPose::from_row_major(m);
      out.push_back(std::move(p));
    }
    if (out.empty()) fail(ErrorKind::format, "no frames");
    return out;
  });
}

void save_poses(const std::vector<FramePose>& poses, const fs::path& path) {
  json doc = json::array();
  for (const FramePose& p : poses) doc.push_back({{"frame_id", p.frame_id}, {"matrix", p.ego_to_global.row_major()}});
  write_text_atomic(path, doc.dump(1) + "\n");
}

std::vector<CameraModel> load_cameras(const fs::path& path) {
  return parse_json(path, [](const json& doc) {
    if (!doc.is_array()) fail(ErrorKind::format, "expected an array of cameras");
    std::vector<CameraModel> out;
    std::set<std::string> seen;
    for (const json& j : doc) {
      CameraModel c;
      c.name = j.at("name").get<std::string>();
      if (c.name.empty() || c.name.size() > 16 || c.name == "radar" || !seen.insert(c.name).second)
        fail(ErrorKind::format, "bad or duplicate camera name '" + c.name + "'");
      c.width = j.at("width").get<std::uint32_t>();
      c.height = j.at("height").get<std::uint32_t>();
      const auto k = numbers<9>(j, "intrinsics");
      if (k[1] != 0.0 || k[3] != 0.0 || k[6] != 0.0 || k[7] != 0.0 || k[8] != 1.0)
        fail(ErrorKind::format, "camera '" + c.name + "' intrinsics must be [fx 0 cx; 0 fy cy; 0 0 1]");
      c.fx = k[0];
      c.cx = k[2];
      c.fy = k[4];
      c.cy = k[5];
      c.extrinsics = RigidPose::from_row_major(numbers<16>(j, "extrinsics"));
      c.validate();
      out.push_back(std::move(c));
    }
    return out;
  });
}

void save_cameras(const std::vector<CameraModel>& cams, const fs::path& path) {
  json doc = json::array();
  for (const CameraModel& c : cams) {
    doc.push_back({{"name", c.name},
                   {"width", c.width},
                   {"height", c.height},
                   {"intrinsics", {c.fx, 0.0, c.cx, 0.0, c.fy, c.cy, 0.0, 0.0, 1.0}},
                   {"extrinsics", c.extrinsics.row_major()}});
  }
  write_text_atomic(path, doc.dump(1) + "\n");
}

std::vector<Box3D> load_boxes(const fs::path& path) {
  return parse_json(path, [](const json& doc) {
    if (!doc.is_array()) fail(ErrorKind::format, "expected an array of boxes");
    std::vector<Box3D> out;
    for (const json& j : doc) {
      Box3D b;
      b.id = j.at("id").get<std::int32_t>();
      b.track_id = j.value("track_id", -1);
      const int cls = j.at("class").get<int>();
      if (cls < 0 || cls > 254) fail(ErrorKind::format, "box " + std::to_string(b.id) + " has a bad class");
      b.cls = static_cast<std::uint8_t>(cls);
      const auto c = numbers<3>(j, "center");
      const auto s = numbers<3>(j, "size");
      b.center = Vec3(c[0], c[1], c[2]);
      b.size = Vec3(s[0], s[1], s[2]);
      b.yaw = j.at("yaw").get<double>();
      b.frame_id = j.at("frame_id").get<std::string>();
      b.validate();
      out.push_back(std::move(b));
    }
    return out;
  });
}

void save_boxes(const std::vector<Box3D>& boxes, const fs::path& path) {
  json doc = json::array();
  for (const Box3D& b : boxes) {
    doc.push_back({{"id", b.id},
                   {"track_id", b.track_id},
                   {"class", b.cls},
                   {"center", {b.center.x(), b.center.y(), b.center.z()}},
                   {"size", {b.size.x(), b.size.y(), b.size.z()}},
                   {"yaw", b.yaw},
                   {"frame_id", b.frame_id}});
  }
  write_text_atomic(path, doc.dump(1) + "\n");
}

// ---- scenes --------------------------------------------------------------

Scene load_scene(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::io, "scene directory not found: " + dir.string());
  const auto need = [&](const std::string& name) {
    const fs::path p = dir / name;
    if (!fs::is_regular_file(p)) fail(ErrorKind::io, "missing scene file " + p.string());
    return p;
  };
  const auto poses = load_poses(need("poses.json"));
  Scene scene;
  scene.cameras = load_cameras(need("cameras.json"));
  const auto boxes = load_boxes(need("boxes.json"));

  std::map<std::string, std::size_t> frame_of;
  for (const FramePose& p : poses) {
    frame_of[p.frame_id] = scene.frames.size();
    SceneFrame f;
    f.id = p.frame_id;
    f.ego_to_global = p.ego_to_global;
    scene.frames.push_back(std::move(f));
  }
  for (const Box3D& b : boxes) {
    const auto it = frame_of.find(b.frame_id);
    if (it == frame_of.end())
      fail(ErrorKind::format, "box " + std::to_string(b.id) + " names unknown frame '" + b.frame_id + "'");
    scene.frames[it->second].boxes.push_back(b);
  }
  for (SceneFrame& f : scene.frames) {
    f.lidar = load_cloud(need(f.id + ".mopc"));
    for (const CameraModel& c : scene.cameras) {
      SemanticMask m = load_mask(need(f.id + "_" + c.name + ".mosm"));
      if (m.camera != c.name)
        fail(ErrorKind::format, "mask " + (dir / (f.id + "_" + c.name + ".mosm")).string() + " names camera '" +
                                    m.camera + "'");
      f.masks.push_back(std::move(m));
    }
    const fs::path radar = dir / (f.id + "_radar.mopc");
    if (fs::is_regular_file(radar)) f.radar = load_cloud(radar);
  }
  return scene;
}

void save_scene(const Scene& scene, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<FramePose> poses;
  std::vector<Box3D> boxes;
  for (const SceneFrame& f : scene.frames) {
    poses.push_back({f.id, f.ego_to_global});
    for (Box3D b : f.boxes) {
      b.frame_id = f.id;
      boxes.push_back(std::move(b));
    }
  }
  save_poses(poses, dir / "poses.json");
  save_cameras(scene.cameras, dir / "cameras.json");
  save_boxes(boxes, dir / "boxes.json");
  for (const SceneFrame& f : scene.frames) {
    save_cloud(f.lidar, dir / (f.id + ".mopc"));
    for (const SemanticMask& m : f.masks) save_mask(m, dir / (f.id + "_" + m.camera + ".mosm"));
    if (!f.radar.empty()) save_cloud(f.radar, dir / (f.id + "_radar.mopc"));
  }
}

// ---- PGM -----------------------------------------------------------------

void save_bev_pgm(const VoxelGrid& g, const fs::path& path) {
  g.validate();
  const GridSpec& s = g.spec;
  const std::string header = "P5\n" + std::to_string(s.nx()) + " " + std::to_string(s.ny()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  const std::uint32_t denom = std::max<std::uint32_t>(g.class_count - 1, 1);
  for (std::uint32_t row = 0; row < s.ny(); ++row) {
    const std::uint32_t iy = s.ny() - 1 - row;
    for (std::uint32_t ix = 0; ix < s.nx(); ++ix) {
      std::uint32_t label = 0;
      for (std::uint32_t iz = s.nz(); iz-- > 0;) {
        const std::uint8_t l = g.at(ix, iy, iz);
        if (l != kFreeClass && l != kUnknownClass) {
          label = l;
          break;
        }
      }
      bytes.push_back(static_cast<std::uint8_t>(label * 255 / denom));
    }
  }
  detail::write_file_atomic(path, bytes);
}

}  // namespace occukit
