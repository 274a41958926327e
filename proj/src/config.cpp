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

#include "occukit/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "occukit/error.hpp"

namespace occukit {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) fail(ErrorKind::invalid_argument, where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) fail(ErrorKind::invalid_argument, "unknown config key '" + where + "." + key + "'");
}

Range range_of(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 2) fail(ErrorKind::invalid_argument, std::string("grid.") + key + " needs [min, max]");
  return {a[0].get<double>(), a[1].get<double>()};
}

GridSpec grid_of(const json& j, const std::string& where) {
  reject_unknown(j, {"x", "y", "z", "voxel_size"}, where);
  return GridSpec::make(range_of(j, "x"), range_of(j, "y"), range_of(j, "z"), j.at("voxel_size").get<double>());
}

json grid_json(const GridSpec& g) {
  return {{"x", {g.x().min, g.x().max}},
          {"y", {g.y().min, g.y().max}},
          {"z", {g.z().min, g.z().max}},
          {"voxel_size", g.voxel_size()}};
}

template <class T>
void read(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

}  // namespace

const std::vector<std::string>& omnihd_class_names() {
  static const std::vector<std::string> names = {
      "free",          "car",           "pedestrian",   "rider",    "large vehicle", "cycle",
      "road obstacle", "traffic fence", "drive. surf.", "sidewalk", "vegetation",    "manmade"};
  return names;
}

GridSpec RunConfig::demo_grid() const {
  if (fusion_grid) return *fusion_grid;
  const double vs = 2.0;
  const double hx = vs * static_cast<double>(fusion.width) / 2.0;
  const double hy = vs * static_cast<double>(fusion.height) / 2.0;
  return GridSpec::make({-hx, hx}, {-hy, hy}, {-3.0, -3.0 + vs * static_cast<double>(fusion.depth)}, vs);
}

void RunConfig::validate() const {
  if (class_names.size() < 2 || class_names.size() > 254)
    fail(ErrorKind::invalid_argument, "class table needs between 2 and 254 entries");
  if (class_names[0] != "free") fail(ErrorKind::invalid_argument, "class 0 must be named \"free\"");
  std::set<std::string> seen;
  for (const auto& n : class_names)
    if (n.empty() || !seen.insert(n).second) fail(ErrorKind::invalid_argument, "empty or duplicate class name '" + n + "'");
  pseudolabel.validate();
  fusion.validate();
  if (fusion.classes != class_names.size())
    fail(ErrorKind::invalid_argument, "fusion.classes must equal the class table size");
  const GridSpec g = demo_grid();
  if (g.nx() != fusion.width || g.ny() != fusion.height || g.nz() != fusion.depth)
    fail(ErrorKind::invalid_argument, "fusion_grid dims must equal fusion width x height x depth");
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::format, std::string("malformed config JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    reject_unknown(doc, {"preset", "grid", "classes", "pseudolabel", "fusion", "fusion_grid", "seed", "current_frame", "io"},
                   "config");
    if (doc.contains("preset") && doc.contains("grid"))
      fail(ErrorKind::invalid_argument, "config sets both 'preset' and 'grid'");
    if (doc.contains("preset")) cfg.grid = GridSpec::preset(doc.at("preset").get<std::string>());
    if (doc.contains("grid")) cfg.grid = grid_of(doc.at("grid"), "grid");
    if (doc.contains("classes")) cfg.class_names = doc.at("classes").get<std::vector<std::string>>();
    cfg.fusion.classes = cfg.class_names.size();
    if (doc.contains("pseudolabel")) {
      const json& p = doc.at("pseudolabel");
      reject_unknown(p,
                     {"normal_neighbors", "normal_radius", "ground_max_angle_deg", "planarity_max",
                      "ground_max_residual", "noise_height", "min_neighbors", "stage2_radius", "box_margin",
                      "ego_ahead", "ego_behind", "ego_side"},
                     "pseudolabel");
      auto& q = cfg.pseudolabel;
      read(p, "normal_neighbors", q.normal_neighbors);
      read(p, "normal_radius", q.normal_radius);
      read(p, "ground_max_angle_deg", q.ground_max_angle_deg);
      read(p, "planarity_max", q.planarity_max);
      read(p, "ground_max_residual", q.ground_max_residual);
      read(p, "noise_height", q.noise_height);
      read(p, "min_neighbors", q.min_neighbors);
      read(p, "stage2_radius", q.stage2_radius);
      read(p, "box_margin", q.box_margin);
      read(p, "ego_ahead", q.ego_ahead);
      read(p, "ego_behind", q.ego_behind);
      read(p, "ego_side", q.ego_side);
    }
    if (doc.contains("fusion")) {
      const json& f = doc.at("fusion");
      reject_unknown(f, {"channels", "height", "width", "depth", "heads", "points", "frames", "classes", "image_channels"},
                     "fusion");
      auto& q = cfg.fusion;
      read(f, "channels", q.channels);
      read(f, "height", q.height);
      read(f, "width", q.width);
      read(f, "depth", q.depth);
      read(f, "heads", q.heads);
      read(f, "points", q.points);
      read(f, "frames", q.frames);
      read(f, "classes", q.classes);
      read(f, "image_channels", q.image_channels);
    }
    if (doc.contains("fusion_grid")) cfg.fusion_grid = grid_of(doc.at("fusion_grid"), "fusion_grid");
    read(doc, "seed", cfg.seed);
    if (doc.contains("current_frame")) cfg.current_frame = doc.at("current_frame").get<std::string>();
    if (doc.contains("io")) {
      const json& io = doc.at("io");
      reject_unknown(io, {"scene", "out", "weights", "report"}, "io");
      for (auto [key, dst] : {std::pair{"scene", &cfg.io.scene}, {"out", &cfg.io.out}, {"weights", &cfg.io.weights},
                              {"report", &cfg.io.report}})
        if (io.contains(key)) *dst = io.at(key).get<std::string>();
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_argument, std::string("bad config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    fail(e.kind(), std::string(e.what()) + " in " + path.string());
  }
}

std::string dump_config(const RunConfig& cfg) {
  const auto& p = cfg.pseudolabel;
  const auto& f = cfg.fusion;
  json doc = {{"grid", grid_json(cfg.grid)},
              {"classes", cfg.class_names},
              {"pseudolabel",
               {{"normal_neighbors", p.normal_neighbors},
                {"normal_radius", p.normal_radius},
                {"ground_max_angle_deg", p.ground_max_angle_deg},
                {"planarity_max", p.planarity_max},
                {"ground_max_residual", p.ground_max_residual},
                {"noise_height", p.noise_height},
                {"min_neighbors", p.min_neighbors},
                {"stage2_radius", p.stage2_radius},
                {"box_margin", p.box_margin},
                {"ego_ahead", p.ego_ahead},
                {"ego_behind", p.ego_behind},
                {"ego_side", p.ego_side}}},
              {"fusion",
               {{"channels", f.channels},
                {"height", f.height},
                {"width", f.width},
                {"depth", f.depth},
                {"heads", f.heads},
                {"points", f.points},
                {"frames", f.frames},
                {"classes", f.classes},
                {"image_channels", f.image_channels}}},
              {"seed", cfg.seed}};
  if (cfg.fusion_grid) doc["fusion_grid"] = grid_json(*cfg.fusion_grid);
  if (cfg.current_frame) doc["current_frame"] = *cfg.current_frame;
  return doc.dump(2) + "\n";
}

}  // namespace occukit
