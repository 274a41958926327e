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

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "occukit/occukit.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("occukit_capi_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("version and argument checks") {
  CHECK(std::strlen(occukit_version()) > 0);
  occukit_grid* g = nullptr;
  CHECK(occukit_grid_load(nullptr, &g) == OCCUKIT_INVALID_ARGUMENT);
  CHECK(std::strlen(occukit_last_error()) > 0);
  CHECK(occukit_grid_load("/nonexistent/grid.mocg", &g) == OCCUKIT_IO);
  CHECK(g == nullptr);
  uint32_t dims[3];
  CHECK(occukit_grid_dims(nullptr, dims) == OCCUKIT_INVALID_ARGUMENT);
  occukit_grid_free(nullptr);
  occukit_config_free(nullptr);
  occukit_report_free(nullptr);
  CHECK(occukit_make_fixture("snow", 0, "/tmp/unused") == OCCUKIT_INVALID_ARGUMENT);
}

TEST_CASE("fixture, labels, evaluation and report through the C interface") {
  TempDir tmp;
  const std::string scene = (tmp.path / "scene").string();
  REQUIRE(occukit_make_fixture("plane+car", 0, scene.c_str()) == OCCUKIT_OK);

  const fs::path cfg_path = tmp.path / "cfg.json";
  std::ofstream(cfg_path) << R"({"grid": {"x": [-20, 20], "y": [-10, 10], "z": [-3, 5], "voxel_size": 0.5}})";
  occukit_config* cfg = nullptr;
  REQUIRE(occukit_config_load(cfg_path.c_str(), &cfg) == OCCUKIT_OK);
  uint64_t seed = 99;
  CHECK(occukit_config_seed(cfg, &seed) == OCCUKIT_OK);
  CHECK(seed == 0);

  int lines = 0;
  occukit_grid* g = nullptr;
  REQUIRE(occukit_gen_labels(
              cfg, scene.c_str(), &g, [](const char*, void* user) { ++*static_cast<int*>(user); }, &lines) ==
          OCCUKIT_OK);
  CHECK(lines > 0);
  uint32_t dims[3];
  REQUIRE(occukit_grid_dims(g, dims) == OCCUKIT_OK);
  CHECK(dims[0] == 80);
  CHECK(dims[1] == 40);
  CHECK(dims[2] == 16);
  uint32_t classes = 0;
  CHECK(occukit_grid_class_count(g, &classes) == OCCUKIT_OK);
  CHECK(classes == 12);
  const uint8_t* labels = nullptr;
  size_t count = 0;
  REQUIRE(occukit_grid_labels(g, &labels, &count) == OCCUKIT_OK);
  CHECK(count == 80u * 40u * 16u);
  size_t car = 0;
  for (size_t i = 0; i < count; ++i) car += labels[i] == 1;
  CHECK(car > 0);

  const std::string grid_path = (tmp.path / "g.mocg").string();
  REQUIRE(occukit_grid_save(g, grid_path.c_str()) == OCCUKIT_OK);
  occukit_grid* back = nullptr;
  REQUIRE(occukit_grid_load(grid_path.c_str(), &back) == OCCUKIT_OK);

  occukit_report* r = nullptr;
  REQUIRE(occukit_evaluate(back, g, nullptr, 0, &r) == OCCUKIT_OK);
  CHECK(occukit_report_sc_iou(r) == 1.0);
  CHECK(occukit_report_miou(r) == 1.0);
  double iou = -1;
  int present = -1;
  CHECK(occukit_report_class_iou(r, 1, &iou, &present) == OCCUKIT_OK);
  CHECK(present == 1);
  CHECK(iou == 1.0);
  CHECK(occukit_report_class_iou(r, 4, &iou, &present) == OCCUKIT_OK);
  CHECK(present == 0);
  CHECK(occukit_report_class_iou(r, 200, &iou, &present) == OCCUKIT_INVALID_ARGUMENT);
  const std::string report = (tmp.path / "r.json").string();
  CHECK(occukit_report_write_json(r, cfg, report.c_str()) == OCCUKIT_OK);
  std::ifstream in(report);
  const std::string text{std::istreambuf_iterator<char>(in), {}};
  CHECK(text.find("\"car\"") != std::string::npos);
  CHECK(text.find("\"sc_iou\"") != std::string::npos);

  CHECK(occukit_grid_dump_bev_pgm(g, (tmp.path / "bev.pgm").c_str()) == OCCUKIT_OK);
  occukit_report_free(r);
  occukit_grid_free(back);
  occukit_grid_free(g);
  occukit_config_free(cfg);
}

TEST_CASE("corrupt scene files surface format errors") {
  TempDir tmp;
  const fs::path scene = tmp.path / "scene";
  REQUIRE(occukit_make_fixture("rain-noise", 1, scene.c_str()) == OCCUKIT_OK);
  {
    std::fstream f(scene / "000.mopc", std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  occukit_config* cfg = nullptr;
  REQUIRE(occukit_config_load(nullptr, &cfg) == OCCUKIT_OK);
  occukit_grid* g = nullptr;
  CHECK(occukit_gen_labels(cfg, scene.c_str(), &g, nullptr, nullptr) == OCCUKIT_FORMAT);
  CHECK(std::string(occukit_last_error()).find("bad MOPC header") != std::string::npos);
  CHECK(g == nullptr);
  occukit_config_free(cfg);
}

TEST_CASE("fusion demo and weights") {
  TempDir tmp;
  const fs::path scene = tmp.path / "scene";
  REQUIRE(occukit_make_fixture("two-frame-motion", 0, scene.c_str()) == OCCUKIT_OK);
  occukit_config* cfg = nullptr;
  REQUIRE(occukit_config_load(nullptr, &cfg) == OCCUKIT_OK);
  const fs::path weights = tmp.path / "w.mobw";
  REQUIRE(occukit_weights_init(cfg, 5, 0, weights.c_str()) == OCCUKIT_OK);
  occukit_grid* a = nullptr;
  occukit_grid* b = nullptr;
  REQUIRE(occukit_fuse_demo(cfg, weights.c_str(), scene.c_str(), 0, &a, (tmp.path / "p.mopd").c_str()) == OCCUKIT_OK);
  REQUIRE(occukit_fuse_demo(cfg, weights.c_str(), scene.c_str(), 0, &b, nullptr) == OCCUKIT_OK);
  const uint8_t *la = nullptr, *lb = nullptr;
  size_t na = 0, nb = 0;
  occukit_grid_labels(a, &la, &na);
  occukit_grid_labels(b, &lb, &nb);
  REQUIRE(na == nb);
  CHECK(std::memcmp(la, lb, na) == 0);
  CHECK(fs::file_size(tmp.path / "p.mopd") > 0);
  occukit_grid_free(a);
  occukit_grid_free(b);

  occukit_grid* bad = nullptr;
  CHECK(occukit_fuse_demo(cfg, weights.c_str(), scene.c_str(), 5, &bad, nullptr) != OCCUKIT_OK);
  CHECK(std::string(occukit_last_error()).find("temporal") != std::string::npos);
  occukit_config_free(cfg);
}

TEST_CASE("gradcheck through the C interface") {
  occukit_gradcheck_result r{};
  CHECK(occukit_gradcheck(4, 20, &r) == OCCUKIT_OK);
  CHECK(r.points > 0);
  CHECK(r.lovasz < occukit_gradcheck_tolerance());
  CHECK(occukit_gradcheck(4, 0, &r) == OCCUKIT_INVALID_ARGUMENT);
}
