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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "occukit/config.hpp"
#include "occukit/fixtures.hpp"
#include "occukit/io.hpp"
#include "occukit/weights.hpp"

namespace fs = std::filesystem;
using namespace occukit;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("occukit_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() / ("occukit_cli_log_" + std::to_string(::getpid()));
  const std::string cmd = env + " " + OCCUKIT_CLI_PATH + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  r.out.assign(std::istreambuf_iterator<char>(in), {});
  fs::remove(log);
  return r;
}

std::string bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const std::string kData = OCCUKIT_TEST_DATA;

}  // namespace

TEST_CASE("gen-labels reproduces the golden grid") {
  TempDir tmp;
  REQUIRE(run("make-fixture --kind plane+car --seed 0 --out " + (tmp.path / "scene").string()).code == 0);
  const Run r = run("gen-labels --scene " + (tmp.path / "scene").string() + " --config " + kData +
                    "/scene_config.json --out " + (tmp.path / "g.mocg").string() + " --dump-bev-pgm " +
                    (tmp.path / "bev.pgm").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("extracted") != std::string::npos);
  CHECK(r.out.find("filtered") != std::string::npos);
  CHECK(r.out.find("labeled") != std::string::npos);
  CHECK(r.out.find("voxelized") != std::string::npos);
  CHECK(bytes_of(tmp.path / "g.mocg") == bytes_of(kData + "/plane_car_seed0.mocg"));
  CHECK(fs::exists(tmp.path / "bev.pgm"));
}

TEST_CASE("golden grid agrees with the analytic scene") {
  const VoxelGrid golden = load_grid(kData + "/plane_car_seed0.mocg");
  const VoxelGrid want = expected_plane_car(golden.spec, golden.class_count);
  std::size_t both = 0, same = 0;
  for (std::size_t i = 0; i < golden.labels.size(); ++i) {
    if (golden.labels[i] == kFreeClass && want.labels[i] == kFreeClass) continue;
    ++both;
    same += golden.labels[i] == want.labels[i];
  }
  CHECK(static_cast<double>(same) >= 0.99 * static_cast<double>(both));
}

TEST_CASE("gen-labels error exits") {
  TempDir tmp;
  fs::create_directories(tmp.path / "empty");
  const Run empty = run("gen-labels --scene " + (tmp.path / "empty").string() + " --out " +
                        (tmp.path / "g.mocg").string());
  CHECK(empty.code == 2);
  CHECK(empty.out.find("poses.json") != std::string::npos);

  REQUIRE(run("make-fixture --kind rain-noise --seed 2 --out " + (tmp.path / "scene").string()).code == 0);
  {
    std::fstream f(tmp.path / "scene" / "000.mopc", std::ios::in | std::ios::out | std::ios::binary);
    f.write("MOPX", 4);
  }
  const Run corrupt = run("gen-labels --scene " + (tmp.path / "scene").string() + " --out " +
                          (tmp.path / "g.mocg").string());
  CHECK(corrupt.code == 2);
  CHECK(corrupt.out.find("bad MOPC header") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp.path / "g.mocg"));
}

TEST_CASE("usage errors and help") {
  CHECK(run("gen-labels --scene x --out y --frobnicate").code == 2);
  CHECK(run("").code == 2);
  const Run help = run("fuse-demo --help");
  CHECK(help.code == 0);
  for (const char* flag : {"--scene", "--config", "--weights", "--save-weights", "--frames", "--out", "--probs",
                           "--dump-bev-pgm"})
    CHECK(help.out.find(flag) != std::string::npos);
  CHECK(run("make-fixture --kind hail --out /tmp/x").code == 2);
}

TEST_CASE("gradcheck exit codes") {
  for (int seed : {0, 1, 2}) {
    const Run r = run("gradcheck --seed " + std::to_string(seed));
    CHECK(r.code == 0);
    CHECK(r.out.find("lovasz_softmax") != std::string::npos);
    CHECK(r.out.find("PASS") != std::string::npos);
  }
  CHECK(run("gradcheck --trials 0").code == 2);
}

TEST_CASE("eval reports and thresholds") {
  TempDir tmp;
  const std::string golden = kData + "/plane_car_seed0.mocg";
  const Run r = run("eval --pred " + golden + " --gt " + golden + " --report " + (tmp.path / "r.json").string() +
                    " --min-miou 0.99");
  CHECK(r.code == 0);
  CHECK(r.out.find("sc_iou 1.000000") != std::string::npos);
  const std::string report = bytes_of(tmp.path / "r.json");
  CHECK(report.find("\"per_class\"") != std::string::npos);
  CHECK(report.find("\"pedestrian\": null") != std::string::npos);

  VoxelGrid empty = load_grid(golden);
  std::fill(empty.labels.begin(), empty.labels.end(), kFreeClass);
  empty.labels[0] = 1;
  save_grid(empty, tmp.path / "sparse.mocg");
  CHECK(run("eval --pred " + (tmp.path / "sparse.mocg").string() + " --gt " + golden + " --report " +
            (tmp.path / "r2.json").string() + " --min-sc-iou 0.5")
            .code == 1);
  CHECK(run("eval --pred " + (tmp.path / "missing.mocg").string() + " --gt " + golden + " --report " +
            (tmp.path / "r3.json").string())
            .code == 2);
}

TEST_CASE("voxelize command") {
  TempDir tmp;
  std::ofstream(tmp.path / "c.csv") << "x,y,z,class\n0.1,0.1,0.1,3\n0.2,0.2,0.2,3\n0.3,0.3,0.3,5\n";
  REQUIRE(run("voxelize --cloud " + (tmp.path / "c.csv").string() + " --config " + kData +
              "/scene_config.json --out " + (tmp.path / "v.mocg").string())
              .code == 0);
  const VoxelGrid g = load_grid(tmp.path / "v.mocg");
  CHECK(g.occupied_count() == 1);
  const auto idx = g.spec.world_to_voxel({0.2, 0.2, 0.2});
  REQUIRE(idx.has_value());
  CHECK(g.at((*idx)[0], (*idx)[1], (*idx)[2]) == 3);
}

TEST_CASE("fuse-demo determinism, temporal window and zero weights") {
  TempDir tmp;
  const std::string scene = (tmp.path / "scene").string();
  REQUIRE(run("make-fixture --kind two-frame-motion --seed 0 --out " + scene).code == 0);
  const std::string w = (tmp.path / "w.mobw").string();
  REQUIRE(run("fuse-demo --scene " + scene + " --save-weights " + w + " --out " + (tmp.path / "a.mocg").string() +
              " --probs " + (tmp.path / "a.mopd").string())
              .code == 0);
  REQUIRE(run("fuse-demo --scene " + scene + " --weights " + w + " --out " + (tmp.path / "b.mocg").string() +
              " --probs " + (tmp.path / "b.mopd").string(),
              "OCCUKIT_THREADS=1")
              .code == 0);
  CHECK(bytes_of(tmp.path / "a.mocg") == bytes_of(tmp.path / "b.mocg"));
  CHECK(bytes_of(tmp.path / "a.mopd") == bytes_of(tmp.path / "b.mopd"));

  REQUIRE(run("fuse-demo --scene " + scene + " --weights " + w + " --frames 1 --out " +
              (tmp.path / "t1.mocg").string() + " --probs " + (tmp.path / "t1.mopd").string())
              .code != 0);
  // The weights fix T; initialize one set per window length.
  const std::string w1 = (tmp.path / "w1.mobw").string(), w3 = (tmp.path / "w3.mobw").string();
  REQUIRE(run("fuse-demo --scene " + scene + " --frames 1 --save-weights " + w1 + " --out " +
              (tmp.path / "t1.mocg").string())
              .code == 0);
  REQUIRE(run("fuse-demo --scene " + scene + " --frames 3 --save-weights " + w3 + " --out " +
              (tmp.path / "t3.mocg").string())
              .code == 0);
  CHECK(bytes_of(tmp.path / "t1.mocg") != bytes_of(tmp.path / "t3.mocg"));

  CHECK(run("fuse-demo --scene " + scene + " --weights " + w + " --save-weights " + w1 + " --out x").code == 2);

  const fs::path zero = tmp.path / "zero.mobw";
  save_weights(zero_weights(parse_config("{}").fusion), zero);
  REQUIRE(run("fuse-demo --scene " + scene + " --weights " + zero.string() + " --out " +
              (tmp.path / "z.mocg").string())
              .code == 0);
  CHECK(load_grid(tmp.path / "z.mocg").occupied_count() == 0);
}

TEST_CASE("make-fixture writes loadable scenes") {
  TempDir tmp;
  for (const std::string kind : {"plane+car", "rain-noise", "two-frame-motion"}) {
    const fs::path dir = tmp.path / kind;
    REQUIRE(run("make-fixture --kind " + kind + " --seed 4 --out " + dir.string()).code == 0);
    const Scene s = load_scene(dir);
    CHECK(s.frames.size() == (kind == "two-frame-motion" ? 2u : 1u));
    CHECK(s.cameras.size() == 6);
  }
}
