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

// occukit command-line interface. Exit codes: 0 ok, 1 check or metric
// failure, 2 usage or I/O error.

#include <CLI11.hpp>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "occukit/occukit.h"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

int report(occukit_status s, const std::string& what) {
  if (s == OCCUKIT_OK) return kOk;
  std::fprintf(stderr, "occukit %s: %s\n", what.c_str(), occukit_last_error());
  return s == OCCUKIT_CHECK_FAILED ? kCheckFailed : kUsage;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

struct Config {
  occukit_config* handle = nullptr;
  ~Config() { occukit_config_free(handle); }
};

struct Grid {
  occukit_grid* handle = nullptr;
  ~Grid() { occukit_grid_free(handle); }
};

int load_config(const std::string& path, Config& cfg) {
  return report(occukit_config_load(opt(path), &cfg.handle), "config");
}

int save_outputs(const Grid& g, const std::string& out, const std::string& pgm, const std::string& what) {
  if (int rc = report(occukit_grid_save(g.handle, out.c_str()), what)) return rc;
  if (!pgm.empty()) return report(occukit_grid_dump_bev_pgm(g.handle, pgm.c_str()), what);
  return kOk;
}

void print_line(const char* line, void*) { std::fprintf(stderr, "gen-labels: %s\n", line); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"occukit: pseudo occupancy labels, radar/camera fusion blocks and occupancy metrics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", occukit_version());

  std::string config, scene, out, pgm;
  bool quiet = false;
  auto* gen = app.add_subcommand("gen-labels", "Generate a pseudo occupancy grid for a scene directory");
  gen->add_option("--scene", scene, "Scene directory")->required();
  gen->add_option("--config", config, "Run configuration (JSON)");
  gen->add_option("--out", out, "Output MOCG grid")->required();
  gen->add_option("--dump-bev-pgm", pgm, "Also write a top-down PGM image");
  gen->add_flag("--quiet", quiet, "Do not log per-stage counts");

  std::string pred, gt, report_path;
  std::vector<int> ignore;
  std::optional<double> min_sc, min_miou;
  auto* eval = app.add_subcommand("eval", "Compare a predicted grid with ground truth");
  eval->add_option("--pred", pred, "Predicted MOCG grid")->required();
  eval->add_option("--gt", gt, "Ground-truth MOCG grid")->required();
  eval->add_option("--ignore", ignore, "Ground-truth labels to skip (repeatable)")->check(CLI::Range(0, 255));
  eval->add_option("--report", report_path, "Output JSON report")->required();
  eval->add_option("--config", config, "Run configuration supplying the class names");
  eval->add_option("--min-sc-iou", min_sc, "Exit 1 when SC IoU is below this value");
  eval->add_option("--min-miou", min_miou, "Exit 1 when mIoU is below this value");

  std::string weights, probs, save_weights;
  std::uint32_t frames = 0;
  auto* fuse = app.add_subcommand("fuse-demo", "Run the fusion forward pass on a scene");
  fuse->add_option("--scene", scene, "Scene directory")->required();
  fuse->add_option("--config", config, "Run configuration (JSON)");
  auto* weights_opt =
      fuse->add_option("--weights", weights, "MOBW weights (default: initialized from the config seed)");
  fuse->add_option("--save-weights", save_weights, "Write freshly initialized weights here and use them")
      ->excludes(weights_opt);
  fuse->add_option("--frames", frames, "Temporal window T (default: from the config)")->check(CLI::Range(1, 64));
  fuse->add_option("--out", out, "Output MOCG grid")->required();
  fuse->add_option("--probs", probs, "Output MOPD probability dump");
  fuse->add_option("--dump-bev-pgm", pgm, "Also write a top-down PGM image");

  std::uint64_t seed = 0;
  std::uint32_t trials = 100;
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of the loss gradients");
  grad->add_option("--seed", seed, "Random seed");
  grad->add_option("--trials", trials, "Random problems to check");

  std::string kind;
  auto* fixture = app.add_subcommand("make-fixture", "Write a synthetic scene directory");
  fixture->add_option("--kind", kind, "plane+car, rain-noise or two-frame-motion")
      ->required()
      ->check(CLI::IsMember({"plane+car", "rain-noise", "two-frame-motion"}));
  fixture->add_option("--seed", seed, "Random seed");
  fixture->add_option("--out", out, "Output directory")->required();

  std::string cloud;
  auto* vox = app.add_subcommand("voxelize", "Majority-label voxelization of a labeled point cloud");
  vox->add_option("--cloud", cloud, "Labeled MOPC cloud (or .csv)")->required();
  vox->add_option("--config", config, "Run configuration supplying the grid");
  vox->add_option("--out", out, "Output MOCG grid")->required();
  vox->add_option("--dump-bev-pgm", pgm, "Also write a top-down PGM image");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (gen->parsed()) {
    Config cfg;
    if (int rc = load_config(config, cfg)) return rc;
    Grid g;
    if (int rc = report(occukit_gen_labels(cfg.handle, scene.c_str(), &g.handle, quiet ? nullptr : print_line, nullptr),
                        "gen-labels"))
      return rc;
    return save_outputs(g, out, pgm, "gen-labels");
  }

  if (eval->parsed()) {
    Config cfg;
    if (int rc = load_config(config, cfg)) return rc;
    Grid p, t;
    if (int rc = report(occukit_grid_load(pred.c_str(), &p.handle), "eval")) return rc;
    if (int rc = report(occukit_grid_load(gt.c_str(), &t.handle), "eval")) return rc;
    std::vector<std::uint8_t> ig(ignore.begin(), ignore.end());
    occukit_report* r = nullptr;
    if (int rc = report(occukit_evaluate(p.handle, t.handle, ig.data(), ig.size(), &r), "eval")) return rc;
    const double sc = occukit_report_sc_iou(r), mi = occukit_report_miou(r);
    const occukit_status s = occukit_report_write_json(r, cfg.handle, report_path.c_str());
    occukit_report_free(r);
    if (int rc = report(s, "eval")) return rc;
    std::printf("sc_iou %.6f\nmiou %.6f\n", sc, mi);
    if ((min_sc && sc < *min_sc) || (min_miou && mi < *min_miou)) {
      std::fprintf(stderr, "occukit eval: metric below the requested minimum\n");
      return kCheckFailed;
    }
    return kOk;
  }

  if (fuse->parsed()) {
    Config cfg;
    if (int rc = load_config(config, cfg)) return rc;
    if (!save_weights.empty()) {
      std::uint64_t cfg_seed = 0;
      if (int rc = report(occukit_config_seed(cfg.handle, &cfg_seed), "fuse-demo")) return rc;
      if (int rc = report(occukit_weights_init(cfg.handle, cfg_seed, frames, save_weights.c_str()), "fuse-demo"))
        return rc;
      weights = save_weights;
    }
    Grid g;
    if (int rc = report(occukit_fuse_demo(cfg.handle, opt(weights), scene.c_str(), frames, &g.handle, opt(probs)),
                        "fuse-demo"))
      return rc;
    return save_outputs(g, out, pgm, "fuse-demo");
  }

  if (grad->parsed()) {
    occukit_gradcheck_result r{};
    const occukit_status s = occukit_gradcheck(seed, trials, &r);
    if (s == OCCUKIT_OK || s == OCCUKIT_CHECK_FAILED) {
      std::printf("points per loss %llu\n", static_cast<unsigned long long>(r.points));
      std::printf("cross_entropy max_rel_err %.3e\n", r.ce);
      std::printf("lovasz_softmax max_rel_err %.3e\n", r.lovasz);
      std::printf("scal_geo max_rel_err %.3e\n", r.scal_geo);
      std::printf("scal_sem max_rel_err %.3e\n", r.scal_sem);
      std::printf("total max_rel_err %.3e\n", r.total);
      std::printf("%s (tolerance %.0e)\n", s == OCCUKIT_OK ? "PASS" : "FAIL", occukit_gradcheck_tolerance());
    }
    return report(s, "gradcheck");
  }

  if (fixture->parsed()) return report(occukit_make_fixture(kind.c_str(), seed, out.c_str()), "make-fixture");

  if (vox->parsed()) {
    Config cfg;
    if (int rc = load_config(config, cfg)) return rc;
    Grid g;
    if (int rc = report(occukit_voxelize_cloud(cfg.handle, cloud.c_str(), &g.handle), "voxelize")) return rc;
    return save_outputs(g, out, pgm, "voxelize");
  }
  return kUsage;
}
