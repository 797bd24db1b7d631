#include "branchdepth/pipeline.hpp"

#include <json.hpp>
#include <unistd.h>

#include "doctest.h"
#include "test_support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

using namespace branchdepth;
namespace fs = std::filesystem;
namespace ts = testsupport;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("branchdepth_pipeline_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// Restores BRANCHDEPTH_THREADS on scope exit.
struct ThreadEnvGuard {
  std::optional<std::string> saved;
  ThreadEnvGuard() {
    if (const char* v = std::getenv("BRANCHDEPTH_THREADS")) saved = v;
  }
  ~ThreadEnvGuard() {
    if (saved)
      ::setenv("BRANCHDEPTH_THREADS", saved->c_str(), 1);
    else
      ::unsetenv("BRANCHDEPTH_THREADS");
  }
};

SceneInputs to_inputs(const SyntheticScene& s) {
  SceneInputs in;
  in.rgb = s.rgb;
  in.disparity = s.disparity;
  in.instances = s.instances;
  in.intrinsics = s.intrinsics;
  return in;
}

SceneSpec small_spec() {
  SceneSpec spec;
  spec.width = 64;
  spec.height = 48;
  ScenePrimitive p;
  p.kind = ScenePrimitive::Kind::Rect;
  p.branch_id = 1;
  p.depth_mm = 1200;
  p.rect = {6, 6, 22, 14};
  spec.primitives.push_back(p);
  p.branch_id = 2;
  p.depth_mm = 2100;
  p.rect = {34, 26, 20, 16};
  spec.primitives.push_back(p);
  return spec;
}

SceneSpec noisy_spec() {
  SceneSpec spec = small_spec();
  spec.noise.gaussian_sigma_mm = 30;
  spec.noise.outlier_fraction = 0.1;
  spec.noise.outlier_offset_min_mm = 500;
  spec.noise.outlier_offset_max_mm = 900;
  spec.noise.spike_count = 2;
  return spec;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

std::vector<unsigned char> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

// Small pipeline config with mask-refinement radii sized for 64x48 scenes.
PipelineConfig small_cfg() {
  PipelineConfig cfg;
  cfg.refine.erosion_radius = 2;
  cfg.refine.core_radius = 4;
  cfg.refine.core_min_pixels = 20;
  return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("version names parse and print consistently") {
  const Version all[] = {Version::V1, Version::V2, Version::V3,
                         Version::V4, Version::V5, Version::V6};
  for (Version v : all) {
    std::optional<Version> back = parse_version(version_name(v));
    REQUIRE(back.has_value());
    CHECK(*back == v);
  }
  CHECK(!parse_version("v0").has_value());
  CHECK(!parse_version("v7").has_value());
  CHECK(!parse_version("v").has_value());
  CHECK(!parse_version("v16").has_value());
  CHECK(!parse_version("x1").has_value());
  CHECK(!parse_version("").has_value());
}

TEST_CASE("pipeline config: keys land in their sections") {
  TempDir tmp;
  const fs::path f = tmp.path / "pipeline.conf";
  write_text(f,
             "score_threshold = 0.5\n"
             "refine.erosion_radius = 9\n"
             "refine.core_min_pixels = 64\n"
             "v5.iqr_alpha = 2.25\n"
             "v5.local_sigma_center = median\n"
             "v6.consensus_rho_min = 0.4\n"
             "v6.bilateral_alpha = 2.0\n");
  PipelineConfig cfg = read_pipeline_config(f);
  CHECK(cfg.score_threshold == 0.5);
  CHECK(cfg.refine.erosion_radius == 9);
  CHECK(cfg.refine.core_min_pixels == 64);
  CHECK(cfg.v5.iqr_alpha == 2.25);
  CHECK(cfg.v5.local_sigma_center == SigmaCenter::Median);
  CHECK(cfg.v6.consensus_rho_min == 0.4);
  CHECK(cfg.v6.bilateral_alpha == 2.0);
  // Untouched keys keep their defaults.
  CHECK(cfg.refine.core_radius == 25);
  CHECK(cfg.v6.consensus_window == 11);

  const fs::path unknown = tmp.path / "unknown.conf";
  write_text(unknown, "v9.window = 3\n");
  CHECK_THROWS_AS(read_pipeline_config(unknown), std::runtime_error);

  const fs::path trailing = tmp.path / "trailing.conf";
  write_text(trailing, "v5.iqr_alpha = 1.5x\n");
  CHECK_THROWS_AS(read_pipeline_config(trailing), std::runtime_error);

  const fs::path badcenter = tmp.path / "badcenter.conf";
  write_text(badcenter, "v5.local_sigma_center = wobble\n");
  CHECK_THROWS_AS(read_pipeline_config(badcenter), std::runtime_error);

  const fs::path notnum = tmp.path / "notnum.conf";
  write_text(notnum, "v6.mad_threshold = abc\n");
  CHECK_THROWS(read_pipeline_config(notnum));
}

TEST_CASE("thread count resolves from the environment") {
  ThreadEnvGuard guard;
  ::setenv("BRANCHDEPTH_THREADS", "3", 1);
  CHECK(resolve_thread_count() == 3);
  ::setenv("BRANCHDEPTH_THREADS", "0", 1);
  CHECK_THROWS_AS(resolve_thread_count(), std::runtime_error);
  ::setenv("BRANCHDEPTH_THREADS", "abc", 1);
  CHECK_THROWS_AS(resolve_thread_count(), std::runtime_error);
  ::setenv("BRANCHDEPTH_THREADS", "2x", 1);
  CHECK_THROWS_AS(resolve_thread_count(), std::runtime_error);
  ::unsetenv("BRANCHDEPTH_THREADS");
  CHECK(resolve_thread_count() >= 1);
}

TEST_CASE("v1 on a noiseless scene reproduces ground truth exactly") {
  SyntheticScene scene = generate_scene(small_spec(), 21);
  SceneInputs in = to_inputs(scene);
  PipelineConfig cfg;
  PipelineRun run = run_pipeline(in, Version::V1, cfg);
  CHECK(run.version == Version::V1);
  CHECK(run.dropped.empty());
  REQUIRE(run.branches.size() == 2);
  for (const BranchResult& b : run.branches) {
    CHECK(b.stats.sigma_mm == 0.0);
    CHECK(b.stats.range_mm == 0.0);
    RealPlane want = apply_mask(scene.gt_depth, b.mask);
    CHECK(ts::planes_identical(b.depth, want));
    CHECK(b.trace.stages.empty());  // v1 refines nothing
    CHECK(b.trace.input_pixels == mask_pixel_count(b.mask));
    CHECK(std::int64_t(b.cloud.points.size()) == b.stats.valid_depth_count);
  }
}

TEST_CASE("branch results never depend on the worker count") {
  SyntheticScene scene = generate_scene(noisy_spec(), 77);
  SceneInputs in = to_inputs(scene);
  PipelineConfig cfg = small_cfg();

  PipelineRun a = run_pipeline(in, Version::V6, cfg, 1);
  PipelineRun b = run_pipeline(in, Version::V6, cfg, 4);
  REQUIRE(a.branches.size() == b.branches.size());
  for (std::size_t k = 0; k < a.branches.size(); ++k) {
    CHECK(a.branches[k].id == b.branches[k].id);
    CHECK(ts::masks_equal(a.branches[k].mask, b.branches[k].mask));
    CHECK(ts::planes_identical(a.branches[k].depth, b.branches[k].depth));
    CHECK(a.branches[k].stats.sigma_mm == b.branches[k].stats.sigma_mm);
    CHECK(a.branches[k].cloud.points.size() == b.branches[k].cloud.points.size());
  }

  ComparisonRun c1 = compare_versions(in, cfg, 1);
  ComparisonRun c3 = compare_versions(in, cfg, 3);
  REQUIRE(c1.table.size() == 6);
  REQUIRE(c3.table.size() == 6);
  for (std::size_t v = 0; v < 6; ++v) {
    CHECK(c1.table[v].version == c3.table[v].version);
    CHECK(c1.table[v].branch_count == c3.table[v].branch_count);
    CHECK(c1.table[v].avg_sigma_mm == c3.table[v].avg_sigma_mm);
    CHECK(c1.table[v].avg_range_mm == c3.table[v].avg_range_mm);
    CHECK(c1.table[v].total_valid_pixels == c3.table[v].total_valid_pixels);
  }
  CHECK(c1.runs[5].version == Version::V6);
}

TEST_CASE("gating drops scores at the threshold without a trace") {
  SceneSpec spec = small_spec();
  spec.branches[1] = {0.7, {96, 78, 58}};    // exactly at the threshold
  spec.branches[2] = {0.71, {110, 84, 60}};  // just above
  SyntheticScene scene = generate_scene(spec, 4);
  SceneInputs in = to_inputs(scene);
  PipelineConfig cfg;

  PipelineRun run = run_pipeline(in, Version::V1, cfg);
  REQUIRE(run.branches.size() == 1);
  CHECK(run.branches[0].id == 2);
  CHECK(run.dropped.empty());  // gating is silent, not a refinement drop

  cfg.score_threshold = 0.5;
  PipelineRun both = run_pipeline(in, Version::V1, cfg);
  CHECK(both.branches.size() == 2);
}

TEST_CASE("report.json: structure, stage order, deterministic reruns") {
  SyntheticScene scene = generate_scene(noisy_spec(), 31);
  SceneInputs in = to_inputs(scene);
  PipelineConfig cfg = small_cfg();
  PipelineRun run = run_pipeline(in, Version::V6, cfg, 1);
  REQUIRE(!run.branches.empty());

  TempDir tmp;
  const fs::path timed = tmp.path / "timed";
  write_outputs(timed, run, cfg, true);
  for (const BranchResult& b : run.branches) {
    char name[64];
    std::snprintf(name, sizeof name, "mask_branch_%02d.png", b.id);
    CHECK(fs::exists(timed / name));
    std::snprintf(name, sizeof name, "depth_branch_%02d.pfm", b.id);
    CHECK(fs::exists(timed / name));
    std::snprintf(name, sizeof name, "cloud_branch_%02d.ply", b.id);
    CHECK(fs::exists(timed / name));
  }
  CHECK(fs::exists(timed / "stats.csv"));

  std::ifstream jf(timed / "report.json");
  nlohmann::json report = nlohmann::json::parse(jf);
  CHECK(report["version"] == "v6");
  CHECK(report["branch_count"].get<std::size_t>() == run.branches.size());
  REQUIRE(report.contains("branches"));
  REQUIRE(report.contains("dropped"));
  REQUIRE(report.contains("config"));
  CHECK(report.contains("timings_ms"));
  CHECK(report["config"].contains("refine"));
  CHECK(report["config"].contains("v5"));
  CHECK(report["config"].contains("v6"));

  const nlohmann::json& b0 = report["branches"][0];
  CHECK(b0.contains("stats"));
  CHECK(b0.contains("trace"));
  REQUIRE(b0.contains("stage_reports"));
  const nlohmann::json& reports = b0["stage_reports"];
  REQUIRE(reports.size() == 5);
  CHECK(reports[0]["stage"] == "mad_global");
  CHECK(reports[1]["stage"] == "spatial_density_consensus");
  CHECK(reports[2]["stage"] == "local_mad");
  CHECK(reports[3]["stage"] == "guided_filter");
  CHECK(reports[4]["stage"] == "adaptive_bilateral");

  // Without timings two separate runs serialize byte-identically.
  PipelineRun rerun = run_pipeline(in, Version::V6, cfg, 2);
  const fs::path da = tmp.path / "a", db = tmp.path / "b";
  write_outputs(da, run, cfg, false);
  write_outputs(db, rerun, cfg, false);
  CHECK(file_bytes(da / "report.json") == file_bytes(db / "report.json"));
  CHECK(file_bytes(da / "stats.csv") == file_bytes(db / "stats.csv"));
  std::ifstream jg(da / "report.json");
  nlohmann::json untimed = nlohmann::json::parse(jg);
  CHECK(!untimed.contains("timings_ms"));
}

TEST_CASE("evaluate_outputs matches the in-memory comparison") {
  SyntheticScene scene = generate_scene(small_spec(), 13);
  SceneInputs in = to_inputs(scene);
  PipelineConfig cfg;
  PipelineRun run = run_pipeline(in, Version::V1, cfg);

  TempDir tmp;
  const fs::path scene_dir = tmp.path / "scene", out_dir = tmp.path / "out";
  write_scene(scene_dir, scene);
  write_outputs(out_dir, run, cfg, false);

  std::vector<EvalRow> rows = evaluate_outputs(out_dir, scene_dir);
  REQUIRE(rows.size() == run.branches.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const BranchResult& b = run.branches[k];
    BranchError want = compare_to_ground_truth(b.id, b.depth, scene.gt_depth);
    CHECK(rows[k].branch_id == want.branch_id);
    CHECK(rows[k].compared == want.compared);
    CHECK(rows[k].mae_mm == want.mae_mm);
    CHECK(rows[k].rmse_mm == want.rmse_mm);
    // Noiseless v1: exact agreement with ground truth.
    CHECK(rows[k].mae_mm == 0.0);
    CHECK(rows[k].rmse_mm == 0.0);
    CHECK(rows[k].compared == b.stats.valid_depth_count);
  }

  CHECK_THROWS_AS(evaluate_outputs(tmp.path / "nowhere", scene_dir),
                  std::runtime_error);
}

}  // TEST_SUITE
