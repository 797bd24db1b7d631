#pragma once

#include "branchdepth/depth_filters.hpp"
#include "branchdepth/evaluate.hpp"
#include "branchdepth/io.hpp"
#include "branchdepth/mask_refine.hpp"
#include "branchdepth/stereo.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace branchdepth {

enum class Version { V1 = 1, V2, V3, V4, V5, V6 };

std::optional<Version> parse_version(const std::string& s);  // "v1".."v6"
const char* version_name(Version v);

struct PipelineConfig {
  double score_threshold = 0.7;  // strict: keep score > threshold
  MaskRefineParams refine;
  V5Params v5;
  V6Params v6;
};

// Flat "section.key = value" text; unknown keys raise std::runtime_error.
PipelineConfig read_pipeline_config(const std::filesystem::path& path);

struct BranchResult {
  int id = 0;
  double score = 0;
  MaskPlane mask;    // refined mask
  RealPlane depth;   // per-branch masked (and for v5/v6 optimized) depth
  PointCloud cloud;
  BranchStats stats;
  RefinementTrace trace;
  std::vector<StageReport> stage_reports;  // v5/v6 only
};

struct PipelineRun {
  Version version = Version::V1;
  std::vector<BranchResult> branches;
  std::vector<RefinementTrace> dropped;  // branches emptied during refinement
  double total_ms = 0;                   // wall clock, informational only
};

// Worker cap from BRANCHDEPTH_THREADS (integer >= 1); defaults to the
// hardware concurrency.  Outputs never depend on the value.
int resolve_thread_count();

PipelineRun run_pipeline(const SceneInputs& in, Version version,
                         const PipelineConfig& cfg, int num_threads = 1);

struct ComparisonRun {
  std::vector<PipelineRun> runs;  // v1..v6 in order
  std::vector<VersionRow> table;
};

// Runs all six versions on one scene; v5/v6 reuse the cached v4 masks.
ComparisonRun compare_versions(const SceneInputs& in, const PipelineConfig& cfg,
                               int num_threads = 1);

// Writes mask_branch_NN.png, depth_branch_NN.pfm, cloud_branch_NN.ply,
// stats.csv and report.json into dir.  with_timings embeds wall-clock
// timings in the report; comparisons omit them so reruns are byte-identical.
void write_outputs(const std::filesystem::path& dir, const PipelineRun& run,
                   const PipelineConfig& cfg, bool with_timings);

void write_comparison_csv(const std::filesystem::path& path,
                          const std::vector<VersionRow>& rows);

struct EvalRow {
  int branch_id = 0;
  std::int64_t compared = 0;
  double mae_mm = 0, rmse_mm = 0;
};

// Pairs depth_branch_NN.pfm files in out_dir with gt_depth.pfm in scene_dir.
std::vector<EvalRow> evaluate_outputs(const std::filesystem::path& out_dir,
                                      const std::filesystem::path& scene_dir);
void write_eval_csv(const std::filesystem::path& path,
                    const std::vector<EvalRow>& rows);

}  // namespace branchdepth
