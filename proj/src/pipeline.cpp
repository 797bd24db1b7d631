#include "branchdepth/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "branchdepth/parallel.hpp"

namespace branchdepth {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::optional<Version> parse_version(const std::string& s) {
  if (s.size() == 2 && s[0] == 'v' && s[1] >= '1' && s[1] <= '6')
    return static_cast<Version>(s[1] - '0');
  return std::nullopt;
}

const char* version_name(Version v) {
  switch (v) {
    case Version::V1: return "v1";
    case Version::V2: return "v2";
    case Version::V3: return "v3";
    case Version::V4: return "v4";
    case Version::V5: return "v5";
    case Version::V6: return "v6";
  }
  return "v?";
}

PipelineConfig read_pipeline_config(const fs::path& path) {
  KeyValueFile kv = read_key_values(path);
  PipelineConfig cfg;

  auto dbl = [&](const std::string& v) {
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) throw std::runtime_error(path.string() + ": bad number '" + v + "'");
    return out;
  };
  auto ints = [&](const std::string& v) {
    std::size_t used = 0;
    int out = std::stoi(v, &used);
    if (used != v.size()) throw std::runtime_error(path.string() + ": bad integer '" + v + "'");
    return out;
  };

  for (const auto& [key, value] : kv.entries) {
    if (key == "score_threshold") cfg.score_threshold = dbl(value);
    else if (key == "refine.erosion_radius") cfg.refine.erosion_radius = ints(value);
    else if (key == "refine.core_radius") cfg.refine.core_radius = ints(value);
    else if (key == "refine.core_min_pixels") cfg.refine.core_min_pixels = ints(value);
    else if (key == "refine.mahalanobis_threshold") cfg.refine.mahalanobis_threshold = dbl(value);
    else if (key == "refine.component_ratio") cfg.refine.component_ratio = dbl(value);
    else if (key == "refine.color_model_eps") cfg.refine.color_model_eps = dbl(value);
    else if (key == "v5.iqr_alpha") cfg.v5.iqr_alpha = dbl(value);
    else if (key == "v5.iqr_max_rounds") cfg.v5.iqr_max_rounds = ints(value);
    else if (key == "v5.zscore_threshold") cfg.v5.zscore_threshold = dbl(value);
    else if (key == "v5.local_window") cfg.v5.local_window = ints(value);
    else if (key == "v5.local_beta") cfg.v5.local_beta = dbl(value);
    else if (key == "v5.median_window") cfg.v5.median_window = ints(value);
    else if (key == "v5.local_sigma_center") {
      if (value == "mean") cfg.v5.local_sigma_center = SigmaCenter::Mean;
      else if (value == "median") cfg.v5.local_sigma_center = SigmaCenter::Median;
      else throw std::runtime_error(path.string() + ": v5.local_sigma_center wants mean|median");
    }
    else if (key == "v6.mad_threshold") cfg.v6.mad_threshold = dbl(value);
    else if (key == "v6.mad_max_rounds") cfg.v6.mad_max_rounds = ints(value);
    else if (key == "v6.consensus_window") cfg.v6.consensus_window = ints(value);
    else if (key == "v6.consensus_gamma") cfg.v6.consensus_gamma = dbl(value);
    else if (key == "v6.consensus_rho_min") cfg.v6.consensus_rho_min = dbl(value);
    else if (key == "v6.local_mad_window") cfg.v6.local_mad_window = ints(value);
    else if (key == "v6.local_mad_threshold") cfg.v6.local_mad_threshold = dbl(value);
    else if (key == "v6.guided_radius") cfg.v6.guided_radius = ints(value);
    else if (key == "v6.guided_eps") cfg.v6.guided_eps = dbl(value);
    else if (key == "v6.guidance_weight_gray") cfg.v6.guidance_weight_gray = dbl(value);
    else if (key == "v6.guidance_weight_l") cfg.v6.guidance_weight_l = dbl(value);
    else if (key == "v6.guidance_weight_a") cfg.v6.guidance_weight_a = dbl(value);
    else if (key == "v6.guidance_weight_b") cfg.v6.guidance_weight_b = dbl(value);
    else if (key == "v6.bilateral_sigma_s") cfg.v6.bilateral_sigma_s = dbl(value);
    else if (key == "v6.bilateral_alpha") cfg.v6.bilateral_alpha = dbl(value);
    else throw std::runtime_error(path.string() + ": unknown key '" + key + "'");
  }
  return cfg;
}

int resolve_thread_count() {
  if (const char* env = std::getenv("BRANCHDEPTH_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1)
      throw std::runtime_error("BRANCHDEPTH_THREADS must be an integer >= 1");
    return static_cast<int>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

// Depth, statistics, and cloud for already-refined masks.  Shared by every
// version; v5/v6 insert their optimization passes here.
PipelineRun finish_run(const SceneInputs& in, Version version,
                       const PipelineConfig& cfg,
                       std::vector<BranchInstance> instances,
                       std::vector<RefinementTrace> traces,
                       std::vector<RefinementTrace> dropped, int num_threads) {
  PipelineRun run;
  run.version = version;
  run.dropped = std::move(dropped);

  const RealPlane depth_full = disparity_to_depth(in.disparity, in.intrinsics);
  RealPlane guidance;
  if (version == Version::V6) guidance = build_guidance(in.rgb, cfg.v6);

  run.branches.resize(instances.size());
  parallel_for_index(instances.size(), num_threads, [&](std::size_t k) {
    BranchResult& br = run.branches[k];
    br.id = instances[k].id;
    br.score = instances[k].score;
    br.mask = std::move(instances[k].mask);
    br.trace = std::move(traces[k]);

    br.depth = apply_mask(depth_full, br.mask);
    if (version == Version::V5) {
      OptimizeResult opt = optimize_v5(br.depth, br.mask, cfg.v5);
      br.depth = std::move(opt.depth);
      br.stage_reports = std::move(opt.stages);
    } else if (version == Version::V6) {
      OptimizeResult opt = optimize_v6(br.depth, br.mask, guidance, cfg.v6);
      br.depth = std::move(opt.depth);
      br.stage_reports = std::move(opt.stages);
    }
    br.cloud = backproject(br.depth, br.mask, in.rgb, in.intrinsics);
    br.stats = branch_depth_stats(br.depth, br.mask);
    br.stats.branch_id = br.id;
  });
  return run;
}

struct Refined {
  std::vector<BranchInstance> instances;
  std::vector<RefinementTrace> traces;   // for surviving instances, same order
  std::vector<RefinementTrace> dropped;
};

Refined refine_for_version(const std::vector<BranchInstance>& gated,
                           const SceneInputs& in, Version version,
                           const PipelineConfig& cfg, int num_threads) {
  Refined out;
  if (version == Version::V1) {
    out.instances = gated;
    out.traces.resize(gated.size());
    for (std::size_t k = 0; k < gated.size(); ++k) {
      out.traces[k].branch_id = gated[k].id;
      out.traces[k].input_pixels = mask_pixel_count(gated[k].mask);
    }
    return out;
  }
  if (version == Version::V2 || version == Version::V3) {
    out.instances.resize(gated.size());
    out.traces.resize(gated.size());
    parallel_for_index(gated.size(), num_threads, [&](std::size_t k) {
      RefineResult r = version == Version::V2 ? refine_v2(gated[k], cfg.refine)
                                              : refine_v3(gated[k], cfg.refine);
      out.instances[k] = std::move(r.instance);
      out.traces[k] = std::move(r.trace);
    });
    return out;
  }
  // V4, V5 and V6 share the V4 refinement.
  RefineV4Result r4 = refine_v4(gated, in.rgb, cfg.refine, num_threads);
  out.instances = std::move(r4.instances);
  for (RefinementTrace& t : r4.traces) {
    if (t.dropped)
      out.dropped.push_back(std::move(t));
    else
      out.traces.push_back(std::move(t));
  }
  return out;
}

}  // namespace

PipelineRun run_pipeline(const SceneInputs& in, Version version,
                         const PipelineConfig& cfg, int num_threads) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<BranchInstance> gated =
      gate_by_score(in.instances, cfg.score_threshold);
  Refined r = refine_for_version(gated, in, version, cfg, num_threads);
  PipelineRun run = finish_run(in, version, cfg, std::move(r.instances),
                               std::move(r.traces), std::move(r.dropped),
                               num_threads);
  run.total_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
  return run;
}

ComparisonRun compare_versions(const SceneInputs& in, const PipelineConfig& cfg,
                               int num_threads) {
  ComparisonRun cmp;
  std::vector<BranchInstance> gated =
      gate_by_score(in.instances, cfg.score_threshold);

  std::optional<Refined> v4_cache;
  for (int v = 1; v <= 6; ++v) {
    const Version version = static_cast<Version>(v);
    const auto t0 = std::chrono::steady_clock::now();
    Refined r;
    if (version >= Version::V4) {
      if (!v4_cache)
        v4_cache = refine_for_version(gated, in, Version::V4, cfg, num_threads);
      r = *v4_cache;  // v5/v6 share v4's masks
    } else {
      r = refine_for_version(gated, in, version, cfg, num_threads);
    }
    PipelineRun run = finish_run(in, version, cfg, std::move(r.instances),
                                 std::move(r.traces), std::move(r.dropped),
                                 num_threads);
    run.total_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();

    std::vector<BranchStats> stats;
    for (const BranchResult& b : run.branches) stats.push_back(b.stats);
    cmp.table.push_back(summarize_version(version_name(version), stats));
    cmp.runs.push_back(std::move(run));
  }
  return cmp;
}

namespace {

ordered_json stage_report_json(const StageReport& s) {
  ordered_json j;
  j["stage"] = s.stage;
  j["pixels_modified"] = s.pixels_modified;
  j["rounds_run"] = s.rounds_run;
  j["guard_triggered"] = s.guard_triggered;
  j["sigma_before"] = s.sigma_before;
  j["sigma_after"] = s.sigma_after;
  j["range_before"] = s.range_before;
  j["range_after"] = s.range_after;
  return j;
}

ordered_json trace_json(const RefinementTrace& t) {
  ordered_json j;
  j["branch_id"] = t.branch_id;
  j["input_pixels"] = t.input_pixels;
  ordered_json stages = ordered_json::array();
  for (const auto& e : t.stages) {
    ordered_json s;
    s["stage"] = e.stage;
    s["pixels_after"] = e.pixels_after;
    stages.push_back(s);
  }
  j["stages"] = stages;
  if (t.fallback_radius_used >= 0) j["fallback_radius_used"] = t.fallback_radius_used;
  if (t.core_radius_used >= 0) j["core_radius_used"] = t.core_radius_used;
  j["dropped"] = t.dropped;
  j["flagged"] = t.flagged;
  if (!t.flag_reason.empty()) j["flag_reason"] = t.flag_reason;
  return j;
}

ordered_json config_json(const PipelineConfig& cfg) {
  ordered_json j;
  j["score_threshold"] = cfg.score_threshold;
  ordered_json refine;
  refine["erosion_radius"] = cfg.refine.erosion_radius;
  refine["skeleton_dilation_radius"] = cfg.refine.skeleton_dilation_radius();
  refine["core_radius"] = cfg.refine.core_radius;
  refine["core_min_pixels"] = cfg.refine.core_min_pixels;
  refine["mahalanobis_threshold"] = cfg.refine.mahalanobis_threshold;
  refine["component_ratio"] = cfg.refine.component_ratio;
  refine["color_model_eps"] = cfg.refine.color_model_eps;
  j["refine"] = refine;
  ordered_json v5;
  v5["iqr_alpha"] = cfg.v5.iqr_alpha;
  v5["iqr_max_rounds"] = cfg.v5.iqr_max_rounds;
  v5["zscore_threshold"] = cfg.v5.zscore_threshold;
  v5["local_window"] = cfg.v5.local_window;
  v5["local_beta"] = cfg.v5.local_beta;
  v5["local_sigma_center"] =
      cfg.v5.local_sigma_center == SigmaCenter::Mean ? "mean" : "median";
  v5["median_window"] = cfg.v5.median_window;
  j["v5"] = v5;
  ordered_json v6;
  v6["mad_threshold"] = cfg.v6.mad_threshold;
  v6["mad_max_rounds"] = cfg.v6.mad_max_rounds;
  v6["consensus_window"] = cfg.v6.consensus_window;
  v6["consensus_gamma"] = cfg.v6.consensus_gamma;
  v6["consensus_rho_min"] = cfg.v6.consensus_rho_min;
  v6["local_mad_window"] = cfg.v6.local_mad_window;
  v6["local_mad_threshold"] = cfg.v6.local_mad_threshold;
  v6["guided_radius"] = cfg.v6.guided_radius;
  v6["guided_eps"] = cfg.v6.guided_eps;
  v6["guidance_weights"] = {cfg.v6.guidance_weight_gray, cfg.v6.guidance_weight_l,
                            cfg.v6.guidance_weight_a, cfg.v6.guidance_weight_b};
  v6["bilateral_sigma_s"] = cfg.v6.bilateral_sigma_s;
  v6["bilateral_alpha"] = cfg.v6.bilateral_alpha;
  j["v6"] = v6;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_outputs(const fs::path& dir, const PipelineRun& run,
                   const PipelineConfig& cfg, bool with_timings) {
  fs::create_directories(dir);

  std::string csv = "branch_id,pixels,valid,mean_mm,median_mm,sigma_mm,range_mm\n";
  ordered_json branches = ordered_json::array();
  for (const BranchResult& b : run.branches) {
    char name[64];
    std::snprintf(name, sizeof name, "mask_branch_%02d.png", b.id);
    write_png_mask(dir / name, b.mask);
    std::snprintf(name, sizeof name, "depth_branch_%02d.pfm", b.id);
    write_pfm(dir / name, b.depth);
    std::snprintf(name, sizeof name, "cloud_branch_%02d.ply", b.id);
    write_ply(dir / name, b.cloud);

    csv += std::to_string(b.id) + "," + std::to_string(b.stats.pixel_count) +
           "," + std::to_string(b.stats.valid_depth_count) + "," +
           csv_number(b.stats.mean_mm) + "," + csv_number(b.stats.median_mm) +
           "," + csv_number(b.stats.sigma_mm) + "," +
           csv_number(b.stats.range_mm) + "\n";

    ordered_json bj;
    bj["id"] = b.id;
    bj["score"] = b.score;
    ordered_json stats;
    stats["pixels"] = b.stats.pixel_count;
    stats["valid"] = b.stats.valid_depth_count;
    stats["mean_mm"] = b.stats.mean_mm;
    stats["median_mm"] = b.stats.median_mm;
    stats["sigma_mm"] = b.stats.sigma_mm;
    stats["min_mm"] = b.stats.min_mm;
    stats["max_mm"] = b.stats.max_mm;
    stats["range_mm"] = b.stats.range_mm;
    bj["stats"] = stats;
    bj["trace"] = trace_json(b.trace);
    if (!b.stage_reports.empty()) {
      ordered_json reports = ordered_json::array();
      for (const StageReport& s : b.stage_reports)
        reports.push_back(stage_report_json(s));
      bj["stage_reports"] = reports;
    }
    branches.push_back(bj);
  }
  write_text(dir / "stats.csv", csv);

  ordered_json report;
  report["version"] = version_name(run.version);
  report["branch_count"] = run.branches.size();
  report["branches"] = branches;
  ordered_json dropped = ordered_json::array();
  for (const RefinementTrace& t : run.dropped) dropped.push_back(trace_json(t));
  report["dropped"] = dropped;
  report["config"] = config_json(cfg);
  if (with_timings) {
    ordered_json timings;
    timings["total"] = run.total_ms;
    report["timings_ms"] = timings;
  }
  write_text(dir / "report.json", report.dump(2) + "\n");
}

void write_comparison_csv(const fs::path& path,
                          const std::vector<VersionRow>& rows) {
  std::string csv =
      "version,branches,avg_sigma_mm,avg_range_mm,total_mask_pixels,total_valid_pixels\n";
  for (const VersionRow& r : rows)
    csv += r.version + "," + std::to_string(r.branch_count) + "," +
           csv_number(r.avg_sigma_mm) + "," + csv_number(r.avg_range_mm) + "," +
           std::to_string(r.total_mask_pixels) + "," +
           std::to_string(r.total_valid_pixels) + "\n";
  write_text(path, csv);
}

std::vector<EvalRow> evaluate_outputs(const fs::path& out_dir,
                                      const fs::path& scene_dir) {
  const RealPlane gt = read_pfm(scene_dir / "gt_depth.pfm");

  std::vector<std::pair<int, fs::path>> depth_files;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    const std::string name = entry.path().filename().string();
    int id = 0, consumed = 0;
    if (std::sscanf(name.c_str(), "depth_branch_%d.pfm%n", &id, &consumed) == 1 &&
        consumed == static_cast<int>(name.size()))
      depth_files.emplace_back(id, entry.path());
  }
  if (depth_files.empty())
    throw std::runtime_error(out_dir.string() + ": no depth_branch_*.pfm files");
  std::sort(depth_files.begin(), depth_files.end());

  std::vector<EvalRow> rows;
  for (const auto& [id, path] : depth_files) {
    const RealPlane depth = read_pfm(path);
    const BranchError e = compare_to_ground_truth(id, depth, gt);
    rows.push_back({e.branch_id, e.compared, e.mae_mm, e.rmse_mm});
  }
  return rows;
}

void write_eval_csv(const fs::path& path, const std::vector<EvalRow>& rows) {
  std::string csv = "branch_id,compared,mae_mm,rmse_mm\n";
  for (const EvalRow& r : rows)
    csv += std::to_string(r.branch_id) + "," + std::to_string(r.compared) +
           "," + csv_number(r.mae_mm) + "," + csv_number(r.rmse_mm) + "\n";
  write_text(path, csv);
}

}  // namespace branchdepth
