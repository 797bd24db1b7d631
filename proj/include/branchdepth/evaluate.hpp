#pragma once

#include "branchdepth/raster.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace branchdepth {

struct BranchStats {
  int branch_id = 0;
  std::int64_t pixel_count = 0;        // mask area
  std::int64_t valid_depth_count = 0;  // finite depth inside the mask
  double mean_mm = 0, median_mm = 0;
  double sigma_mm = 0;  // sample standard deviation; 0 when n < 2
  double min_mm = 0, max_mm = 0, range_mm = 0;
};

BranchStats branch_depth_stats(const RealPlane& depth, const MaskPlane& mask);

struct VersionRow {
  std::string version;
  int branch_count = 0;
  double avg_sigma_mm = 0, avg_range_mm = 0;  // unweighted branch averages
  std::int64_t total_mask_pixels = 0, total_valid_pixels = 0;
};

VersionRow summarize_version(const std::string& name,
                             const std::vector<BranchStats>& stats);

struct DepthHistogram {
  double min_mm = 0, max_mm = 0;
  std::vector<std::int64_t> counts;
};

// Equal-width bins over [min, max] of the valid data; constant data lands
// in a single bin.
DepthHistogram depth_histogram(const RealPlane& depth, const MaskPlane& mask,
                               int bins);

// ---------------------------------------------------------------- scenes

struct RectPrimitive {
  int x = 0, y = 0, w = 0, h = 0;
};

struct ScenePrimitive {
  enum class Kind { Rect, Polyline };
  Kind kind = Kind::Rect;
  int branch_id = 0;
  double depth_mm = 1000;
  RectPrimitive rect;                        // Kind::Rect
  std::vector<std::pair<int, int>> points;   // Kind::Polyline, (x, y) vertices
};

struct BranchAppearance {
  double score = 0.9;
  std::array<std::uint8_t, 3> rgb{90, 75, 60};
};

struct NoiseSpec {
  double gaussian_sigma_mm = 0;
  double outlier_fraction = 0;        // exact count per branch, no replacement
  double outlier_offset_min_mm = 0;
  double outlier_offset_max_mm = 0;
  int spike_count = 0;                // isolated single-pixel spikes, scene-wide
  double spike_offset_mm = 8000;
};

struct SceneSpec {
  int width = 640, height = 360;
  CameraIntrinsics intrinsics{1120.0, 1120.0, 320.0, 180.0, 63.0};
  std::array<std::uint8_t, 3> background_rgb{208, 222, 238};  // sky analogue
  double background_depth_mm = 20000;
  double color_jitter = 3;  // per-channel uniform amplitude, deterministic
  NoiseSpec noise;
  std::vector<ScenePrimitive> primitives;
  std::map<int, BranchAppearance> branches;  // keyed by branch id
};

struct SyntheticScene {
  RgbImage rgb;
  RealPlane gt_depth;   // noiseless depth (background included)
  RealPlane disparity;  // contaminated disparity fed to the pipeline
  std::vector<BranchInstance> instances;
  CameraIntrinsics intrinsics;
  NoiseSpec noise;
  std::uint64_t seed = 0;
};

// Rasterizes the primitives (overlap -> std::invalid_argument), derives
// disparity from the contaminated target depth, and defines ground truth
// through the pipeline's own disparity-to-depth conversion so the two
// satisfy Z = fx*B/D bitwise.  Deterministic for a given (spec, seed) at
// any thread count: all randomness is counter-keyed.
SyntheticScene generate_scene(const SceneSpec& spec, std::uint64_t seed);

// Preset layouts used by the tests and the CLI presets.
SceneSpec canonical_scene_spec();       // six solid branches, 640x360
SceneSpec thin_structure_scene_spec();  // knotted unit-width polylines

struct BranchError {
  int branch_id = 0;
  std::int64_t compared = 0;  // pixels finite in both planes
  double mae_mm = 0, rmse_mm = 0;
};

BranchError compare_to_ground_truth(int branch_id, const RealPlane& depth,
                                    const RealPlane& gt);

}  // namespace branchdepth
