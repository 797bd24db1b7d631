#pragma once

#include "branchdepth/color.hpp"
#include "branchdepth/morphology.hpp"
#include "branchdepth/raster.hpp"

#include <optional>
#include <string>
#include <vector>

namespace branchdepth {

struct MaskRefineParams {
  int erosion_radius = 15;    // primary erosion radius r_e
  int core_radius = 25;       // color-model core distance
  std::int64_t core_min_pixels = 100;
  double mahalanobis_threshold = 3.5;
  double component_ratio = 0.01;  // keep components with size/largest >= ratio
  double color_model_eps = 1e-3;

  int skeleton_dilation_radius() const {
    int r = erosion_radius / 4;
    return r > 3 ? r : 3;
  }
};

struct RefinementTrace {
  struct Entry {
    std::string stage;
    std::int64_t pixels_after = 0;
  };
  int branch_id = 0;
  std::int64_t input_pixels = 0;
  std::vector<Entry> stages;      // pixel counts monotone over erosion/validation
  int fallback_radius_used = -1;  // -1 = stage not run
  int core_radius_used = -1;      // -1 = stage not run
  bool dropped = false;
  bool flagged = false;
  std::string flag_reason;
};

struct ErodeFallbackResult {
  MaskPlane mask;
  int radius_used = 0;  // 0 = every erosion emptied, original mask returned
};

// Erosion at the requested radius, then the fallback ladder radius/2,
// radius/4, 3, 1 until a nonempty result; if every radius empties the mask
// the original mask is returned with radius_used = 0.
ErodeFallbackResult erode_with_fallback(const MaskPlane& mask, int radius);

// Distance-transform erosion united with the dilated skeleton, clipped to
// the input mask.  Never empty for nonempty input.
MaskPlane skeleton_preserving_erode(const MaskPlane& mask,
                                    const MaskRefineParams& p);

struct CoreRegion {
  MaskPlane mask;
  int radius_used = 0;  // 0 = fell back to the full mask
};

// Pixels at distance >= radius from the mask boundary; halves the radius
// (integer floor, min 1) until min_pixels is reached, else returns the full
// mask with radius_used = 0.
CoreRegion extract_core_region(const MaskPlane& mask, int radius,
                               std::int64_t min_pixels);

struct ColorValidation {
  MaskPlane mask;
  std::optional<ColorModel> model;  // fitted on the core region
  int core_radius_used = 0;
  std::int64_t pixels_rejected = 0;
  bool flagged = false;  // mask too small to fit a model; returned unchanged
};

// Fits a Lab Gaussian on the core region and removes mask pixels whose
// Mahalanobis distance exceeds the threshold.  Rejection applies to all
// mask pixels uniformly, core included.
ColorValidation color_validate(const MaskPlane& mask, const LabImage& lab,
                               const MaskRefineParams& p);

// Reassigns pixels claimed by several masks to the closest color model in a
// single pass; ties go to the lowest branch id.  Outputs are pairwise
// disjoint and subsets of the inputs.
std::vector<MaskPlane> resolve_overlaps(const std::vector<MaskPlane>& masks,
                                        const std::vector<ColorModel>& models,
                                        const std::vector<int>& ids,
                                        const LabImage& lab);

struct RefineResult {
  BranchInstance instance;
  RefinementTrace trace;
};

// Fallback erosion refinement.
RefineResult refine_v2(const BranchInstance& in, const MaskRefineParams& p);

// Skeleton-preserving erosion refinement.
RefineResult refine_v3(const BranchInstance& in, const MaskRefineParams& p);

struct RefineV4Result {
  std::vector<BranchInstance> instances;  // survivors, input order
  std::vector<RefinementTrace> traces;    // one per input branch
};

// Four stages per branch: skeleton-preserving erosion, color validation,
// small-component removal, cross-branch overlap resolution.  Branches
// emptied by stages 1-3 are dropped and trace-flagged.  Stages 1-3 are
// branch-parallel; stage 4 is a synchronization point.
RefineV4Result refine_v4(const std::vector<BranchInstance>& in,
                         const RgbImage& rgb, const MaskRefineParams& p,
                         int num_threads = 1);

}  // namespace branchdepth
