#pragma once

#include "branchdepth/raster.hpp"

#include <string>
#include <vector>

namespace branchdepth {

struct StageReport {
  std::string stage;
  std::int64_t pixels_modified = 0;  // distinct pixels changed by the stage
  int rounds_run = 0;                // iterative stages only
  bool guard_triggered = false;      // degenerate scale / too-few-pixels skip
  double sigma_before = 0.0, sigma_after = 0.0;
  double range_before = 0.0, range_after = 0.0;
};

struct FilterResult {
  RealPlane depth;
  StageReport report;
};

enum class SigmaCenter { Mean, Median };

struct V5Params {
  double iqr_alpha = 1.5;
  int iqr_max_rounds = 3;
  double zscore_threshold = 2.0;
  int local_window = 7;
  double local_beta = 2.0;
  SigmaCenter local_sigma_center = SigmaCenter::Mean;
  int median_window = 5;
};

struct V6Params {
  double mad_threshold = 3.5;  // modified z-score cut
  int mad_max_rounds = 3;
  int consensus_window = 11;
  double consensus_gamma = 2.0;
  double consensus_rho_min = 0.3;
  int local_mad_window = 7;
  double local_mad_threshold = 3.0;
  int guided_radius = 4;
  double guided_eps = 0.01;
  double guidance_weight_gray = 0.4;
  double guidance_weight_l = 0.3;
  double guidance_weight_a = 0.15;
  double guidance_weight_b = 0.15;
  double bilateral_sigma_s = 7.0;
  double bilateral_alpha = 1.5;  // sigma_d = alpha * 1.4826 * branch MAD
};

// Filters touch only valid pixels inside the mask; everything else passes
// through bit-identical.  Replacement-based stages never move a value
// outside the [min, max] of the branch input.

// Multi-round Tukey fence: values outside [Q1 - alpha*IQR, Q3 + alpha*IQR]
// become the round's median.  Quartiles use linear ("inclusive")
// interpolation on the sorted sample.  Needs >= 4 valid pixels.
FilterResult iqr_filter(const RealPlane& depth, const MaskPlane& mask,
                        double alpha, int max_rounds);

// |Z - mean| / sample-sigma > threshold -> branch median.  Sigma == 0 or
// fewer than 2 valid pixels passes through.
FilterResult zscore_filter(const RealPlane& depth, const MaskPlane& mask,
                           double threshold);

// |Z - local median| > beta * local sigma -> local median.  Local mean and
// sigma come from uniform filtering over valid window pixels; the sigma
// center is switchable.  Pixels with < 3 valid window-mates are skipped.
FilterResult local_spatial_filter(const RealPlane& depth, const MaskPlane& mask,
                                  int window, double beta, SigmaCenter center);

// Every valid pixel becomes the median of the valid window values.
FilterResult masked_median_filter(const RealPlane& depth, const MaskPlane& mask,
                                  int window);

// Modified z-score 0.6745 * |Z - median| / MAD > threshold -> median.
// Median and MAD are recomputed every round; iteration stops early when a
// round flags nothing.  MAD == 0 makes the round a no-op (guard).
FilterResult mad_global_filter(const RealPlane& depth, const MaskPlane& mask,
                               double threshold, int max_rounds);

// A pixel is inconsistent when |Z - local median| > gamma * 1.4826 *
// local MAD; it is replaced by the local median iff the fraction of its
// valid neighbors (excluding self) that are themselves consistent reaches
// rho_min.
FilterResult spatial_density_consensus(const RealPlane& depth,
                                       const MaskPlane& mask, int window,
                                       double gamma, double rho_min);

// |Z - local median| > threshold * 1.4826 * local MAD -> local median.
// Window MAD == 0 skips the pixel (guard).
FilterResult local_mad_filter(const RealPlane& depth, const MaskPlane& mask,
                              int window, double threshold);

// Scalar guidance in [0, 1]: w_gray*gray/255 + w_l*L/100 + w_a*(a+128)/255
// + w_b*(b+128)/255.  Gray is Rec.601 luma.
RealPlane build_guidance(const RgbImage& rgb, const V6Params& p);

// Edge-preserving smoothing with box statistics over valid pixels only;
// invalid pixels pass through.
FilterResult guided_filter(const RealPlane& depth, const RealPlane& guidance,
                           const MaskPlane& mask, int radius, double eps);

// Joint spatial/range kernel with kernel radius ceil(2*sigma_s) and
// sigma_d = alpha * 1.4826 * branch_mad; branch_mad == 0 passes through.
FilterResult adaptive_bilateral(const RealPlane& depth, const MaskPlane& mask,
                                double sigma_s, double alpha, double branch_mad);

// Median absolute deviation about the median of valid masked pixels.
double masked_mad(const RealPlane& depth, const MaskPlane& mask);

struct OptimizeResult {
  RealPlane depth;
  std::vector<StageReport> stages;
};

// Four phases: iqr -> zscore -> local spatial -> masked median.
OptimizeResult optimize_v5(const RealPlane& depth, const MaskPlane& mask,
                           const V5Params& p);

// Five stages: global MAD -> density consensus -> local MAD -> guided ->
// adaptive bilateral.  The bilateral sigma_d derives from the branch MAD
// measured after stage 3.
OptimizeResult optimize_v6(const RealPlane& depth, const MaskPlane& mask,
                           const RealPlane& guidance, const V6Params& p);
OptimizeResult optimize_v6(const RealPlane& depth, const MaskPlane& mask,
                           const RgbImage& rgb, const V6Params& p);

}  // namespace branchdepth
