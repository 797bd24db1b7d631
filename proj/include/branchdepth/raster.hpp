#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace branchdepth {

// 2-D data lives in row-major Eigen arrays so that (row, col) indexing and
// .data() both follow image raster order.
template <typename Scalar>
using Plane =
    Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using BytePlane = Plane<std::uint8_t>;
using MaskPlane = BytePlane;      // binary plane, values restricted to {0, 1}
using RealPlane = Plane<float>;   // invalid samples are non-finite
using LabelPlane = Plane<std::int32_t>;

inline float invalid_value() { return std::numeric_limits<float>::quiet_NaN(); }
inline bool is_valid(float v) { return std::isfinite(v); }

struct RgbImage {
  BytePlane r, g, b;
  Eigen::Index height() const { return r.rows(); }
  Eigen::Index width() const { return r.cols(); }
};

// CIELAB planes: L in [0, 100]; a and b are the signed chroma axes.
struct LabImage {
  Plane<float> L, a, b;
  Eigen::Index height() const { return L.rows(); }
  Eigen::Index width() const { return L.cols(); }
};

struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;   // focal lengths [px]
  double cx = 0.0, cy = 0.0;   // principal point [px]
  double baseline_mm = 0.0;

  // Throws std::invalid_argument unless fx, fy and baseline are positive.
  void validate() const;
};

struct BranchInstance {
  int id = 0;
  double score = 0.0;
  MaskPlane mask;
};

RgbImage make_rgb(Eigen::Index height, Eigen::Index width, std::uint8_t r,
                  std::uint8_t g, std::uint8_t b);

bool is_binary(const MaskPlane& m);

// Plane-kind audit: throws std::logic_error if the plane holds anything
// other than {0, 1}.  Cheap enough to run after every pipeline stage.
void require_binary(const MaskPlane& m, const char* where);

std::int64_t mask_pixel_count(const MaskPlane& m);

// Keeps instances whose score is strictly above the threshold, in input
// order.
std::vector<BranchInstance> gate_by_score(const std::vector<BranchInstance>& in,
                                          double threshold);

// Valid where mask == 1, invalid elsewhere.  Dimensions must match.
RealPlane apply_mask(const RealPlane& map, const MaskPlane& mask);

void require_same_shape(Eigen::Index rows_a, Eigen::Index cols_a,
                        Eigen::Index rows_b, Eigen::Index cols_b,
                        const char* where);

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* where) {
  require_same_shape(a.rows(), a.cols(), b.rows(), b.cols(), where);
}

}  // namespace branchdepth
