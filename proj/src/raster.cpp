#include "branchdepth/raster.hpp"

#include <stdexcept>
#include <string>

namespace branchdepth {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw std::invalid_argument("intrinsics: focal lengths must be positive");
  if (!(baseline_mm > 0.0))
    throw std::invalid_argument("intrinsics: baseline must be positive");
}

RgbImage make_rgb(Eigen::Index height, Eigen::Index width, std::uint8_t r,
                  std::uint8_t g, std::uint8_t b) {
  RgbImage img;
  img.r = BytePlane::Constant(height, width, r);
  img.g = BytePlane::Constant(height, width, g);
  img.b = BytePlane::Constant(height, width, b);
  return img;
}

bool is_binary(const MaskPlane& m) {
  return (m <= std::uint8_t{1}).all();
}

void require_binary(const MaskPlane& m, const char* where) {
  if (!is_binary(m))
    throw std::logic_error(std::string(where) + ": plane is not binary");
}

std::int64_t mask_pixel_count(const MaskPlane& m) {
  return static_cast<std::int64_t>((m != std::uint8_t{0}).count());
}

std::vector<BranchInstance> gate_by_score(const std::vector<BranchInstance>& in,
                                          double threshold) {
  std::vector<BranchInstance> kept;
  kept.reserve(in.size());
  for (const auto& inst : in)
    if (inst.score > threshold) kept.push_back(inst);
  return kept;
}

RealPlane apply_mask(const RealPlane& map, const MaskPlane& mask) {
  require_same_shape(map, mask, "apply_mask");
  return (mask == std::uint8_t{1}).select(map, invalid_value());
}

void require_same_shape(Eigen::Index rows_a, Eigen::Index cols_a,
                        Eigen::Index rows_b, Eigen::Index cols_b,
                        const char* where) {
  if (rows_a != rows_b || cols_a != cols_b)
    throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                std::to_string(rows_a) + "x" +
                                std::to_string(cols_a) + " vs " +
                                std::to_string(rows_b) + "x" +
                                std::to_string(cols_b) + ")");
}

}  // namespace branchdepth
