#include "branchdepth/stereo.hpp"

#include <cmath>

namespace branchdepth {

float depth_from_disparity(float disparity, const CameraIntrinsics& k) {
  if (!is_valid(disparity) || !(disparity > 0.0f)) return invalid_value();
  return static_cast<float>(k.fx * k.baseline_mm) / disparity;
}

RealPlane disparity_to_depth(const RealPlane& disparity,
                             const CameraIntrinsics& k) {
  k.validate();
  const Eigen::Index h = disparity.rows(), w = disparity.cols();
  RealPlane depth(h, w);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j)
      depth(i, j) = depth_from_disparity(disparity(i, j), k);
  return depth;
}

PointCloud backproject(const RealPlane& depth, const MaskPlane& mask,
                       const RgbImage& rgb, const CameraIntrinsics& k) {
  k.validate();
  require_binary(mask, "backproject");
  require_same_shape(depth, mask, "backproject");
  require_same_shape(rgb.r, mask, "backproject");

  PointCloud cloud;
  const Eigen::Index h = depth.rows(), w = depth.cols();
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j) {
      if (!mask(i, j)) continue;
      float z = depth(i, j);
      if (!is_valid(z)) continue;
      CloudPoint p;
      p.z = z;
      p.x = static_cast<float>((double(j) - k.cx) * z / k.fx);
      p.y = static_cast<float>((double(i) - k.cy) * z / k.fy);
      p.r = rgb.r(i, j);
      p.g = rgb.g(i, j);
      p.b = rgb.b(i, j);
      cloud.points.push_back(p);
    }
  return cloud;
}

}  // namespace branchdepth
