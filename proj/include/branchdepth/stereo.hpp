#pragma once

#include "branchdepth/raster.hpp"

#include <vector>

namespace branchdepth {

struct CloudPoint {
  float x = 0, y = 0, z = 0;  // millimetres, camera frame
  std::uint8_t r = 0, g = 0, b = 0;
};

struct PointCloud {
  std::vector<CloudPoint> points;
};

// Z = fx * baseline / disparity.  Nonpositive or non-finite disparity maps
// to the invalid value.
float depth_from_disparity(float disparity, const CameraIntrinsics& k);
RealPlane disparity_to_depth(const RealPlane& disparity, const CameraIntrinsics& k);

// Pinhole back-projection of valid masked pixels in raster order:
// X = (u - cx) * Z / fx, Y = (v - cy) * Z / fy.
PointCloud backproject(const RealPlane& depth, const MaskPlane& mask,
                       const RgbImage& rgb, const CameraIntrinsics& k);

}  // namespace branchdepth
