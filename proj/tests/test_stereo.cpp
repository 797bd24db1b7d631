#include "branchdepth/stereo.hpp"

#include "doctest.h"
#include "test_support.hpp"

#include <cmath>

using namespace branchdepth;
namespace ts = testsupport;

namespace {
const CameraIntrinsics kCam{1120.0, 1120.0, 320.0, 180.0, 63.0};
}

TEST_SUITE("stereo") {

TEST_CASE("depth is fx * baseline / disparity") {
  // fx * B = 70560 mm*px.
  CHECK(depth_from_disparity(70.56f, kCam) == doctest::Approx(1000.0).epsilon(1e-5));
  CHECK(depth_from_disparity(35.28f, kCam) == doctest::Approx(2000.0).epsilon(1e-5));
  CHECK(depth_from_disparity(70560.0f, kCam) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("nonpositive or non-finite disparity is invalid") {
  CHECK(!is_valid(depth_from_disparity(0.0f, kCam)));
  CHECK(!is_valid(depth_from_disparity(-5.0f, kCam)));
  CHECK(!is_valid(depth_from_disparity(invalid_value(), kCam)));
  CHECK(!is_valid(
      depth_from_disparity(std::numeric_limits<float>::infinity(), kCam)));
}

TEST_CASE("plane conversion equals the scalar conversion pixelwise") {
  RealPlane disp(2, 3);
  disp << 70.56f, 35.28f, 0.0f, -1.0f, invalid_value(), 141.12f;
  RealPlane depth = disparity_to_depth(disp, kCam);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      const float want = depth_from_disparity(disp(i, j), kCam);
      if (is_valid(want))
        CHECK(depth(i, j) == want);
      else
        CHECK(!is_valid(depth(i, j)));
    }
}

TEST_CASE("backprojection geometry at and off the principal point") {
  RealPlane depth = RealPlane::Constant(360, 640, 1000.0f);
  MaskPlane mask = ts::empty_mask(360, 640);
  mask(180, 320) = 1;  // principal point
  mask(180, 432) = 1;  // 112 px right: X = 112 * 1000 / 1120 = 100 mm
  mask(292, 320) = 1;  // 112 px down:  Y = 100 mm
  RgbImage rgb = make_rgb(360, 640, 10, 200, 30);

  PointCloud cloud = backproject(depth, mask, rgb, kCam);
  REQUIRE(cloud.points.size() == 3);

  // Raster order: (180,320), (180,432), (292,320).
  const CloudPoint& p0 = cloud.points[0];
  CHECK(p0.x == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(p0.y == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(p0.z == doctest::Approx(1000.0));
  const CloudPoint& p1 = cloud.points[1];
  CHECK(p1.x == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(p1.y == doctest::Approx(0.0).epsilon(1e-6));
  const CloudPoint& p2 = cloud.points[2];
  CHECK(p2.x == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(p2.y == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(p0.r == 10);
  CHECK(p0.g == 200);
  CHECK(p0.b == 30);
}

TEST_CASE("backprojection skips invalid and unmasked pixels") {
  RealPlane depth(2, 2);
  depth << 1000.0f, invalid_value(), 500.0f, 800.0f;
  MaskPlane mask(2, 2);
  mask << 1, 1, 0, 1;
  RgbImage rgb = make_rgb(2, 2, 1, 2, 3);
  CameraIntrinsics cam{100.0, 100.0, 1.0, 1.0, 50.0};
  PointCloud cloud = backproject(depth, mask, rgb, cam);
  REQUIRE(cloud.points.size() == 2);  // (0,0) and (1,1)
  CHECK(cloud.points[0].z == 1000.0f);
  CHECK(cloud.points[1].z == 800.0f);
}

}  // TEST_SUITE
