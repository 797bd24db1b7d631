#pragma once

#include "branchdepth/raster.hpp"

#include <Eigen/Dense>

namespace branchdepth {

// 8-bit sRGB (D65, 2 degree observer) to CIELAB.
LabImage srgb_to_lab(const RgbImage& rgb);

// Scalar reference for one pixel; the image conversion is defined by it.
Eigen::Vector3d srgb_pixel_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Gaussian color model in Lab.  The stored covariance is already
// regularized (sample covariance + epsilon * I), hence positive definite.
struct ColorModel {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
  double epsilon = 1e-3;
};

// Sample mean and covariance (n - 1 normalization) over region pixels.
// Requires at least 2 region pixels; throws std::invalid_argument below that.
ColorModel fit_color_model(const LabImage& lab, const MaskPlane& region,
                           double epsilon = 1e-3);

double mahalanobis_distance(const Eigen::Vector3d& lab_sample,
                            const ColorModel& model);

// Distance at every region pixel; invalid elsewhere.
RealPlane mahalanobis_map(const LabImage& lab, const ColorModel& model,
                          const MaskPlane& region);

}  // namespace branchdepth
