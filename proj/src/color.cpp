#include "branchdepth/color.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace branchdepth {

namespace {

double linearize(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  constexpr double d3 = delta * delta * delta;
  if (t > d3) return std::cbrt(t);
  return t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

Eigen::Vector3d srgb_pixel_to_lab(std::uint8_t r, std::uint8_t g,
                                  std::uint8_t b) {
  const double rl = linearize(r / 255.0);
  const double gl = linearize(g / 255.0);
  const double bl = linearize(b / 255.0);

  // D65 reference white; Y is already normalized (Yn == 1).
  const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;

  const double fx = lab_f(x / 0.95047);
  const double fy = lab_f(y);
  const double fz = lab_f(z / 1.08883);

  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

LabImage srgb_to_lab(const RgbImage& rgb) {
  require_same_shape(rgb.r, rgb.g, "srgb_to_lab");
  require_same_shape(rgb.r, rgb.b, "srgb_to_lab");
  const Eigen::Index h = rgb.height(), w = rgb.width();
  LabImage lab;
  lab.L.resize(h, w);
  lab.a.resize(h, w);
  lab.b.resize(h, w);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j) {
      Eigen::Vector3d v = srgb_pixel_to_lab(rgb.r(i, j), rgb.g(i, j), rgb.b(i, j));
      lab.L(i, j) = static_cast<float>(v.x());
      lab.a(i, j) = static_cast<float>(v.y());
      lab.b(i, j) = static_cast<float>(v.z());
    }
  return lab;
}

ColorModel fit_color_model(const LabImage& lab, const MaskPlane& region,
                           double epsilon) {
  require_binary(region, "fit_color_model");
  require_same_shape(lab.L, region, "fit_color_model");

  const Eigen::Index h = region.rows(), w = region.cols();
  std::int64_t n = 0;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j)
      if (region(i, j)) {
        sum += Eigen::Vector3d(lab.L(i, j), lab.a(i, j), lab.b(i, j));
        ++n;
      }
  if (n < 2)
    throw std::invalid_argument("fit_color_model: need at least 2 pixels");

  ColorModel model;
  model.epsilon = epsilon;
  model.mean = sum / static_cast<double>(n);

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j)
      if (region(i, j)) {
        Eigen::Vector3d d =
            Eigen::Vector3d(lab.L(i, j), lab.a(i, j), lab.b(i, j)) - model.mean;
        scatter += d * d.transpose();
      }
  // Sample covariance, regularized so the inverse always exists.
  model.covariance = scatter / static_cast<double>(n - 1) +
                     epsilon * Eigen::Matrix3d::Identity();
  return model;
}

double mahalanobis_distance(const Eigen::Vector3d& lab_sample,
                            const ColorModel& model) {
  Eigen::LLT<Eigen::Matrix3d> llt(model.covariance);
  Eigen::Vector3d d = lab_sample - model.mean;
  double q = d.dot(llt.solve(d));
  return std::sqrt(std::max(q, 0.0));
}

RealPlane mahalanobis_map(const LabImage& lab, const ColorModel& model,
                          const MaskPlane& region) {
  require_binary(region, "mahalanobis_map");
  require_same_shape(lab.L, region, "mahalanobis_map");

  Eigen::LLT<Eigen::Matrix3d> llt(model.covariance);
  const Eigen::Index h = region.rows(), w = region.cols();
  RealPlane out = RealPlane::Constant(h, w, invalid_value());
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j) {
      if (!region(i, j)) continue;
      Eigen::Vector3d d =
          Eigen::Vector3d(lab.L(i, j), lab.a(i, j), lab.b(i, j)) - model.mean;
      double q = d.dot(llt.solve(d));
      out(i, j) = static_cast<float>(std::sqrt(std::max(q, 0.0)));
    }
  return out;
}

}  // namespace branchdepth
