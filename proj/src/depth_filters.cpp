#include "branchdepth/depth_filters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "branchdepth/color.hpp"

namespace branchdepth {

namespace {

void require_odd_window(int window, const char* where) {
  if (window < 3 || window % 2 == 0)
    throw std::invalid_argument(std::string(where) + ": window must be odd and >= 3");
}

std::vector<float> collect_valid(const RealPlane& depth, const MaskPlane& mask) {
  std::vector<float> v;
  v.reserve(static_cast<std::size_t>(mask_pixel_count(mask)));
  for (Eigen::Index i = 0; i < depth.rows(); ++i)
    for (Eigen::Index j = 0; j < depth.cols(); ++j)
      if (mask(i, j) && is_valid(depth(i, j))) v.push_back(depth(i, j));
  return v;
}

// v is reordered.
double median_inplace(std::vector<float>& v) {
  const std::size_t n = v.size();
  auto mid = v.begin() + n / 2;
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  double hi = *mid;
  double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

// Linear interpolation on the sorted sample at rank (n-1)*q.
double quantile_sorted(const std::vector<float>& sorted, double q) {
  const std::size_t n = sorted.size();
  double h = (static_cast<double>(n) - 1.0) * q;
  std::size_t lo = static_cast<std::size_t>(h);
  double frac = h - static_cast<double>(lo);
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + frac * (double(sorted[lo + 1]) - double(sorted[lo]));
}

struct MaskedStats {
  std::int64_t n = 0;
  double sigma = 0.0;  // sample standard deviation, 0 when n < 2
  double range = 0.0;
};

MaskedStats masked_stats(const RealPlane& depth, const MaskPlane& mask) {
  MaskedStats s;
  double sum = 0.0;
  double vmin = 0.0, vmax = 0.0;
  for (Eigen::Index i = 0; i < depth.rows(); ++i)
    for (Eigen::Index j = 0; j < depth.cols(); ++j) {
      float z = depth(i, j);
      if (!mask(i, j) || !is_valid(z)) continue;
      if (s.n == 0) {
        vmin = vmax = z;
      } else {
        vmin = std::min(vmin, double(z));
        vmax = std::max(vmax, double(z));
      }
      sum += z;
      ++s.n;
    }
  if (s.n == 0) return s;
  s.range = vmax - vmin;
  if (s.n < 2) return s;
  const double mean = sum / double(s.n);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < depth.rows(); ++i)
    for (Eigen::Index j = 0; j < depth.cols(); ++j) {
      float z = depth(i, j);
      if (!mask(i, j) || !is_valid(z)) continue;
      double d = z - mean;
      ss += d * d;
    }
  s.sigma = std::sqrt(ss / double(s.n - 1));
  return s;
}

FilterResult finalize(const char* stage, const RealPlane& before,
                      RealPlane after, const MaskPlane& mask, int rounds,
                      bool guard) {
  FilterResult r;
  r.report.stage = stage;
  r.report.rounds_run = rounds;
  r.report.guard_triggered = guard;
  MaskedStats sb = masked_stats(before, mask);
  MaskedStats sa = masked_stats(after, mask);
  r.report.sigma_before = sb.sigma;
  r.report.sigma_after = sa.sigma;
  r.report.range_before = sb.range;
  r.report.range_after = sa.range;
  std::int64_t modified = 0;
  for (Eigen::Index i = 0; i < before.rows(); ++i)
    for (Eigen::Index j = 0; j < before.cols(); ++j) {
      if (!mask(i, j)) continue;
      float a = before(i, j), b = after(i, j);
      bool va = is_valid(a), vb = is_valid(b);
      if (va != vb || (va && a != b)) ++modified;
    }
  r.report.pixels_modified = modified;
  r.depth = std::move(after);
  return r;
}

// Valid window values (center included) around (ci, cj), window clipped at
// the borders.
void window_values(const RealPlane& depth, const MaskPlane& mask, int ci,
                   int cj, int r, std::vector<float>& out) {
  out.clear();
  const int h = static_cast<int>(depth.rows());
  const int w = static_cast<int>(depth.cols());
  const int i0 = std::max(0, ci - r), i1 = std::min(h - 1, ci + r);
  const int j0 = std::max(0, cj - r), j1 = std::min(w - 1, cj + r);
  for (int i = i0; i <= i1; ++i)
    for (int j = j0; j <= j1; ++j)
      if (mask(i, j) && is_valid(depth(i, j))) out.push_back(depth(i, j));
}

}  // namespace

FilterResult iqr_filter(const RealPlane& depth, const MaskPlane& mask,
                        double alpha, int max_rounds) {
  require_binary(mask, "iqr_filter");
  require_same_shape(depth, mask, "iqr_filter");
  RealPlane work = depth;

  std::vector<float> values = collect_valid(work, mask);
  if (values.size() < 4)
    return finalize("iqr", depth, std::move(work), mask, 0, true);

  int rounds = 0;
  for (int t = 0; t < max_rounds; ++t) {
    values = collect_valid(work, mask);
    std::sort(values.begin(), values.end());
    const double q1 = quantile_sorted(values, 0.25);
    const double q3 = quantile_sorted(values, 0.75);
    const double iqr = q3 - q1;
    const double lo = q1 - alpha * iqr;
    const double hi = q3 + alpha * iqr;
    const float med = static_cast<float>(quantile_sorted(values, 0.5));
    ++rounds;
    std::int64_t flagged = 0;
    for (Eigen::Index i = 0; i < work.rows(); ++i)
      for (Eigen::Index j = 0; j < work.cols(); ++j) {
        float z = work(i, j);
        if (!mask(i, j) || !is_valid(z)) continue;
        if (z < lo || z > hi) {
          work(i, j) = med;
          ++flagged;
        }
      }
    if (flagged == 0) break;
  }
  return finalize("iqr", depth, std::move(work), mask, rounds, false);
}

FilterResult zscore_filter(const RealPlane& depth, const MaskPlane& mask,
                           double threshold) {
  require_binary(mask, "zscore_filter");
  require_same_shape(depth, mask, "zscore_filter");
  RealPlane work = depth;

  std::vector<float> values = collect_valid(work, mask);
  if (values.size() < 2)
    return finalize("zscore", depth, std::move(work), mask, 0, true);

  double sum = 0.0;
  for (float v : values) sum += v;
  const double mean = sum / double(values.size());
  double ss = 0.0;
  for (float v : values) {
    double d = v - mean;
    ss += d * d;
  }
  const double sigma = std::sqrt(ss / double(values.size() - 1));
  if (sigma == 0.0)
    return finalize("zscore", depth, std::move(work), mask, 0, true);

  const float med = static_cast<float>(median_inplace(values));
  for (Eigen::Index i = 0; i < work.rows(); ++i)
    for (Eigen::Index j = 0; j < work.cols(); ++j) {
      float z = work(i, j);
      if (!mask(i, j) || !is_valid(z)) continue;
      if (std::abs(z - mean) / sigma > threshold) work(i, j) = med;
    }
  return finalize("zscore", depth, std::move(work), mask, 1, false);
}

FilterResult local_spatial_filter(const RealPlane& depth, const MaskPlane& mask,
                                  int window, double beta, SigmaCenter center) {
  require_binary(mask, "local_spatial_filter");
  require_same_shape(depth, mask, "local_spatial_filter");
  require_odd_window(window, "local_spatial_filter");
  const int r = window / 2;
  RealPlane out = depth;

  std::vector<float> vals;
  for (Eigen::Index i = 0; i < depth.rows(); ++i)
    for (Eigen::Index j = 0; j < depth.cols(); ++j) {
      float z = depth(i, j);
      if (!mask(i, j) || !is_valid(z)) continue;
      window_values(depth, mask, int(i), int(j), r, vals);
      if (vals.size() < 4) continue;  // fewer than 3 valid window-mates
      double sum = 0.0, sumsq = 0.0;
      for (float v : vals) {
        sum += v;
        sumsq += double(v) * v;
      }
      const double n = double(vals.size());
      const double med = median_inplace(vals);
      double var;
      if (center == SigmaCenter::Mean) {
        const double mu = sum / n;
        var = sumsq / n - mu * mu;
      } else {
        var = sumsq / n - 2.0 * med * (sum / n) + med * med;
      }
      const double sigma = std::sqrt(std::max(var, 0.0));
      if (std::abs(z - med) > beta * sigma) out(i, j) = static_cast<float>(med);
    }
  return finalize("local_spatial", depth, std::move(out), mask, 1, false);
}

FilterResult masked_median_filter(const RealPlane& depth, const MaskPlane& mask,
                                  int window) {
  require_binary(mask, "masked_median_filter");
  require_same_shape(depth, mask, "masked_median_filter");
  require_odd_window(window, "masked_median_filter");
  const int r = window / 2;
  RealPlane out = depth;

  std::vector<float> vals;
  for (Eigen::Index i = 0; i < depth.rows(); ++i)
    for (Eigen::Index j = 0; j < depth.cols(); ++j) {
      if (!mask(i, j) || !is_valid(depth(i, j))) continue;
      window_values(depth, mask, int(i), int(j), r, vals);
      out(i, j) = static_cast<float>(median_inplace(vals));
    }
  return finalize("masked_median", depth, std::move(out), mask, 1, false);
}

FilterResult mad_global_filter(const RealPlane& depth, const MaskPlane& mask,
                               double threshold, int max_rounds) {
  require_binary(mask, "mad_global_filter");
  require_same_shape(depth, mask, "mad_global_filter");
  RealPlane work = depth;

  std::vector<float> values = collect_valid(work, mask);
  if (values.size() < 2)
    return finalize("mad_global", depth, std::move(work), mask, 0, true);

  int rounds = 0;
  bool guard = false;
  std::vector<float> devs;
  for (int t = 0; t < max_rounds; ++t) {
    values = collect_valid(work, mask);
    const double med = median_inplace(values);
    devs.clear();
    devs.reserve(values.size());
    for (float v : values) devs.push_back(std::abs(float(v - med)));
    const double mad = median_inplace(devs);
    ++rounds;
    if (mad == 0.0) {
      guard = true;
      break;
    }
    const float medf = static_cast<float>(med);
    std::int64_t flagged = 0;
    for (Eigen::Index i = 0; i < work.rows(); ++i)
      for (Eigen::Index j = 0; j < work.cols(); ++j) {
        float z = work(i, j);
        if (!mask(i, j) || !is_valid(z)) continue;
        if (0.6745 * std::abs(z - med) / mad > threshold) {
          work(i, j) = medf;
          ++flagged;
        }
      }
    if (flagged == 0) break;
  }
  return finalize("mad_global", depth, std::move(work), mask, rounds, guard);
}

FilterResult spatial_density_consensus(const RealPlane& depth,
                                       const MaskPlane& mask, int window,
                                       double gamma, double rho_min) {
  require_binary(mask, "spatial_density_consensus");
  require_same_shape(depth, mask, "spatial_density_consensus");
  require_odd_window(window, "spatial_density_consensus");
  const int r = window / 2;
  const int h = static_cast<int>(depth.rows());
  const int w = static_cast<int>(depth.cols());

  // Pass 1: per-pixel local median and consistency.  Pixels that cannot be
  // assessed (invalid, or < 3 valid window-mates) count as consistent.
  Plane<std::uint8_t> consistent = Plane<std::uint8_t>::Constant(h, w, 1);
  Plane<std::uint8_t> evaluable = Plane<std::uint8_t>::Zero(h, w);
  RealPlane local_med = RealPlane::Zero(h, w);

  std::vector<float> vals, devs;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      float z = depth(i, j);
      if (!mask(i, j) || !is_valid(z)) continue;
      window_values(depth, mask, i, j, r, vals);
      if (vals.size() < 4) continue;
      const double med = median_inplace(vals);
      devs.clear();
      devs.reserve(vals.size());
      for (float v : vals) devs.push_back(std::abs(float(v - med)));
      const double sigma_hat = 1.4826 * median_inplace(devs);
      evaluable(i, j) = 1;
      local_med(i, j) = static_cast<float>(med);
      if (std::abs(z - med) > gamma * sigma_hat) consistent(i, j) = 0;
    }

  // Pass 2: replace inconsistent pixels whose valid neighbors (self
  // excluded) reach the consensus ratio.
  RealPlane out = depth;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (!evaluable(i, j) || consistent(i, j)) continue;
      const int i0 = std::max(0, i - r), i1 = std::min(h - 1, i + r);
      const int j0 = std::max(0, j - r), j1 = std::min(w - 1, j + r);
      std::int64_t total = 0, agree = 0;
      for (int y = i0; y <= i1; ++y)
        for (int x = j0; x <= j1; ++x) {
          if (y == i && x == j) continue;
          if (!mask(y, x) || !is_valid(depth(y, x))) continue;
          ++total;
          if (consistent(y, x)) ++agree;
        }
      if (total == 0) continue;
      const double rho = double(agree) / double(total);
      if (rho >= rho_min) out(i, j) = local_med(i, j);
    }
  return finalize("spatial_density_consensus", depth, std::move(out), mask, 1,
                  false);
}

FilterResult local_mad_filter(const RealPlane& depth, const MaskPlane& mask,
                              int window, double threshold) {
  require_binary(mask, "local_mad_filter");
  require_same_shape(depth, mask, "local_mad_filter");
  require_odd_window(window, "local_mad_filter");
  const int r = window / 2;
  RealPlane out = depth;

  std::vector<float> vals, devs;
  for (Eigen::Index i = 0; i < depth.rows(); ++i)
    for (Eigen::Index j = 0; j < depth.cols(); ++j) {
      float z = depth(i, j);
      if (!mask(i, j) || !is_valid(z)) continue;
      window_values(depth, mask, int(i), int(j), r, vals);
      if (vals.size() < 4) continue;
      const double med = median_inplace(vals);
      devs.clear();
      devs.reserve(vals.size());
      for (float v : vals) devs.push_back(std::abs(float(v - med)));
      const double mad = median_inplace(devs);
      if (mad == 0.0) continue;  // degenerate local scale
      if (std::abs(z - med) > threshold * 1.4826 * mad)
        out(i, j) = static_cast<float>(med);
    }
  return finalize("local_mad", depth, std::move(out), mask, 1, false);
}

RealPlane build_guidance(const RgbImage& rgb, const V6Params& p) {
  LabImage lab = srgb_to_lab(rgb);
  const Eigen::Index h = rgb.height(), w = rgb.width();
  RealPlane g(h, w);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j) {
      const double gray =
          (0.299 * rgb.r(i, j) + 0.587 * rgb.g(i, j) + 0.114 * rgb.b(i, j)) /
          255.0;
      const double l = lab.L(i, j) / 100.0;
      const double a = (lab.a(i, j) + 128.0) / 255.0;
      const double b = (lab.b(i, j) + 128.0) / 255.0;
      g(i, j) = static_cast<float>(p.guidance_weight_gray * gray +
                                   p.guidance_weight_l * l +
                                   p.guidance_weight_a * a +
                                   p.guidance_weight_b * b);
    }
  return g;
}

namespace {

// (h+1) x (w+1) summed-area table; box(i0..i1, j0..j1) in O(1).
class Sat {
 public:
  Sat(Eigen::Index h, Eigen::Index w) : t_(Plane<double>::Zero(h + 1, w + 1)) {}

  template <typename Fn>
  void build(Eigen::Index h, Eigen::Index w, Fn value) {
    for (Eigen::Index i = 0; i < h; ++i)
      for (Eigen::Index j = 0; j < w; ++j)
        t_(i + 1, j + 1) =
            value(i, j) + t_(i, j + 1) + t_(i + 1, j) - t_(i, j);
  }

  double box(int i0, int i1, int j0, int j1) const {
    return t_(i1 + 1, j1 + 1) - t_(i0, j1 + 1) - t_(i1 + 1, j0) + t_(i0, j0);
  }

 private:
  Plane<double> t_;
};

}  // namespace

FilterResult guided_filter(const RealPlane& depth, const RealPlane& guidance,
                           const MaskPlane& mask, int radius, double eps) {
  require_binary(mask, "guided_filter");
  require_same_shape(depth, mask, "guided_filter");
  require_same_shape(depth, guidance, "guided_filter");
  if (radius < 1) throw std::invalid_argument("guided_filter: radius must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("guided_filter: eps must be > 0");

  const int h = static_cast<int>(depth.rows());
  const int w = static_cast<int>(depth.cols());

  auto valid_at = [&](Eigen::Index i, Eigen::Index j) {
    return mask(i, j) && is_valid(depth(i, j));
  };

  Sat sv(h, w), si(h, w), sp(h, w), sip(h, w), sii(h, w);
  sv.build(h, w, [&](Eigen::Index i, Eigen::Index j) {
    return valid_at(i, j) ? 1.0 : 0.0;
  });
  si.build(h, w, [&](Eigen::Index i, Eigen::Index j) {
    return valid_at(i, j) ? double(guidance(i, j)) : 0.0;
  });
  sp.build(h, w, [&](Eigen::Index i, Eigen::Index j) {
    return valid_at(i, j) ? double(depth(i, j)) : 0.0;
  });
  sip.build(h, w, [&](Eigen::Index i, Eigen::Index j) {
    return valid_at(i, j) ? double(guidance(i, j)) * depth(i, j) : 0.0;
  });
  sii.build(h, w, [&](Eigen::Index i, Eigen::Index j) {
    return valid_at(i, j) ? double(guidance(i, j)) * guidance(i, j) : 0.0;
  });

  // Window coefficients at valid centers only; every valid pixel sees at
  // least one valid center (itself).
  Plane<double> ca = Plane<double>::Zero(h, w);
  Plane<double> cb = Plane<double>::Zero(h, w);
  auto clip_box = [&](int i, int j, int& i0, int& i1, int& j0, int& j1) {
    i0 = std::max(0, i - radius);
    i1 = std::min(h - 1, i + radius);
    j0 = std::max(0, j - radius);
    j1 = std::min(w - 1, j + radius);
  };
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (!valid_at(i, j)) continue;
      int i0, i1, j0, j1;
      clip_box(i, j, i0, i1, j0, j1);
      const double n = sv.box(i0, i1, j0, j1);
      const double mi = si.box(i0, i1, j0, j1) / n;
      const double mp = sp.box(i0, i1, j0, j1) / n;
      const double cov = sip.box(i0, i1, j0, j1) / n - mi * mp;
      const double var = sii.box(i0, i1, j0, j1) / n - mi * mi;
      const double a = cov / (var + eps);
      ca(i, j) = a;
      cb(i, j) = mp - a * mi;
    }

  Sat sa(h, w), sb(h, w);
  sa.build(h, w, [&](Eigen::Index i, Eigen::Index j) { return ca(i, j); });
  sb.build(h, w, [&](Eigen::Index i, Eigen::Index j) { return cb(i, j); });

  RealPlane out = depth;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (!valid_at(i, j)) continue;
      int i0, i1, j0, j1;
      clip_box(i, j, i0, i1, j0, j1);
      const double n = sv.box(i0, i1, j0, j1);
      const double abar = sa.box(i0, i1, j0, j1) / n;
      const double bbar = sb.box(i0, i1, j0, j1) / n;
      out(i, j) = static_cast<float>(abar * guidance(i, j) + bbar);
    }
  return finalize("guided_filter", depth, std::move(out), mask, 1, false);
}

FilterResult adaptive_bilateral(const RealPlane& depth, const MaskPlane& mask,
                                double sigma_s, double alpha,
                                double branch_mad) {
  require_binary(mask, "adaptive_bilateral");
  require_same_shape(depth, mask, "adaptive_bilateral");
  if (!(sigma_s > 0.0))
    throw std::invalid_argument("adaptive_bilateral: sigma_s must be > 0");
  if (branch_mad < 0.0)
    throw std::invalid_argument("adaptive_bilateral: branch_mad must be >= 0");

  RealPlane out = depth;
  if (branch_mad == 0.0)
    return finalize("adaptive_bilateral", depth, std::move(out), mask, 0, true);

  const double sigma_d = alpha * 1.4826 * branch_mad;
  const int rad = static_cast<int>(std::ceil(2.0 * sigma_s));
  const double inv2ss = 1.0 / (2.0 * sigma_s * sigma_s);
  const double inv2sd = 1.0 / (2.0 * sigma_d * sigma_d);

  // Square kernel of half-size rad; spatial weights precomputed.
  const int side = 2 * rad + 1;
  std::vector<double> ws(static_cast<std::size_t>(side) * side);
  for (int dy = -rad; dy <= rad; ++dy)
    for (int dx = -rad; dx <= rad; ++dx)
      ws[static_cast<std::size_t>(dy + rad) * side + (dx + rad)] =
          std::exp(-(double(dy) * dy + double(dx) * dx) * inv2ss);

  const int h = static_cast<int>(depth.rows());
  const int w = static_cast<int>(depth.cols());
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      float zc = depth(i, j);
      if (!mask(i, j) || !is_valid(zc)) continue;
      const int i0 = std::max(0, i - rad), i1 = std::min(h - 1, i + rad);
      const int j0 = std::max(0, j - rad), j1 = std::min(w - 1, j + rad);
      double num = 0.0, den = 0.0;
      for (int y = i0; y <= i1; ++y) {
        const std::size_t row = static_cast<std::size_t>(y - i + rad) * side;
        for (int x = j0; x <= j1; ++x) {
          float z = depth(y, x);
          if (!mask(y, x) || !is_valid(z)) continue;
          const double dz = double(z) - zc;
          const double wgt = ws[row + (x - j + rad)] * std::exp(-dz * dz * inv2sd);
          num += wgt * z;
          den += wgt;
        }
      }
      out(i, j) = static_cast<float>(num / den);
    }
  return finalize("adaptive_bilateral", depth, std::move(out), mask, 1, false);
}

double masked_mad(const RealPlane& depth, const MaskPlane& mask) {
  std::vector<float> values = collect_valid(depth, mask);
  if (values.empty()) return 0.0;
  const double med = median_inplace(values);
  std::vector<float> devs;
  devs.reserve(values.size());
  for (float v : values) devs.push_back(std::abs(float(v - med)));
  return median_inplace(devs);
}

OptimizeResult optimize_v5(const RealPlane& depth, const MaskPlane& mask,
                           const V5Params& p) {
  OptimizeResult r;
  FilterResult f = iqr_filter(depth, mask, p.iqr_alpha, p.iqr_max_rounds);
  r.stages.push_back(f.report);
  f = zscore_filter(f.depth, mask, p.zscore_threshold);
  r.stages.push_back(f.report);
  f = local_spatial_filter(f.depth, mask, p.local_window, p.local_beta,
                           p.local_sigma_center);
  r.stages.push_back(f.report);
  f = masked_median_filter(f.depth, mask, p.median_window);
  r.stages.push_back(f.report);
  r.depth = std::move(f.depth);
  return r;
}

OptimizeResult optimize_v6(const RealPlane& depth, const MaskPlane& mask,
                           const RealPlane& guidance, const V6Params& p) {
  OptimizeResult r;
  FilterResult f = mad_global_filter(depth, mask, p.mad_threshold, p.mad_max_rounds);
  r.stages.push_back(f.report);
  f = spatial_density_consensus(f.depth, mask, p.consensus_window,
                                p.consensus_gamma, p.consensus_rho_min);
  r.stages.push_back(f.report);
  f = local_mad_filter(f.depth, mask, p.local_mad_window, p.local_mad_threshold);
  r.stages.push_back(f.report);
  const double branch_mad = masked_mad(f.depth, mask);
  f = guided_filter(f.depth, guidance, mask, p.guided_radius, p.guided_eps);
  r.stages.push_back(f.report);
  f = adaptive_bilateral(f.depth, mask, p.bilateral_sigma_s, p.bilateral_alpha,
                         branch_mad);
  r.stages.push_back(f.report);
  r.depth = std::move(f.depth);
  return r;
}

OptimizeResult optimize_v6(const RealPlane& depth, const MaskPlane& mask,
                           const RgbImage& rgb, const V6Params& p) {
  return optimize_v6(depth, mask, build_guidance(rgb, p), p);
}

}  // namespace branchdepth
