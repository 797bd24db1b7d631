#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>

namespace testsupport {

using branchdepth::is_valid;

MaskPlane full_mask(int h, int w) { return MaskPlane::Constant(h, w, 1); }

MaskPlane empty_mask(int h, int w) { return MaskPlane::Zero(h, w); }

MaskPlane rect_mask(int h, int w, int y, int x, int rh, int rw) {
  MaskPlane m = MaskPlane::Zero(h, w);
  for (int i = y; i < y + rh; ++i)
    for (int j = x; j < x + rw; ++j) m(i, j) = 1;
  return m;
}

MaskPlane random_mask(branchdepth::CounterRng& rng, int h, int w,
                      double density) {
  MaskPlane m(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) m(i, j) = rng.next_double() < density ? 1 : 0;
  return m;
}

Plane<double> brute_sqdt(const MaskPlane& m) {
  const int h = static_cast<int>(m.rows());
  const int w = static_cast<int>(m.cols());
  Plane<double> d(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (!m(i, j)) {
        d(i, j) = 0.0;
        continue;
      }
      double best = std::min(std::min(double(i + 1) * (i + 1),
                                      double(h - i) * (h - i)),
                             std::min(double(j + 1) * (j + 1),
                                      double(w - j) * (w - j)));
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          if (m(y, x)) continue;
          const double dy = y - i, dx = x - j;
          best = std::min(best, dy * dy + dx * dx);
        }
      d(i, j) = best;
    }
  return d;
}

MaskPlane brute_erode(const MaskPlane& m, int r) {
  const int h = static_cast<int>(m.rows());
  const int w = static_cast<int>(m.cols());
  MaskPlane out = MaskPlane::Zero(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (!m(i, j)) continue;
      bool fits = true;
      for (int dy = -r; dy <= r && fits; ++dy)
        for (int dx = -r; dx <= r && fits; ++dx) {
          if (dy * dy + dx * dx > r * r) continue;
          const int y = i + dy, x = j + dx;
          if (y < 0 || y >= h || x < 0 || x >= w || !m(y, x)) fits = false;
        }
      out(i, j) = fits ? 1 : 0;
    }
  return out;
}

MaskPlane brute_dilate(const MaskPlane& m, int r) {
  const int h = static_cast<int>(m.rows());
  const int w = static_cast<int>(m.cols());
  MaskPlane out = MaskPlane::Zero(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      bool hit = false;
      for (int dy = -r; dy <= r && !hit; ++dy)
        for (int dx = -r; dx <= r && !hit; ++dx) {
          if (dy * dy + dx * dx > r * r) continue;
          const int y = i + dy, x = j + dx;
          if (y >= 0 && y < h && x >= 0 && x < w && m(y, x)) hit = true;
        }
      out(i, j) = hit ? 1 : 0;
    }
  return out;
}

namespace {

int flood_count(const MaskPlane& grid, std::uint8_t value, bool eight) {
  const int h = static_cast<int>(grid.rows());
  const int w = static_cast<int>(grid.cols());
  Plane<std::uint8_t> seen = Plane<std::uint8_t>::Zero(h, w);
  int components = 0;
  std::deque<std::pair<int, int>> queue;
  for (int si = 0; si < h; ++si)
    for (int sj = 0; sj < w; ++sj) {
      if (grid(si, sj) != value || seen(si, sj)) continue;
      ++components;
      seen(si, sj) = 1;
      queue.push_back({si, sj});
      while (!queue.empty()) {
        auto [i, j] = queue.front();
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            if (!eight && dy != 0 && dx != 0) continue;
            const int y = i + dy, x = j + dx;
            if (y < 0 || y >= h || x < 0 || x >= w) continue;
            if (grid(y, x) != value || seen(y, x)) continue;
            seen(y, x) = 1;
            queue.push_back({y, x});
          }
      }
    }
  return components;
}

}  // namespace

int component_count8(const MaskPlane& m) { return flood_count(m, 1, true); }

int background_components4(const MaskPlane& m) {
  return flood_count(m, 0, false);
}

bool is_subset(const MaskPlane& inner, const MaskPlane& outer) {
  for (Eigen::Index i = 0; i < inner.rows(); ++i)
    for (Eigen::Index j = 0; j < inner.cols(); ++j)
      if (inner(i, j) && !outer(i, j)) return false;
  return true;
}

bool masks_equal(const MaskPlane& a, const MaskPlane& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a == b).all();
}

double ref_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

double ref_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Eigen::Vector3d ref_srgb_to_lab(std::uint8_t r8, std::uint8_t g8,
                                std::uint8_t b8) {
  auto lin = [](double c) {
    c /= 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  const double r = lin(r8), g = lin(g8), b = lin(b8);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double d = 6.0 / 29.0;
  auto f = [d](double t) {
    return t > d * d * d ? std::pow(t, 1.0 / 3.0)
                         : t / (3.0 * d * d) + 4.0 / 29.0;
  };
  const double fx = f(x / 0.95047), fy = f(y), fz = f(z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

namespace {

std::vector<double> valid_values(const RealPlane& z, const MaskPlane& m) {
  std::vector<double> v;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      if (m(i, j) && is_valid(z(i, j))) v.push_back(z(i, j));
  return v;
}

// Median over float samples matching the library convention: the sample
// values are floats, midpoints average in double.
double float_median(std::vector<float> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (double(v[n / 2 - 1]) + double(v[n / 2]));
}

std::vector<float> window_floats(const RealPlane& z, const MaskPlane& m, int ci,
                                 int cj, int r) {
  std::vector<float> v;
  const int h = static_cast<int>(z.rows());
  const int w = static_cast<int>(z.cols());
  for (int i = std::max(0, ci - r); i <= std::min(h - 1, ci + r); ++i)
    for (int j = std::max(0, cj - r); j <= std::min(w - 1, cj + r); ++j)
      if (m(i, j) && is_valid(z(i, j))) v.push_back(z(i, j));
  return v;
}

double float_mad(const std::vector<float>& v, double med) {
  std::vector<float> devs;
  devs.reserve(v.size());
  for (float x : v) devs.push_back(std::abs(float(x - med)));
  return float_median(std::move(devs));
}

}  // namespace

RealPlane ref_iqr(const RealPlane& z, const MaskPlane& m, double alpha,
                  int max_rounds) {
  RealPlane work = z;
  if (valid_values(work, m).size() < 4) return work;
  for (int t = 0; t < max_rounds; ++t) {
    std::vector<double> v = valid_values(work, m);
    const double q1 = ref_quantile(v, 0.25);
    const double q3 = ref_quantile(v, 0.75);
    const double lo = q1 - alpha * (q3 - q1);
    const double hi = q3 + alpha * (q3 - q1);
    const float med = static_cast<float>(ref_quantile(v, 0.5));
    std::int64_t flagged = 0;
    for (Eigen::Index i = 0; i < work.rows(); ++i)
      for (Eigen::Index j = 0; j < work.cols(); ++j) {
        const float x = work(i, j);
        if (!m(i, j) || !is_valid(x)) continue;
        if (x < lo || x > hi) {
          work(i, j) = med;
          ++flagged;
        }
      }
    if (flagged == 0) break;
  }
  return work;
}

RealPlane ref_zscore(const RealPlane& z, const MaskPlane& m, double threshold) {
  RealPlane work = z;
  std::vector<double> v = valid_values(work, m);
  if (v.size() < 2) return work;
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / double(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sigma = std::sqrt(ss / double(v.size() - 1));
  if (sigma == 0.0) return work;
  std::vector<float> vf(v.begin(), v.end());
  const float med = static_cast<float>(float_median(std::move(vf)));
  for (Eigen::Index i = 0; i < work.rows(); ++i)
    for (Eigen::Index j = 0; j < work.cols(); ++j) {
      const float x = work(i, j);
      if (!m(i, j) || !is_valid(x)) continue;
      if (std::abs(x - mean) / sigma > threshold) work(i, j) = med;
    }
  return work;
}

RealPlane ref_local_spatial(const RealPlane& z, const MaskPlane& m, int window,
                            double beta, bool sigma_about_median) {
  RealPlane out = z;
  const int r = window / 2;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const float x = z(i, j);
      if (!m(i, j) || !is_valid(x)) continue;
      std::vector<float> v = window_floats(z, m, int(i), int(j), r);
      if (v.size() < 4) continue;
      double sum = 0.0, sumsq = 0.0;
      for (float y : v) {
        sum += y;
        sumsq += double(y) * y;
      }
      const double n = double(v.size());
      const double med = float_median(v);
      double var;
      if (sigma_about_median)
        var = sumsq / n - 2.0 * med * (sum / n) + med * med;
      else
        var = sumsq / n - (sum / n) * (sum / n);
      const double sigma = std::sqrt(std::max(var, 0.0));
      if (std::abs(x - med) > beta * sigma) out(i, j) = float(med);
    }
  return out;
}

RealPlane ref_masked_median(const RealPlane& z, const MaskPlane& m,
                            int window) {
  RealPlane out = z;
  const int r = window / 2;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      if (!m(i, j) || !is_valid(z(i, j))) continue;
      out(i, j) = float(float_median(window_floats(z, m, int(i), int(j), r)));
    }
  return out;
}

RealPlane ref_mad_global(const RealPlane& z, const MaskPlane& m,
                         double threshold, int max_rounds) {
  RealPlane work = z;
  if (valid_values(work, m).size() < 2) return work;
  for (int t = 0; t < max_rounds; ++t) {
    std::vector<double> vd = valid_values(work, m);
    std::vector<float> v(vd.begin(), vd.end());
    const double med = float_median(v);
    const double mad = float_mad(v, med);
    if (mad == 0.0) break;
    std::int64_t flagged = 0;
    for (Eigen::Index i = 0; i < work.rows(); ++i)
      for (Eigen::Index j = 0; j < work.cols(); ++j) {
        const float x = work(i, j);
        if (!m(i, j) || !is_valid(x)) continue;
        if (0.6745 * std::abs(x - med) / mad > threshold) {
          work(i, j) = float(med);
          ++flagged;
        }
      }
    if (flagged == 0) break;
  }
  return work;
}

RealPlane ref_local_mad(const RealPlane& z, const MaskPlane& m, int window,
                        double threshold) {
  RealPlane out = z;
  const int r = window / 2;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const float x = z(i, j);
      if (!m(i, j) || !is_valid(x)) continue;
      std::vector<float> v = window_floats(z, m, int(i), int(j), r);
      if (v.size() < 4) continue;
      const double med = float_median(v);
      const double mad = float_mad(v, med);
      if (mad == 0.0) continue;
      if (std::abs(x - med) > threshold * 1.4826 * mad) out(i, j) = float(med);
    }
  return out;
}

RealPlane ref_consensus(const RealPlane& z, const MaskPlane& m, int window,
                        double gamma, double rho_min, ConsensusCounts* counts) {
  const int h = static_cast<int>(z.rows());
  const int w = static_cast<int>(z.cols());
  const int r = window / 2;

  Plane<std::uint8_t> consistent = Plane<std::uint8_t>::Constant(h, w, 1);
  Plane<std::uint8_t> evaluable = Plane<std::uint8_t>::Zero(h, w);
  RealPlane med_plane = RealPlane::Zero(h, w);

  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const float x = z(i, j);
      if (!m(i, j) || !is_valid(x)) continue;
      std::vector<float> v = window_floats(z, m, i, j, r);
      if (v.size() < 4) continue;
      const double med = float_median(v);
      const double sigma_hat = 1.4826 * float_mad(v, med);
      evaluable(i, j) = 1;
      med_plane(i, j) = float(med);
      if (std::abs(x - med) > gamma * sigma_hat) consistent(i, j) = 0;
    }

  RealPlane out = z;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (!evaluable(i, j) || consistent(i, j)) continue;
      if (counts) ++counts->inconsistent;
      std::int64_t total = 0, agree = 0;
      for (int y = std::max(0, i - r); y <= std::min(h - 1, i + r); ++y)
        for (int x2 = std::max(0, j - r); x2 <= std::min(w - 1, j + r); ++x2) {
          if (y == i && x2 == j) continue;
          if (!m(y, x2) || !is_valid(z(y, x2))) continue;
          ++total;
          if (consistent(y, x2)) ++agree;
        }
      if (total == 0) continue;
      if (double(agree) / double(total) >= rho_min) {
        out(i, j) = med_plane(i, j);
        if (counts) ++counts->replaced;
      }
    }
  return out;
}

bool planes_identical(const RealPlane& a, const RealPlane& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(),
                     sizeof(float) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace testsupport
