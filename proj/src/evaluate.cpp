#include "branchdepth/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "branchdepth/rng.hpp"
#include "branchdepth/stereo.hpp"

namespace branchdepth {

namespace {

double median_of(std::vector<float>& v) {
  const std::size_t n = v.size();
  auto mid = v.begin() + n / 2;
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  double hi = *mid;
  double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

BranchStats branch_depth_stats(const RealPlane& depth, const MaskPlane& mask) {
  require_binary(mask, "branch_depth_stats");
  require_same_shape(depth, mask, "branch_depth_stats");

  BranchStats s;
  s.pixel_count = mask_pixel_count(mask);
  std::vector<float> values;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < depth.rows(); ++i)
    for (Eigen::Index j = 0; j < depth.cols(); ++j) {
      float z = depth(i, j);
      if (!mask(i, j) || !is_valid(z)) continue;
      values.push_back(z);
      sum += z;
    }
  s.valid_depth_count = static_cast<std::int64_t>(values.size());
  if (values.empty()) return s;

  s.mean_mm = sum / double(values.size());
  s.min_mm = *std::min_element(values.begin(), values.end());
  s.max_mm = *std::max_element(values.begin(), values.end());
  s.range_mm = s.max_mm - s.min_mm;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (float v : values) {
      double d = v - s.mean_mm;
      ss += d * d;
    }
    s.sigma_mm = std::sqrt(ss / double(values.size() - 1));
  }
  s.median_mm = median_of(values);
  return s;
}

VersionRow summarize_version(const std::string& name,
                             const std::vector<BranchStats>& stats) {
  VersionRow row;
  row.version = name;
  row.branch_count = static_cast<int>(stats.size());
  for (const BranchStats& s : stats) {
    row.avg_sigma_mm += s.sigma_mm;
    row.avg_range_mm += s.range_mm;
    row.total_mask_pixels += s.pixel_count;
    row.total_valid_pixels += s.valid_depth_count;
  }
  if (!stats.empty()) {
    row.avg_sigma_mm /= double(stats.size());
    row.avg_range_mm /= double(stats.size());
  }
  return row;
}

DepthHistogram depth_histogram(const RealPlane& depth, const MaskPlane& mask,
                               int bins) {
  if (bins < 1) throw std::invalid_argument("depth_histogram: bins must be >= 1");
  require_binary(mask, "depth_histogram");
  require_same_shape(depth, mask, "depth_histogram");

  DepthHistogram h;
  std::vector<float> values;
  for (Eigen::Index i = 0; i < depth.rows(); ++i)
    for (Eigen::Index j = 0; j < depth.cols(); ++j)
      if (mask(i, j) && is_valid(depth(i, j))) values.push_back(depth(i, j));
  if (values.empty()) return h;

  h.min_mm = *std::min_element(values.begin(), values.end());
  h.max_mm = *std::max_element(values.begin(), values.end());
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = h.max_mm - h.min_mm;
  for (float v : values) {
    int idx = 0;
    if (width > 0.0) {
      idx = static_cast<int>((double(v) - h.min_mm) / width * bins);
      idx = std::min(idx, bins - 1);
    }
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

namespace {

// Random streams keyed by purpose so evaluation order never matters.
constexpr std::uint64_t kStreamGaussian = 0;
constexpr std::uint64_t kStreamOutlierPick = 1;
constexpr std::uint64_t kStreamOutlierOffset = 2;
constexpr std::uint64_t kStreamSpike = 3;
constexpr std::uint64_t kStreamJitter = 4;

struct SceneRaster {
  LabelPlane owner;       // 0 = background, else branch id
  Plane<double> target;   // clean target depth in mm
};

void paint_pixel(SceneRaster& r, int x, int y, int id, double depth_mm,
                 int w, int h) {
  if (x < 0 || x >= w || y < 0 || y >= h)
    throw std::invalid_argument("generate_scene: primitive out of bounds");
  std::int32_t& cell = r.owner(y, x);
  if (cell == 0) {
    cell = id;
    r.target(y, x) = depth_mm;
    return;
  }
  // Re-painting the same branch at the same depth is fine (polyline knots);
  // anything else is an overlap error.
  if (cell != id || r.target(y, x) != depth_mm)
    throw std::invalid_argument("generate_scene: overlapping primitives");
}

void paint_line(SceneRaster& r, int x0, int y0, int x1, int y1, int id,
                double depth_mm, int w, int h) {
  // Bresenham; unit-width 8-connected stroke.
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0, y = y0;
  for (;;) {
    paint_pixel(r, x, y, id, depth_mm, w, h);
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

}  // namespace

SyntheticScene generate_scene(const SceneSpec& spec, std::uint64_t seed) {
  if (spec.primitives.empty())
    throw std::invalid_argument("generate_scene: no primitives");
  if (spec.width < 1 || spec.height < 1)
    throw std::invalid_argument("generate_scene: bad dimensions");
  spec.intrinsics.validate();
  if (!(spec.background_depth_mm > 0.0))
    throw std::invalid_argument("generate_scene: background depth must be > 0");

  const int w = spec.width, h = spec.height;
  SceneRaster raster;
  raster.owner = LabelPlane::Zero(h, w);
  raster.target = Plane<double>::Constant(h, w, spec.background_depth_mm);

  for (const ScenePrimitive& prim : spec.primitives) {
    if (!(prim.depth_mm > 0.0))
      throw std::invalid_argument("generate_scene: primitive depth must be > 0");
    if (prim.branch_id <= 0)
      throw std::invalid_argument("generate_scene: branch ids must be positive");
    // Same-branch repaints at the same depth are allowed (polyline knots,
    // segment joints); paint_pixel rejects everything else.
    if (prim.kind == ScenePrimitive::Kind::Rect) {
      if (prim.rect.w < 1 || prim.rect.h < 1)
        throw std::invalid_argument("generate_scene: degenerate rectangle");
      for (int y = prim.rect.y; y < prim.rect.y + prim.rect.h; ++y)
        for (int x = prim.rect.x; x < prim.rect.x + prim.rect.w; ++x)
          paint_pixel(raster, x, y, prim.branch_id, prim.depth_mm, w, h);
    } else {
      if (prim.points.size() < 2)
        throw std::invalid_argument("generate_scene: polyline needs >= 2 points");
      for (std::size_t s = 0; s + 1 < prim.points.size(); ++s) {
        auto [x0, y0] = prim.points[s];
        auto [x1, y1] = prim.points[s + 1];
        paint_line(raster, x0, y0, x1, y1, prim.branch_id, prim.depth_mm, w, h);
      }
    }
  }

  // Branch ids in ascending order; per-branch pixel lists in raster order.
  std::vector<int> ids;
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j)
      if (raster.owner(i, j) != 0 &&
          std::find(ids.begin(), ids.end(), raster.owner(i, j)) == ids.end())
        ids.push_back(raster.owner(i, j));
  std::sort(ids.begin(), ids.end());

  SyntheticScene scene;
  scene.seed = seed;
  scene.noise = spec.noise;
  scene.intrinsics = spec.intrinsics;

  // Contaminated target depth.
  Plane<double> noisy = raster.target;
  const NoiseSpec& ns = spec.noise;

  if (ns.gaussian_sigma_mm > 0.0) {
    for (Eigen::Index i = 0; i < h; ++i)
      for (Eigen::Index j = 0; j < w; ++j) {
        if (raster.owner(i, j) == 0) continue;
        const std::uint64_t idx = std::uint64_t(i) * std::uint64_t(w) + std::uint64_t(j);
        CounterRng g(seed, kStreamGaussian, 2 * idx);
        noisy(i, j) += ns.gaussian_sigma_mm * g.gaussian();
      }
  }

  std::vector<std::vector<std::pair<int, int>>> branch_pixels(ids.size());
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j) {
      const std::int32_t id = raster.owner(i, j);
      if (id == 0) continue;
      const std::size_t k = static_cast<std::size_t>(
          std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
      branch_pixels[k].emplace_back(int(i), int(j));
    }

  if (ns.outlier_fraction > 0.0) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      auto& pixels = branch_pixels[k];
      const std::size_t n = pixels.size();
      const std::size_t count = static_cast<std::size_t>(
          std::floor(ns.outlier_fraction * double(n) + 0.5));
      if (count == 0) continue;
      const std::uint64_t base = std::uint64_t(ids[k]) << 32;
      CounterRng pick(seed, kStreamOutlierPick, base);
      CounterRng off(seed, kStreamOutlierOffset, base);
      // Partial Fisher-Yates: exact count, sampled without replacement.
      std::vector<std::size_t> order(n);
      for (std::size_t t = 0; t < n; ++t) order[t] = t;
      for (std::size_t t = 0; t < count; ++t) {
        const std::size_t swap_with =
            t + static_cast<std::size_t>(pick.next_below(n - t));
        std::swap(order[t], order[swap_with]);
        auto [y, x] = pixels[order[t]];
        noisy(y, x) += off.uniform(ns.outlier_offset_min_mm, ns.outlier_offset_max_mm);
      }
    }
  }

  if (ns.spike_count > 0) {
    std::vector<std::pair<int, int>> all;
    for (const auto& v : branch_pixels) all.insert(all.end(), v.begin(), v.end());
    CounterRng r(seed, kStreamSpike);
    std::vector<std::pair<int, int>> placed;
    for (int s = 0; s < ns.spike_count && !all.empty(); ++s) {
      std::pair<int, int> candidate{};
      for (int attempt = 0; attempt < 1000; ++attempt) {
        candidate = all[static_cast<std::size_t>(r.next_below(all.size()))];
        bool isolated = true;
        for (const auto& q : placed)
          if (std::max(std::abs(q.first - candidate.first),
                       std::abs(q.second - candidate.second)) < 5) {
            isolated = false;
            break;
          }
        if (isolated) break;  // best effort: last candidate wins otherwise
      }
      placed.push_back(candidate);
      noisy(candidate.first, candidate.second) += ns.spike_offset_mm;
    }
  }

  // Depth -> disparity in float; ground truth goes through the same
  // conversion chain as the pipeline so the zero-noise case is bit-exact.
  const double fxb = spec.intrinsics.fx * spec.intrinsics.baseline_mm;
  RealPlane disparity(h, w), gt_disparity(h, w);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j) {
      const double zn = std::max(noisy(i, j), 1.0);
      disparity(i, j) = static_cast<float>(fxb / zn);
      gt_disparity(i, j) = static_cast<float>(fxb / raster.target(i, j));
    }
  scene.disparity = std::move(disparity);
  scene.gt_depth = disparity_to_depth(gt_disparity, spec.intrinsics);

  // Rendering: flat branch colors and bright background, plus deterministic
  // per-pixel jitter so local color statistics are non-degenerate.
  scene.rgb = make_rgb(h, w, spec.background_rgb[0], spec.background_rgb[1],
                       spec.background_rgb[2]);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j) {
      const std::int32_t id = raster.owner(i, j);
      std::array<std::uint8_t, 3> base = spec.background_rgb;
      if (id != 0) {
        auto it = spec.branches.find(id);
        base = it != spec.branches.end() ? it->second.rgb
                                         : BranchAppearance{}.rgb;
      }
      const std::uint64_t idx = std::uint64_t(i) * std::uint64_t(w) + std::uint64_t(j);
      std::uint8_t* chan[3] = {&scene.rgb.r(i, j), &scene.rgb.g(i, j),
                               &scene.rgb.b(i, j)};
      for (int c = 0; c < 3; ++c) {
        double v = base[static_cast<std::size_t>(c)];
        if (spec.color_jitter > 0.0) {
          CounterRng jr(seed, kStreamJitter, 3 * idx + std::uint64_t(c));
          v += jr.uniform(-spec.color_jitter, spec.color_jitter);
        }
        *chan[c] = static_cast<std::uint8_t>(
            std::clamp(std::lround(v), 0l, 255l));
      }
    }

  for (std::size_t k = 0; k < ids.size(); ++k) {
    BranchInstance inst;
    inst.id = ids[k];
    auto it = spec.branches.find(ids[k]);
    inst.score = it != spec.branches.end() ? it->second.score
                                           : BranchAppearance{}.score;
    inst.mask = MaskPlane::Zero(h, w);
    for (auto [y, x] : branch_pixels[k]) inst.mask(y, x) = 1;
    scene.instances.push_back(std::move(inst));
  }
  return scene;
}

SceneSpec canonical_scene_spec() {
  SceneSpec spec;
  spec.noise.gaussian_sigma_mm = 150.0;
  spec.noise.outlier_fraction = 0.10;
  spec.noise.outlier_offset_min_mm = 2000.0;
  spec.noise.outlier_offset_max_mm = 6000.0;
  spec.noise.spike_count = 20;
  spec.noise.spike_offset_mm = 8000.0;

  struct Layout {
    int id;
    RectPrimitive rect;
    double depth;
    std::array<std::uint8_t, 3> rgb;
    double score;
  };
  const Layout layout[] = {
      {1, {30, 20, 280, 48}, 900.0, {96, 78, 58}, 0.90},
      {2, {340, 30, 260, 56}, 1150.0, {110, 84, 60}, 0.88},
      {3, {40, 100, 560, 50}, 1400.0, {88, 92, 62}, 0.92},
      {4, {60, 180, 240, 64}, 1700.0, {104, 72, 66}, 0.86},
      {5, {330, 190, 270, 58}, 1950.0, {92, 80, 72}, 0.91},
      {6, {50, 270, 540, 60}, 2200.0, {118, 96, 70}, 0.89},
  };
  for (const Layout& l : layout) {
    ScenePrimitive p;
    p.kind = ScenePrimitive::Kind::Rect;
    p.branch_id = l.id;
    p.depth_mm = l.depth;
    p.rect = l.rect;
    spec.primitives.push_back(p);
    spec.branches[l.id] = {l.score, l.rgb};
  }
  return spec;
}

SceneSpec thin_structure_scene_spec() {
  SceneSpec spec;

  struct Layout {
    int id;
    std::pair<int, int> from, to;  // (x, y)
    double depth;
    std::array<std::uint8_t, 3> rgb;
  };
  const Layout layout[] = {
      {1, {40, 40}, {200, 200}, 1000.0, {96, 78, 58}},
      {2, {260, 60}, {420, 220}, 1300.0, {110, 84, 60}},
      {3, {460, 80}, {600, 300}, 1600.0, {88, 92, 62}},
  };
  for (const Layout& l : layout) {
    ScenePrimitive line;
    line.kind = ScenePrimitive::Kind::Polyline;
    line.branch_id = l.id;
    line.depth_mm = l.depth;
    line.points = {l.from, l.to};
    spec.primitives.push_back(line);

    // Two 9x9 "knots" anchor the span: wide enough to survive small-radius
    // erosion while the unit-width span cannot, which is what separates the
    // fallback-erosion path from the skeleton-preserving path.
    for (const auto& c : {l.from, l.to}) {
      ScenePrimitive knot;
      knot.kind = ScenePrimitive::Kind::Rect;
      knot.branch_id = l.id;
      knot.depth_mm = l.depth;
      knot.rect = {c.first - 4, c.second - 4, 9, 9};
      spec.primitives.push_back(knot);
    }
    spec.branches[l.id] = {0.9, l.rgb};
  }
  return spec;
}

BranchError compare_to_ground_truth(int branch_id, const RealPlane& depth,
                                    const RealPlane& gt) {
  require_same_shape(depth, gt, "compare_to_ground_truth");
  BranchError e;
  e.branch_id = branch_id;
  double abs_sum = 0.0, sq_sum = 0.0;
  for (Eigen::Index i = 0; i < depth.rows(); ++i)
    for (Eigen::Index j = 0; j < depth.cols(); ++j) {
      float d = depth(i, j), g = gt(i, j);
      if (!is_valid(d) || !is_valid(g)) continue;
      const double diff = double(d) - g;
      abs_sum += std::abs(diff);
      sq_sum += diff * diff;
      ++e.compared;
    }
  if (e.compared > 0) {
    e.mae_mm = abs_sum / double(e.compared);
    e.rmse_mm = std::sqrt(sq_sum / double(e.compared));
  }
  return e;
}

}  // namespace branchdepth
