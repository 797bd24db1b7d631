#include "branchdepth/mask_refine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "branchdepth/parallel.hpp"

namespace branchdepth {

ErodeFallbackResult erode_with_fallback(const MaskPlane& mask, int radius) {
  require_binary(mask, "erode_with_fallback");
  if (radius < 1)
    throw std::invalid_argument("erode_with_fallback: radius must be >= 1");

  // Ladder radius, radius/2, radius/4, 3, 1; a radius that is not smaller
  // than an already-empty one is skipped (its erosion is empty too).
  const int ladder[] = {radius, radius / 2, radius / 4, 3, 1};
  int tried_min = radius + 1;
  for (int r : ladder) {
    if (r < 1 || r >= tried_min) continue;
    tried_min = r;
    MaskPlane eroded = erode(mask, StructuringElement::disc(r));
    if (mask_pixel_count(eroded) > 0) return {std::move(eroded), r};
  }
  return {mask, 0};
}

MaskPlane skeleton_preserving_erode(const MaskPlane& mask,
                                    const MaskRefineParams& p) {
  require_binary(mask, "skeleton_preserving_erode");
  if (mask_pixel_count(mask) == 0) return mask;

  MaskPlane eroded = erode(mask, StructuringElement::disc(p.erosion_radius));
  MaskPlane skel = skeletonize(mask);
  MaskPlane widened =
      dilate(skel, StructuringElement::disc(p.skeleton_dilation_radius()));
  // (eroded union widened-skeleton) clipped to the input mask.
  MaskPlane out(mask.rows(), mask.cols());
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      out(i, j) = mask(i, j) && (eroded(i, j) || widened(i, j)) ? 1 : 0;
  return out;
}

CoreRegion extract_core_region(const MaskPlane& mask, int radius,
                               std::int64_t min_pixels) {
  require_binary(mask, "extract_core_region");
  if (radius < 1)
    throw std::invalid_argument("extract_core_region: radius must be >= 1");

  Plane<double> dsq = squared_distance_transform(mask);
  int r = radius;
  for (;;) {
    const double rr = double(r) * r;
    MaskPlane core = (dsq >= rr).cast<std::uint8_t>();
    if (mask_pixel_count(core) >= min_pixels) return {std::move(core), r};
    if (r == 1) break;
    r = std::max(r / 2, 1);
  }
  return {mask, 0};
}

ColorValidation color_validate(const MaskPlane& mask, const LabImage& lab,
                               const MaskRefineParams& p) {
  require_binary(mask, "color_validate");
  ColorValidation v;
  if (mask_pixel_count(mask) < 2) {
    v.mask = mask;
    v.flagged = true;
    return v;
  }

  CoreRegion core = extract_core_region(mask, p.core_radius, p.core_min_pixels);
  const MaskPlane& fit_region =
      mask_pixel_count(core.mask) >= 2 ? core.mask : mask;
  v.model = fit_color_model(lab, fit_region, p.color_model_eps);
  v.core_radius_used = core.radius_used;

  RealPlane dmap = mahalanobis_map(lab, *v.model, mask);
  v.mask = mask;
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      if (mask(i, j) && dmap(i, j) > p.mahalanobis_threshold) {
        v.mask(i, j) = 0;
        ++v.pixels_rejected;
      }
  return v;
}

std::vector<MaskPlane> resolve_overlaps(const std::vector<MaskPlane>& masks,
                                        const std::vector<ColorModel>& models,
                                        const std::vector<int>& ids,
                                        const LabImage& lab) {
  if (masks.size() != models.size() || masks.size() != ids.size())
    throw std::invalid_argument("resolve_overlaps: size mismatch");
  std::vector<MaskPlane> out = masks;
  if (masks.empty()) return out;

  const Eigen::Index h = masks[0].rows(), w = masks[0].cols();
  for (const MaskPlane& m : masks) require_same_shape(masks[0], m, "resolve_overlaps");

  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j) {
      int claims = 0;
      for (const MaskPlane& m : masks)
        if (m(i, j) && ++claims > 1) break;
      if (claims < 2) continue;

      const Eigen::Vector3d pix(lab.L(i, j), lab.a(i, j), lab.b(i, j));
      int best = -1;
      double best_d = 0.0;
      for (std::size_t k = 0; k < masks.size(); ++k) {
        if (!masks[k](i, j)) continue;
        const double d = mahalanobis_distance(pix, models[k]);
        const bool wins = best < 0 || d < best_d ||
                          (d == best_d && ids[k] < ids[static_cast<std::size_t>(best)]);
        if (wins) {
          best = static_cast<int>(k);
          best_d = d;
        }
      }
      for (std::size_t k = 0; k < masks.size(); ++k)
        if (out[k](i, j) && static_cast<int>(k) != best) out[k](i, j) = 0;
    }
  return out;
}

RefineResult refine_v2(const BranchInstance& in, const MaskRefineParams& p) {
  RefineResult r;
  r.trace.branch_id = in.id;
  r.trace.input_pixels = mask_pixel_count(in.mask);
  ErodeFallbackResult e = erode_with_fallback(in.mask, p.erosion_radius);
  r.trace.fallback_radius_used = e.radius_used;
  r.trace.stages.push_back({"erode_with_fallback", mask_pixel_count(e.mask)});
  r.instance = {in.id, in.score, std::move(e.mask)};
  return r;
}

RefineResult refine_v3(const BranchInstance& in, const MaskRefineParams& p) {
  RefineResult r;
  r.trace.branch_id = in.id;
  r.trace.input_pixels = mask_pixel_count(in.mask);
  MaskPlane m = skeleton_preserving_erode(in.mask, p);
  r.trace.stages.push_back({"skeleton_erode", mask_pixel_count(m)});
  r.instance = {in.id, in.score, std::move(m)};
  return r;
}

RefineV4Result refine_v4(const std::vector<BranchInstance>& in,
                         const RgbImage& rgb, const MaskRefineParams& p,
                         int num_threads) {
  const LabImage lab = srgb_to_lab(rgb);
  const std::size_t n = in.size();

  std::vector<RefinementTrace> traces(n);
  std::vector<MaskPlane> masks(n);
  std::vector<ColorModel> models(n);

  parallel_for_index(n, num_threads, [&](std::size_t k) {
    const BranchInstance& b = in[k];
    RefinementTrace& t = traces[k];
    t.branch_id = b.id;
    t.input_pixels = mask_pixel_count(b.mask);

    MaskPlane m = skeleton_preserving_erode(b.mask, p);
    std::int64_t count = mask_pixel_count(m);
    t.stages.push_back({"skeleton_erode", count});
    if (count == 0) {
      t.dropped = true;
      t.flagged = true;
      t.flag_reason = "empty after erosion";
      return;
    }

    ColorValidation v = color_validate(m, lab, p);
    count = mask_pixel_count(v.mask);
    t.stages.push_back({"color_validate", count});
    t.core_radius_used = v.core_radius_used;
    if (v.flagged) {
      t.flagged = true;
      t.flag_reason = "mask too small for a color model";
    }
    if (count == 0) {
      t.dropped = true;
      t.flagged = true;
      t.flag_reason = "empty after color validation";
      return;
    }
    if (v.model) {
      models[k] = *v.model;
    } else {
      // Single-pixel mask: degenerate model at that pixel's color.
      bool found = false;
      for (Eigen::Index i = 0; i < v.mask.rows() && !found; ++i)
        for (Eigen::Index j = 0; j < v.mask.cols() && !found; ++j)
          if (v.mask(i, j)) {
            models[k].mean = Eigen::Vector3d(lab.L(i, j), lab.a(i, j), lab.b(i, j));
            models[k].covariance =
                p.color_model_eps * Eigen::Matrix3d::Identity();
            found = true;
          }
    }

    MaskPlane cleaned = remove_small_components(v.mask, p.component_ratio);
    count = mask_pixel_count(cleaned);
    t.stages.push_back({"remove_small_components", count});
    if (count == 0) {
      t.dropped = true;
      t.flagged = true;
      t.flag_reason = "empty after component cleaning";
      return;
    }
    masks[k] = std::move(cleaned);
  });

  // Stage 4 runs once over the survivors of stages 1-3.
  std::vector<std::size_t> alive;
  std::vector<MaskPlane> alive_masks;
  std::vector<ColorModel> alive_models;
  std::vector<int> alive_ids;
  for (std::size_t k = 0; k < n; ++k) {
    if (traces[k].dropped) continue;
    alive.push_back(k);
    alive_masks.push_back(masks[k]);
    alive_models.push_back(models[k]);
    alive_ids.push_back(in[k].id);
  }
  std::vector<MaskPlane> resolved =
      resolve_overlaps(alive_masks, alive_models, alive_ids, lab);

  RefineV4Result result;
  for (std::size_t a = 0; a < alive.size(); ++a) {
    const std::size_t k = alive[a];
    const std::int64_t count = mask_pixel_count(resolved[a]);
    traces[k].stages.push_back({"resolve_overlaps", count});
    if (count == 0) {
      traces[k].dropped = true;
      traces[k].flagged = true;
      traces[k].flag_reason = "empty after overlap resolution";
      continue;
    }
    result.instances.push_back({in[k].id, in[k].score, std::move(resolved[a])});
  }
  result.traces = std::move(traces);
  return result;
}

}  // namespace branchdepth
