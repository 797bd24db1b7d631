#pragma once

#include "branchdepth/raster.hpp"

#include <utility>
#include <vector>

namespace branchdepth {

// Discrete elliptical (disc) element {(dy, dx) : dy*dy + dx*dx <= r*r}.
struct StructuringElement {
  int radius = 1;
  std::vector<std::pair<int, int>> offsets;  // (dy, dx), includes (0, 0)

  // radius >= 1; throws std::invalid_argument otherwise.
  static StructuringElement disc(int radius);
};

// Exact squared Euclidean distance to the nearest background pixel.
// Pixels beyond the image border count as background.  Every value is an
// exact integer held in a double, so threshold comparisons are exact.
Plane<double> squared_distance_transform(const MaskPlane& m);

// sqrt of the squared transform; 0 on background.
RealPlane distance_transform(const MaskPlane& m);

// Output pixel is 1 iff the element centred there fits entirely inside the
// input mask (out-of-bounds counts as background).
MaskPlane erode(const MaskPlane& m, const StructuringElement& se);

// Output pixel is 1 iff the element centred there covers at least one input
// pixel.
MaskPlane dilate(const MaskPlane& m, const StructuringElement& se);

// Topology-preserving thinning: output is a subset of the input with the
// same number of 8-connected components, unit width away from junctions.
MaskPlane skeletonize(const MaskPlane& m);

struct ComponentLabeling {
  LabelPlane labels;                // 0 = background, components 1..count()
  std::vector<std::int64_t> sizes;  // sizes[l - 1] = pixel count of label l
  int count() const { return static_cast<int>(sizes.size()); }
};

// 8-connectivity; labels assigned in raster-scan first-encounter order.
ComponentLabeling connected_components(const MaskPlane& m);

// Keeps components whose size/largest >= ratio.
MaskPlane remove_small_components(const MaskPlane& m, double ratio);

}  // namespace branchdepth
