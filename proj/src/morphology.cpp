#include "branchdepth/morphology.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace branchdepth {

namespace {

constexpr double kFar = 1e20;  // stands in for +inf in the squared transform

// Lower envelope of parabolas (Felzenszwalb/Huttenlocher); f and d hold
// squared distances.  All genuine values are integers, so the envelope
// evaluation is exact in doubles.
void envelope_1d(const std::vector<double>& f, std::vector<double>& d,
                 std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = double(q) - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

// Squared distance from every pixel to the nearest pixel of the zero set
// (mask value == zero_value).  border_in_zero_set adds a virtual zero-set
// frame one pixel outside the image.
Plane<double> squared_distance_to_set(const MaskPlane& m,
                                      std::uint8_t zero_value,
                                      bool border_in_zero_set) {
  const int h = static_cast<int>(m.rows());
  const int w = static_cast<int>(m.cols());
  Plane<double> d(h, w);

  // Column pass: squared distance to the nearest zero-set pixel in the same
  // column (virtual rows -1 and h when the border belongs to the set).
  for (int j = 0; j < w; ++j) {
    long long last = border_in_zero_set ? -1 : -(1 << 28);
    for (int i = 0; i < h; ++i) {
      if (m(i, j) == zero_value) {
        d(i, j) = 0.0;
        last = i;
      } else {
        double t = double(i - last);
        d(i, j) = t > 1e6 ? kFar : t * t;
      }
    }
    long long nxt = border_in_zero_set ? h : (1 << 28);
    for (int i = h - 1; i >= 0; --i) {
      if (m(i, j) == zero_value) {
        nxt = i;
      } else {
        double t = double(nxt - i);
        double tt = t > 1e6 ? kFar : t * t;
        if (tt < d(i, j)) d(i, j) = tt;
      }
    }
  }

  // Row pass: combine columns through the parabola envelope.
  std::vector<double> f(w), out(w);
  std::vector<int> v(w);
  std::vector<double> z(w + 1);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) f[j] = d(i, j);
    envelope_1d(f, out, v, z);
    for (int j = 0; j < w; ++j) d(i, j) = out[j];
  }

  if (border_in_zero_set) {
    // Virtual columns -1 and w; the nearest outside pixel in those columns
    // is the perpendicular one.
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        double left = double(j + 1) * (j + 1);
        double right = double(w - j) * (w - j);
        double b = std::min(left, right);
        if (b < d(i, j)) d(i, j) = b;
      }
  }
  return d;
}

int popcount8(unsigned bits) { return std::popcount(bits & 0xFFu); }

// Ring order (bit index): N, NE, E, SE, S, SW, W, NW.
constexpr int kRingDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kRingDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};

// 0 -> 1 transitions around the cyclic neighbor sequence.
int ring_transitions(unsigned bits) {
  int a = 0;
  for (int i = 0; i < 8; ++i) {
    unsigned cur = (bits >> i) & 1u;
    unsigned nxt = (bits >> ((i + 1) & 7)) & 1u;
    if (!cur && nxt) ++a;
  }
  return a;
}

// Simple-point test for (8, 4) connectivity: deleting the center changes
// neither the foreground components nor the background components iff the
// foreground ring cells form exactly one 8-connected group and the
// background ring cells form exactly one 4-connected group touching an
// orthogonal neighbor.
bool compute_simple(unsigned bits) {
  auto cells_adjacent = [](int a, int b, bool four) {
    int dy = kRingDy[a] - kRingDy[b];
    int dx = kRingDx[a] - kRingDx[b];
    if (four) return std::abs(dy) + std::abs(dx) == 1;
    return std::max(std::abs(dy), std::abs(dx)) == 1;
  };

  int comp[8];
  auto count_components = [&](bool want_fg, bool four) {
    for (int i = 0; i < 8; ++i) comp[i] = -1;
    int n = 0;
    for (int i = 0; i < 8; ++i) {
      bool fg = (bits >> i) & 1u;
      if (fg != want_fg || comp[i] != -1) continue;
      // flood this component
      int stack[8], top = 0;
      comp[i] = n;
      stack[top++] = i;
      while (top) {
        int c = stack[--top];
        for (int k = 0; k < 8; ++k) {
          bool kfg = (bits >> k) & 1u;
          if (kfg == want_fg && comp[k] == -1 && cells_adjacent(c, k, four)) {
            comp[k] = n;
            stack[top++] = k;
          }
        }
      }
      ++n;
    }
    return n;
  };

  if (count_components(true, false) != 1) return false;
  count_components(false, true);
  // Components of background cells that touch an orthogonal neighbor
  // (ring indices 0, 2, 4, 6).
  bool seen[8] = {};
  int touching = 0;
  for (int i : {0, 2, 4, 6}) {
    if ((bits >> i) & 1u) continue;
    if (!seen[comp[i]]) {
      seen[comp[i]] = true;
      ++touching;
    }
  }
  return touching == 1;
}

const std::array<bool, 256>& simple_lut() {
  static const std::array<bool, 256> lut = [] {
    std::array<bool, 256> t{};
    for (unsigned b = 0; b < 256; ++b) t[b] = compute_simple(b);
    return t;
  }();
  return lut;
}

}  // namespace

StructuringElement StructuringElement::disc(int radius) {
  if (radius < 1)
    throw std::invalid_argument("StructuringElement: radius must be >= 1");
  StructuringElement se;
  se.radius = radius;
  const int rr = radius * radius;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dy * dy + dx * dx <= rr) se.offsets.emplace_back(dy, dx);
  return se;
}

Plane<double> squared_distance_transform(const MaskPlane& m) {
  require_binary(m, "squared_distance_transform");
  return squared_distance_to_set(m, 0, true);
}

RealPlane distance_transform(const MaskPlane& m) {
  Plane<double> sq = squared_distance_transform(m);
  return sq.sqrt().cast<float>();
}

MaskPlane erode(const MaskPlane& m, const StructuringElement& se) {
  require_binary(m, "erode");
  if (se.radius < 1) throw std::invalid_argument("erode: radius must be >= 1");
  // The disc fits at p iff the nearest background pixel is farther than the
  // radius, so the exact distance transform realizes the erosion.
  Plane<double> sq = squared_distance_to_set(m, 0, true);
  const double rr = double(se.radius) * se.radius;
  return (sq > rr).cast<std::uint8_t>();
}

MaskPlane dilate(const MaskPlane& m, const StructuringElement& se) {
  require_binary(m, "dilate");
  if (se.radius < 1) throw std::invalid_argument("dilate: radius must be >= 1");
  Plane<double> sq = squared_distance_to_set(m, 1, false);
  const double rr = double(se.radius) * se.radius;
  return (sq <= rr).cast<std::uint8_t>();
}

MaskPlane skeletonize(const MaskPlane& m) {
  require_binary(m, "skeletonize");
  const int h = static_cast<int>(m.rows());
  const int w = static_cast<int>(m.cols());
  MaskPlane cur = m;

  auto bits_at = [&](int i, int j) {
    unsigned b = 0;
    for (int k = 0; k < 8; ++k) {
      int ni = i + kRingDy[k], nj = j + kRingDx[k];
      if (ni >= 0 && ni < h && nj >= 0 && nj < w && cur(ni, nj))
        b |= 1u << k;
    }
    return b;
  };

  // Sub-iteration marking (directional boundary conditions on N/E/S/W =
  // bits 0/2/4/6) followed by sequential deletion re-checked with the exact
  // simple-point test.  Parallel deletion alone can erase an isolated 2x2
  // block, which would change the component count.
  std::vector<std::pair<int, int>> marked;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int sub = 0; sub < 2; ++sub) {
      marked.clear();
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
          if (!cur(i, j)) continue;
          unsigned bits = bits_at(i, j);
          int b = popcount8(bits);
          if (b < 2 || b > 6) continue;
          if (ring_transitions(bits) != 1) continue;
          bool n = bits & (1u << 0), e = bits & (1u << 2);
          bool s = bits & (1u << 4), wst = bits & (1u << 6);
          bool ok = sub == 0 ? (!(n && e && s) && !(e && s && wst))
                             : (!(n && e && wst) && !(n && s && wst));
          if (ok) marked.emplace_back(i, j);
        }
      for (auto [i, j] : marked) {
        if (simple_lut()[bits_at(i, j)]) {
          cur(i, j) = 0;
          changed = true;
        }
      }
    }
  }
  return cur;
}

ComponentLabeling connected_components(const MaskPlane& m) {
  require_binary(m, "connected_components");
  const int h = static_cast<int>(m.rows());
  const int w = static_cast<int>(m.cols());
  ComponentLabeling out;
  out.labels = LabelPlane::Zero(h, w);

  std::vector<std::pair<int, int>> stack;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (!m(i, j) || out.labels(i, j) != 0) continue;
      const std::int32_t label = static_cast<std::int32_t>(out.sizes.size()) + 1;
      std::int64_t size = 0;
      out.labels(i, j) = label;
      stack.clear();
      stack.emplace_back(i, j);
      while (!stack.empty()) {
        auto [y, x] = stack.back();
        stack.pop_back();
        ++size;
        for (int k = 0; k < 8; ++k) {
          int ny = y + kRingDy[k], nx = x + kRingDx[k];
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          if (!m(ny, nx) || out.labels(ny, nx) != 0) continue;
          out.labels(ny, nx) = label;
          stack.emplace_back(ny, nx);
        }
      }
      out.sizes.push_back(size);
    }
  return out;
}

MaskPlane remove_small_components(const MaskPlane& m, double ratio) {
  ComponentLabeling cc = connected_components(m);
  if (cc.count() == 0) return m;
  const double largest =
      static_cast<double>(*std::max_element(cc.sizes.begin(), cc.sizes.end()));
  std::vector<std::uint8_t> keep(cc.sizes.size());
  for (std::size_t l = 0; l < cc.sizes.size(); ++l)
    keep[l] = static_cast<double>(cc.sizes[l]) / largest >= ratio ? 1 : 0;

  MaskPlane out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) && !keep[cc.labels(i, j) - 1]) out(i, j) = 0;
  return out;
}

}  // namespace branchdepth
