#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

#include "vortexmap/grid.hpp"

namespace vxm::detail {

/// Multilinear interpolation weights of one staggered array around a point.
struct Stencil {
  std::size_t base = 0;
  int count = 0;
  std::array<std::ptrdiff_t, 8> offset{};
  std::array<double, 8> weight{};

  Stencil(const Index3& s, const ComponentLayout& l, const GridDesc& g, const Vec3& p) {
    const std::array<std::ptrdiff_t, 3> stride{static_cast<std::ptrdiff_t>(s[1]) * s[2], s[2], 1};
    std::array<int, 3> i0{0, 0, 0};
    std::array<double, 3> t{0.0, 0.0, 0.0};
    int active = 0;
    std::array<int, 3> axes{};
    for (int ax = 0; ax < g.dim; ++ax) {
      if (s[ax] < 2) continue;
      double q = std::clamp((p[ax] - g.origin[ax]) / g.dx - l.offset[ax], 0.0, double(s[ax] - 1));
      // Positions generated from sample indices land on the grid up to round-off.
      const double nearest = std::round(q);
      if (std::abs(q - nearest) < 1e-10) q = nearest;
      int lo = static_cast<int>(std::floor(q));
      lo = std::min(lo, s[ax] - 2);
      i0[ax] = lo;
      t[ax] = q - lo;
      axes[active++] = ax;
    }
    base = static_cast<std::size_t>(i0[0] * stride[0] + i0[1] * stride[1] + i0[2]);
    count = 1 << active;
    for (int corner = 0; corner < count; ++corner) {
      std::ptrdiff_t off = 0;
      double w = 1.0;
      for (int n = 0; n < active; ++n) {
        const int ax = axes[n];
        if (corner & (1 << n)) {
          off += stride[ax];
          w *= t[ax];
        } else {
          w *= 1.0 - t[ax];
        }
      }
      offset[corner] = off;
      weight[corner] = w;
    }
  }

  double apply(const Array3& a) const {
    const double* d = a.raw().data() + base;
    double r = 0.0;
    for (int n = 0; n < count; ++n) r += weight[n] * d[offset[n]];
    return r;
  }

  std::pair<double, double> bounds(const Array3& a) const {
    const double* d = a.raw().data() + base;
    double lo = d[offset[0]], hi = lo;
    for (int n = 1; n < count; ++n) {
      lo = std::min(lo, d[offset[n]]);
      hi = std::max(hi, d[offset[n]]);
    }
    return {lo, hi};
  }
};

}  // namespace vxm::detail
