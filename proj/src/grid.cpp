#include "vortexmap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "detail/stencil.hpp"

namespace vxm {

namespace {

constexpr std::array<int, 2> kAxes2{0, 1};
constexpr std::array<int, 3> kAxes3{0, 1, 2};
constexpr std::array<int, 1> kVort2{2};

void require_grid(bool ok, const char* op) {
  if (!ok) throw ContractError(std::string(op) + ": field shape does not match grid");
}

}  // namespace

GridDesc GridDesc::make2d(int nx, int ny, double dx, Vec3 origin) {
  GridDesc g;
  g.dim = 2;
  g.dims = {nx, ny, 1};
  g.dx = dx;
  g.origin = origin;
  g.origin[2] = 0.0;
  g.validate();
  return g;
}

GridDesc GridDesc::make3d(int nx, int ny, int nz, double dx, Vec3 origin) {
  GridDesc g;
  g.dim = 3;
  g.dims = {nx, ny, nz};
  g.dx = dx;
  g.origin = origin;
  g.validate();
  return g;
}

void GridDesc::validate() const {
  if (dim != 2 && dim != 3) throw ContractError("grid: dimension must be 2 or 3");
  for (int a = 0; a < dim; ++a)
    if (dims[a] < 4) throw ContractError("grid: at least 4 cells per axis required");
  if (dim == 2 && dims[2] != 1) throw ContractError("grid: 2D grids have a single z layer");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw ContractError("grid: dx must be positive");
}

Vec3 GridDesc::clamp_to_domain(Vec3 p) const {
  for (int a = 0; a < dim; ++a) p[a] = std::clamp(p[a], origin[a], origin[a] + dims[a] * dx);
  return p;
}

ComponentLayout face_layout(const GridDesc& g, int axis) {
  ComponentLayout l;
  l.shape = g.dims;
  l.shape[axis] += 1;
  l.offset[axis] = 0.0;
  return l;
}

ComponentLayout edge_layout(const GridDesc& g, int c) {
  ComponentLayout l;
  if (g.dim == 2) {
    if (c != 2) throw ContractError("edge_layout: 2D vorticity has only the out-of-plane component");
    l.shape = {g.dims[0] + 1, g.dims[1] + 1, 1};
    l.offset = {0.0, 0.0, 0.5};
    return l;
  }
  for (int a = 0; a < 3; ++a) {
    l.shape[a] = a == c ? g.dims[a] : g.dims[a] + 1;
    l.offset[a] = a == c ? 0.5 : 0.0;
  }
  return l;
}

ComponentLayout cell_layout(const GridDesc& g) {
  ComponentLayout l;
  l.shape = g.dims;
  return l;
}

ComponentLayout node_layout(const GridDesc& g) {
  ComponentLayout l;
  l.shape = g.dims;
  for (int a = 0; a < g.dim; ++a) {
    l.shape[a] += 1;
    l.offset[a] = 0.0;
  }
  return l;
}

Vec3 sample_position(const GridDesc& g, const ComponentLayout& l, const Index3& idx) {
  Vec3 p;
  for (int a = 0; a < g.dim; ++a) p[a] = g.origin[a] + (idx[a] + l.offset[a]) * g.dx;
  return p;
}

std::span<const int> face_axes(int dim) {
  if (dim == 2) return kAxes2;
  return kAxes3;
}

std::span<const int> vort_components(int dim) {
  if (dim == 2) return kVort2;
  return kAxes3;
}

template <Stagger S>
bool StaggeredField<S>::matches(const GridDesc& g) const {
  if (!(grid == g)) return false;
  for (int c : components())
    if (comp[c].shape() != layout(c).shape) return false;
  return true;
}

template <Stagger S>
bool StaggeredField<S>::all_finite() const {
  for (int c : components())
    for (double v : comp[c].values())
      if (!std::isfinite(v)) return false;
  return true;
}

template <Stagger S>
double StaggeredField<S>::max_abs() const {
  double m = 0.0;
  for (int c : components())
    for (double v : comp[c].values()) m = std::max(m, std::abs(v));
  return m;
}

template struct StaggeredField<Stagger::Face>;
template struct StaggeredField<Stagger::Edge>;

namespace {

template <class F>
F combine(F a, const F& b, double sb) {
  require(a.grid == b.grid, "field arithmetic: grid mismatch");
  for (int c : a.components()) {
    auto& x = a[c].raw();
    const auto& y = b[c].raw();
    for (std::size_t n = 0; n < x.size(); ++n) x[n] += sb * y[n];
  }
  return a;
}

}  // namespace

FaceField operator+(FaceField a, const FaceField& b) { return combine(std::move(a), b, 1.0); }
VortField operator+(VortField a, const VortField& b) { return combine(std::move(a), b, 1.0); }
VortField operator-(VortField a, const VortField& b) { return combine(std::move(a), b, -1.0); }
VortField operator*(double s, VortField a) {
  for (int c : a.components())
    for (double& v : a[c].raw()) v *= s;
  return a;
}

VortField curl_velocity(const FaceField& u, const GridDesc& g, const Vec3& ambient) {
  require_grid(u.matches(g), "curl_velocity");
  VortField w(g);
  const double inv = 1.0 / g.dx;
  for (int c : w.components()) {
    const int a = (c + 1) % 3;
    const int b = (c + 2) % 3;
    const Array3& ua = u[a];
    const Array3& ub = u[b];
    Array3& out = w[c];
    const Index3 s = out.shape();
    for (int i = 0; i < s[0]; ++i)
      for (int j = 0; j < s[1]; ++j)
        for (int k = 0; k < s[2]; ++k) {
          const Index3 e{i, j, k};
          const double circ = ub.get_or(e, ambient[b]) - ub.get_or(shifted(e, a, -1), ambient[b]) -
                              ua.get_or(e, ambient[a]) + ua.get_or(shifted(e, b, -1), ambient[a]);
          out(i, j, k) = circ * inv;
        }
  }
  return w;
}

FaceField curl_vorticity(const VortField& w, const GridDesc& g) {
  require_grid(w.matches(g), "curl_vorticity");
  FaceField u(g);
  const double inv = 1.0 / g.dx;
  for (int a : u.components()) {
    Array3& out = u[a];
    const Index3 s = out.shape();
    for (int i = 0; i < s[0]; ++i)
      for (int j = 0; j < s[1]; ++j)
        for (int k = 0; k < s[2]; ++k) {
          const Index3 f{i, j, k};
          double acc = 0.0;
          for (int c : w.components()) {
            if (c == a) continue;
            const Array3& wc = w[c];
            if (a == (c + 2) % 3) {
              acc += wc.get_or(f, 0.0) - wc.get_or(shifted(f, (c + 1) % 3, 1), 0.0);
            } else {
              acc += -wc.get_or(f, 0.0) + wc.get_or(shifted(f, (c + 2) % 3, 1), 0.0);
            }
          }
          out(i, j, k) = acc * inv;
        }
  }
  return u;
}

CellField divergence(const FaceField& u, const GridDesc& g) {
  require_grid(u.matches(g), "divergence");
  CellField d(g);
  const double inv = 1.0 / g.dx;
  const Index3 s = g.dims;
  for (int i = 0; i < s[0]; ++i)
    for (int j = 0; j < s[1]; ++j)
      for (int k = 0; k < s[2]; ++k) {
        const Index3 x{i, j, k};
        double acc = 0.0;
        for (int a : u.components()) acc += u[a][shifted(x, a, 1)] - u[a][x];
        d.values(i, j, k) = acc * inv;
      }
  return d;
}

Array3 vorticity_divergence(const VortField& w, const GridDesc& g) {
  if (g.dim != 3) throw ContractError("vorticity_divergence: only defined for 3D edge vorticity");
  require_grid(w.matches(g), "vorticity_divergence");
  Array3 d(node_layout(g).shape);
  const double inv = 1.0 / g.dx;
  const Index3 s = d.shape();
  for (int i = 0; i < s[0]; ++i)
    for (int j = 0; j < s[1]; ++j)
      for (int k = 0; k < s[2]; ++k) {
        const Index3 n{i, j, k};
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) acc += w[c].get_or(n, 0.0) - w[c].get_or(shifted(n, c, -1), 0.0);
        d(i, j, k) = acc * inv;
      }
  return d;
}

double interpolate(const Array3& a, const ComponentLayout& l, const GridDesc& g, const Vec3& p) {
  return detail::Stencil(a.shape(), l, g, p).apply(a);
}

std::pair<double, double> stencil_bounds(const Array3& a, const ComponentLayout& l, const GridDesc& g,
                                         const Vec3& p) {
  return detail::Stencil(a.shape(), l, g, p).bounds(a);
}

Vec3 interpolate_vorticity(const VortField& w, const Vec3& p) {
  Vec3 r;
  for (int c : w.components()) r[c] = interpolate(w[c], w.layout(c), w.grid, p);
  return r;
}

Vec3 interpolate_faces(const FaceField& u, const Vec3& p) {
  Vec3 r;
  for (int a : u.components()) r[a] = interpolate(u[a], u.layout(a), u.grid, p);
  return r;
}

VelocitySampler::VelocitySampler(FaceField u) : u_(std::move(u)) {
  const GridDesc& g = u_.grid;
  require(u_.matches(g), "VelocitySampler: velocity layout does not match its grid");
  require(u_.all_finite(), "VelocitySampler: non-finite velocity");
  const double inv2 = 0.5 / g.dx;
  const double inv1 = 1.0 / g.dx;
  const int width = 1 + g.dim;
  for (int a : u_.components()) {
    const Array3& src = u_[a];
    const Index3 s = src.shape();
    Packed& P = packed_[a];
    P.shape = s;
    P.stride = {static_cast<std::ptrdiff_t>(s[1]) * s[2], s[2], 1};
    P.offset = u_.layout(a).offset;
    const auto& in = src.raw();
    P.data.assign(in.size() * width, 0.0);
    for (std::size_t n = 0; n < in.size(); ++n) P.data[n * width] = in[n];
    for (int b : u_.components()) {
      const std::ptrdiff_t st = src.stride(b);
      std::size_t n = 0;
      for (int i = 0; i < s[0]; ++i)
        for (int j = 0; j < s[1]; ++j)
          for (int k = 0; k < s[2]; ++k, ++n) {
            const int ib = b == 0 ? i : (b == 1 ? j : k);
            double d;
            if (ib > 0 && ib < s[b] - 1)
              d = (in[n + st] - in[n - st]) * inv2;
            else if (ib == 0)
              d = (in[n + st] - in[n]) * inv1;
            else
              d = (in[n] - in[n - st]) * inv1;
            P.data[n * width + 1 + b] = d;
          }
    }
  }
}

template <int D>
VelocitySample VelocitySampler::sample_dim(const Vec3& q) const {
  constexpr int W = 1 + D;
  constexpr int C = 1 << D;
  const GridDesc& g = u_.grid;
  const double inv_dx = 1.0 / g.dx;
  VelocitySample out;
  for (int a = 0; a < D; ++a) {
    const Packed& P = packed_[a];
    std::ptrdiff_t base = 0;
    double t[D];
    std::ptrdiff_t step[D];
    for (int ax = 0; ax < D; ++ax) {
      const int n = P.shape[ax];
      const double x = std::clamp((q[ax] - g.origin[ax]) * inv_dx - P.offset[ax], 0.0, double(n - 1));
      int lo = static_cast<int>(x);
      double f = x - lo;
      // Positions generated from sample indices land on the grid up to round-off.
      if (f > 1.0 - 1e-10) {
        ++lo;
        f = 0.0;
      } else if (f < 1e-10) {
        f = 0.0;
      }
      if (lo > n - 2) {
        lo = n - 2;
        f = 1.0;
      }
      base += lo * P.stride[ax];
      t[ax] = f;
      step[ax] = P.stride[ax] * W;
    }
    const double* d = P.data.data() + base * W;
    double acc[W] = {};
    for (int corner = 0; corner < C; ++corner) {
      double w = 1.0;
      std::ptrdiff_t off = 0;
      for (int ax = 0; ax < D; ++ax) {
        if (corner & (1 << (D - 1 - ax))) {
          w *= t[ax];
          off += step[ax];
        } else {
          w *= 1.0 - t[ax];
        }
      }
      const double* v = d + off;
      for (int k = 0; k < W; ++k) acc[k] += w * v[k];
    }
    out.value[a] = acc[0];
    for (int b = 0; b < D; ++b) out.grad(a, b) = acc[1 + b];
  }
  return out;
}

VelocitySample VelocitySampler::sample(const Vec3& p) const {
  for (int a = 0; a < 3; ++a)
    if (!std::isfinite(p[a])) throw ContractError("interpolate_velocity: non-finite position");
  return u_.grid.dim == 2 ? sample_dim<2>(p) : sample_dim<3>(p);
}

VelocitySample interpolate_velocity(const FaceField& u, const GridDesc& g, const Vec3& p) {
  require_grid(u.matches(g), "interpolate_velocity");
  return VelocitySampler(u).sample(p);
}

Mat3 inverse(const Mat3& a) {
  const double det = determinant(a);
  if (det == 0.0 || !std::isfinite(det)) throw ContractError("inverse: singular matrix");
  Mat3 r;
  r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / det;
  r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / det;
  r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / det;
  r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / det;
  r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / det;
  r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / det;
  r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / det;
  r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / det;
  r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / det;
  return r;
}

}  // namespace vxm
