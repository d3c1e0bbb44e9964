#include "vortexmap/scenes.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

namespace vxm {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  require(n > 0.0, "zero-length direction");
  return (1.0 / n) * v;
}

double gaussian_core(double d2, double strength, double a) { return strength / (kPi * a * a) * std::exp(-d2 / (a * a)); }

/// Physical height of each scene's domain; dx = height / ny.
double scene_height(const std::string& name) {
  if (name == "taylor2d") return 2.0 * kPi;
  if (name == "headon3d") return 2.0;
  return 1.0;
}

VortField gaussians(const GridDesc& g, const std::vector<GaussianVortex>& vs) {
  return rasterize_vorticity(g, [&](const Vec3& p) {
    double w = 0.0;
    for (const auto& v : vs) {
      const double dx = p[0] - v.center[0], dy = p[1] - v.center[1];
      w += gaussian_core(dx * dx + dy * dy, v.strength, v.radius);
    }
    return Vec3{0, 0, w};
  });
}

std::function<Vec3(const Vec3&)> ring_sum(std::vector<VortexRing> rings) {
  for (const auto& r : rings) r.validate();
  return [rings = std::move(rings)](const Vec3& p) {
    Vec3 w;
    for (const auto& r : rings) w = w + r.at(p);
    return w;
  };
}

void warn_if_outside(const GridDesc& g, const VortexRing& r) {
  const Vec3 n = normalized(r.normal);
  for (int a = 0; a < 3; ++a) {
    const double reach = (r.radius + 2.0 * r.core) * std::sqrt(std::max(0.0, 1.0 - n[a] * n[a])) + 2.0 * r.core * std::abs(n[a]);
    if (r.center[a] - reach < g.origin[a] || r.center[a] + reach > g.origin[a] + g.length(a)) {
      std::cerr << "warning: vortex ring extends beyond the domain and is clipped\n";
      return;
    }
  }
}

}  // namespace

double taylor_vortex(double r, double U, double a) {
  require(a > 0.0, "taylor_vortex: radius must be positive");
  const double q = r * r / (a * a);
  return U / a * (2.0 - q) * std::exp(0.5 * (1.0 - q));
}

void VortexRing::validate() const {
  require(core > 0.0 && radius > core, "vortex ring: need radius > core > 0");
  require(norm(normal) > 0.0, "vortex ring: zero normal");
}

Vec3 VortexRing::at(const Vec3& p) const {
  const Vec3 n = normalized(normal);
  const Vec3 rel = p - center;
  const double h = dot(rel, n);
  const Vec3 radial = rel - h * n;
  const double rho = norm(radial);
  if (rho == 0.0) return {};
  const double d2 = (rho - radius) * (rho - radius) + h * h;
  const Vec3 tangent = cross(n, (1.0 / rho) * radial);
  return gaussian_core(d2, strength, core) * tangent;
}

Vec3 TrefoilTube::at(const Vec3& p) const {
  // Line integral of a Gaussian tube kernel along the closed curve; for a
  // straight segment this reproduces the ring profile G/(pi a^2) exp(-d^2/a^2).
  auto curve = [&](double t) {
    return center + scale * Vec3{std::sin(t) + 2.0 * std::sin(2.0 * t), std::cos(t) - 2.0 * std::cos(2.0 * t),
                                 -std::sin(3.0 * t)};
  };
  const double cut = 16.0 * core * core;
  const double k = strength / (std::pow(kPi, 1.5) * core * core * core);
  const double h = 2.0 * kPi / segments;
  Vec3 w;
  for (int s = 0; s < segments; ++s) {
    const Vec3 a = curve(s * h), b = curve((s + 1) * h);
    const Vec3 mid = 0.5 * (a + b);
    const Vec3 d = p - mid;
    const double d2 = dot(d, d);
    if (d2 > cut) continue;
    w = w + (k * std::exp(-d2 / (core * core))) * (b - a);
  }
  return w;
}

VortField rasterize_vorticity(const GridDesc& g, const std::function<Vec3(const Vec3&)>& f) {
  VortField w(g);
  static const double gp[3] = {-std::sqrt(0.6) / 2.0, 0.0, std::sqrt(0.6) / 2.0};
  static const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  for (int c : w.components()) {
    const auto l = w.layout(c);
    auto& arr = w[c];
    const int a = (c + 1) % 3, b = (c + 2) % 3;
    for (std::size_t n = 0; n < arr.size(); ++n) {
      const Vec3 p = sample_position(g, l, arr.unravel(n));
      if (g.dim == 2) {
        arr.raw()[n] = f(p)[2];
        continue;
      }
      double s = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          Vec3 q = p;
          q[a] += gp[i] * g.dx;
          q[b] += gp[j] * g.dx;
          s += gw[i] * gw[j] * f(q)[c];
        }
      arr.raw()[n] = s;
    }
  }
  return w;
}

VortField vortex_ring(const GridDesc& g, const VortexRing& ring) {
  require(g.dim == 3, "vortex_ring: 3D grids only");
  ring.validate();
  warn_if_outside(g, ring);
  return rasterize_vorticity(g, [&](const Vec3& p) { return ring.at(p); });
}

double SolidPrimitive::sdf(const Vec3& p, int dim) const {
  switch (kind) {
    case Kind::Sphere: {
      Vec3 d = p - center;
      if (dim == 2) d[2] = 0.0;
      return norm(d) - radius;
    }
    case Kind::Box: {
      double outside = 0.0, inside = -INFINITY;
      for (int a = 0; a < dim; ++a) {
        const double q = std::abs(p[a] - center[a]) - half_extent[a];
        outside += q > 0 ? q * q : 0.0;
        inside = std::max(inside, q);
      }
      return outside > 0 ? std::sqrt(outside) : inside;
    }
    case Kind::HalfSpace:
      return dot(p - center, normalized(normal));
  }
  return 1.0;
}

SolidBoundary voxelize(const std::vector<SolidPrimitive>& prims, const GridDesc& g, Vec3 boundary_velocity) {
  SolidBoundary sb = SolidBoundary::closed_box(g);
  sb.ambient = boundary_velocity;
  std::vector<int> owner(g.cell_count(), -1);
  const Array3 cells(g.dims);
  const auto cl = cell_layout(g);
  for (std::size_t n = 0; n < cells.size(); ++n) {
    const Vec3 p = sample_position(g, cl, cells.unravel(n));
    for (std::size_t k = 0; k < prims.size(); ++k)
      if (prims[k].sdf(p, g.dim) < 0.0) {
        owner[n] = static_cast<int>(k);
        sb.solid[n] = 1;
        break;
      }
  }
  for (int a : sb.wall.components()) {
    auto& arr = sb.wall[a];
    for (std::size_t n = 0; n < arr.size(); ++n) {
      const Index3 f = arr.unravel(n);
      const Index3 lo = shifted(f, a, -1);
      double v = 0.0;
      bool set = false;
      for (const Index3& c : {lo, f}) {
        if (!cells.contains(c)) continue;
        const int k = owner[cells.linear(c)];
        if (k >= 0) {
          v = prims[k].velocity[a];
          set = true;
          break;
        }
      }
      if (!set && (!cells.contains(lo) || !cells.contains(f))) v = boundary_velocity[a];
      arr.raw()[n] = v;
    }
  }
  return sb;
}

const std::vector<SceneDefaults>& scene_catalog() {
  static const std::vector<SceneDefaults> catalog = {
      {"leapfrog2d", "two co-moving vortex pairs in a closed box", 2, {256, 256, 1}, 1.0, 20, 0.0, 0.0},
      {"taylor2d", "two Taylor vortices 0.81 apart", 2, {256, 256, 1}, 1.0, 20, 0.0, 0.0},
      {"karman2d", "free stream 0.16 past a 0.141 disk (Re 2250)", 2, {512, 256, 1}, 1.0, 20, 0.16 * 0.141 / 2250.0,
       0.16},
      {"cavity2d", "lid-driven cavity, lid speed 1 (Re 5000)", 2, {256, 256, 1}, 1.0, 20, 1.0 / 5000.0, 1.0},
      {"leapfrog3d", "two coaxial vortex rings", 3, {256, 128, 128}, 0.5, 20, 0.0, 0.0},
      {"headon3d", "two vortex rings on a head-on course", 3, {128, 256, 256}, 0.5, 16, 0.0, 0.0},
      {"oblique3d", "two vortex rings on perpendicular courses", 3, {128, 128, 128}, 0.5, 10, 0.0, 0.0},
      {"trefoil3d-parametric", "parametric trefoil vortex tube", 3, {128, 128, 128}, 0.5, 10, 0.0, 0.0},
      {"paddle3d", "square paddle sweeping through a closed box", 3, {256, 128, 128}, 0.5, 8, 0.0, 0.0},
  };
  return catalog;
}

const SceneDefaults& scene_defaults(const std::string& name) {
  for (const auto& s : scene_catalog())
    if (s.name == name) return s;
  std::string known;
  for (const auto& s : scene_catalog()) known += (known.empty() ? "" : ", ") + s.name;
  throw ConfigError("unknown scene '" + name + "' (available: " + known + ")");
}

GridDesc scene_grid(const SceneDefaults& d, const Index3& dims) {
  const double dx = scene_height(d.name) / dims[1];
  return d.dim == 2 ? GridDesc::make2d(dims[0], dims[1], dx) : GridDesc::make3d(dims[0], dims[1], dims[2], dx);
}

Simulation build_scene(const std::string& name, const SceneOptions& opts) {
  const SceneDefaults& d = scene_defaults(name);
  Index3 dims = opts.dims.value_or(d.dims);
  if (d.dim == 2) dims[2] = 1;
  const GridDesc g = scene_grid(d, dims);
  const Vec3 L{g.length(0), g.length(1), g.length(2)};
  const Vec3 mid = 0.5 * L;

  SolverConfig cfg;
  cfg.cfl = opts.cfl.value_or(d.cfl);
  cfg.reinit = opts.reinit.value_or(d.reinit);
  cfg.nu = opts.nu.value_or(d.nu);
  cfg.poisson = opts.poisson;
  cfg.scheme = opts.scheme;
  cfg.dt_max = opts.dt_max;

  SolidBoundary solids = SolidBoundary::closed_box(g);
  SolidMotion motion;
  VortField w(g);

  if (name == "leapfrog2d") {
    const double x0 = 0.2, outer = 0.25, inner = 0.12, a = 0.02, G = 0.1;
    w = gaussians(g, {{{x0, 0.5 + outer, 0}, G, a},
                      {{x0, 0.5 - outer, 0}, -G, a},
                      {{x0, 0.5 + inner, 0}, G, a},
                      {{x0, 0.5 - inner, 0}, -G, a}});
  } else if (name == "taylor2d") {
    const double a = 0.3, U = 1.0, sep = 0.81;
    w = rasterize_vorticity(g, [&](const Vec3& p) {
      const double r1 = std::hypot(p[0] - mid[0] + 0.5 * sep, p[1] - mid[1]);
      const double r2 = std::hypot(p[0] - mid[0] - 0.5 * sep, p[1] - mid[1]);
      return Vec3{0, 0, taylor_vortex(r1, U, a) + taylor_vortex(r2, U, a)};
    });
  } else if (name == "karman2d") {
    SolidPrimitive disk;
    disk.center = {0.4, 0.5 + 0.003, 0};
    disk.radius = 0.5 * 0.141;
    solids = voxelize({disk}, g, {d.inflow, 0, 0});
    solids.open_domain = true;
  } else if (name == "cavity2d") {
    // One-cell solid frame; the lid row carries the tangential velocity.
    SolidPrimitive lid, floor, left, right;
    lid.kind = floor.kind = left.kind = right.kind = SolidPrimitive::Kind::Box;
    lid.center = {mid[0], L[1], 0};
    lid.half_extent = {L[0], g.dx, 1};
    lid.velocity = {d.inflow, 0, 0};
    floor.center = {mid[0], 0, 0};
    floor.half_extent = {L[0], g.dx, 1};
    left.center = {0, mid[1], 0};
    left.half_extent = {g.dx, L[1], 1};
    right.center = {L[0], mid[1], 0};
    right.half_extent = {g.dx, L[1], 1};
    solids = voxelize({lid, floor, left, right}, g);
  } else if (name == "leapfrog3d") {
    const double R = 0.21 * L[1], a = std::max(0.06 * L[1], 1.5 * g.dx), G = 2.0 * kPi * a;
    VortexRing r1{{0.25 * L[0], mid[1], mid[2]}, {1, 0, 0}, R, a, G};
    VortexRing r2 = r1;
    r2.center[0] += 0.45 * R;
    warn_if_outside(g, r1);
    w = rasterize_vorticity(g, ring_sum({r1, r2}));
  } else if (name == "headon3d") {
    const double R = 0.2 * std::min(L[1], L[2]), a = std::max(0.25 * R, 1.5 * g.dx), G = 2.0 * kPi * a;
    VortexRing r1{{0.25 * L[0], mid[1], mid[2]}, {1, 0, 0}, R, a, G};
    VortexRing r2{{0.75 * L[0], mid[1], mid[2]}, {-1, 0, 0}, R, a, G};
    warn_if_outside(g, r1);
    w = rasterize_vorticity(g, ring_sum({r1, r2}));
  } else if (name == "oblique3d") {
    const double R = 0.15 * L[1], a = std::max(0.25 * R, 1.5 * g.dx), G = 2.0 * kPi * a;
    const double s = std::sqrt(0.5), D = 0.25 * L[0];
    const Vec3 n1{s, s, 0}, n2{s, -s, 0};
    VortexRing r1{mid - D * n1, n1, R, a, G};
    VortexRing r2{mid - D * n2, n2, R, a, G};
    warn_if_outside(g, r1);
    w = rasterize_vorticity(g, ring_sum({r1, r2}));
  } else if (name == "trefoil3d-parametric") {
    TrefoilTube t;
    t.center = mid;
    t.scale = 0.08 * L[1];
    t.core = std::max(0.03 * L[1], 1.5 * g.dx);
    t.strength = 2.0 * kPi * t.core;
    w = rasterize_vorticity(g, [t](const Vec3& p) { return t.at(p); });
  } else if (name == "paddle3d") {
    const double amp = 0.25 * L[0], period = 4.0;
    const Vec3 half{0.03 * L[1] + 0.5 * g.dx, 0.2 * L[1], 0.2 * L[2]};
    motion = [g, amp, period, half, mid](double t) {
      SolidPrimitive paddle;
      paddle.kind = SolidPrimitive::Kind::Box;
      paddle.half_extent = half;
      paddle.center = mid + Vec3{amp * std::sin(2.0 * kPi * t / period), 0, 0};
      paddle.velocity = {amp * 2.0 * kPi / period * std::cos(2.0 * kPi * t / period), 0, 0};
      return voxelize({paddle}, g);
    };
    solids = motion(0.0);
  }

  SimState s = make_state(g, cfg, solids, solids.wall);
  s.motion = motion;
  Simulation sim(std::move(s));
  sim.project(w);
  return sim;
}

}  // namespace vxm
