#include <cmath>

#include "doctest.h"
#include "vortexmap/scenes.hpp"

using namespace vxm;

TEST_CASE("Taylor vortex profile") {
  const double U = 1.5, a = 0.3;
  CHECK(taylor_vortex(0.0, U, a) == doctest::Approx(2.0 * U / a * std::exp(0.5)));
  CHECK(std::abs(taylor_vortex(a * std::sqrt(2.0), U, a)) <= 1e-14);
  CHECK(taylor_vortex(0.5 * a, U, a) > 0.0);
  CHECK(taylor_vortex(2.0 * a, U, a) < 0.0);
}

TEST_CASE("Taylor vortex circulation by radial quadrature") {
  // Composite Simpson on 2 pi r w(r); the closed form of the same integral is
  // 2 pi a U e^{1/2} (R/a)^2 exp(-R^2 / 2a^2).
  const double U = 1.0, a = 0.3;
  for (double R : {0.5 * a, a, 2.0 * a, 6.0 * a}) {
    const int n = 2000;
    const double h = R / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double r = i * h;
      const double f = 2 * M_PI * r * taylor_vortex(r, U, a);
      s += f * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
    }
    s *= h / 3;
    const double closed = 2 * M_PI * a * U * std::exp(0.5) * (R * R / (a * a)) * std::exp(-R * R / (2 * a * a));
    CHECK(s == doctest::Approx(closed).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("Taylor scene places two vortices") {
  SceneOptions o;
  o.dims = Index3{48, 48, 1};
  const Simulation sim = build_scene("taylor2d", o);
  const GridDesc& g = sim.state().grid;
  CHECK(g.length(1) == doctest::Approx(2 * M_PI));
  CHECK(sim.state().w_init.max_abs() > 0.0);
}

TEST_CASE("ring in a z plane has no z vorticity") {
  const GridDesc g = GridDesc::make3d(24, 24, 24, 1.0 / 24);
  VortexRing r;
  r.center = {0.5, 0.5, 0.5};
  r.normal = {0, 0, 1};
  r.radius = 0.25;
  r.core = 0.06;
  const VortField w = vortex_ring(g, r);
  CHECK(w.max_abs() > 0.0);
  for (double v : w[2].raw()) CHECK(v == 0.0);
}

TEST_CASE("rasterized ring is nearly divergence free") {
  const GridDesc g = GridDesc::make3d(32, 32, 32, 1.0 / 32);
  VortexRing r;
  r.center = {0.5, 0.5, 0.5};
  r.normal = {1, 1, 0};
  r.radius = 0.22;
  r.core = 0.07;
  const VortField w = vortex_ring(g, r);
  const Array3 div = vorticity_divergence(w, g);
  double m = 0.0;
  for (double v : div.raw()) m = std::max(m, std::abs(v));
  CHECK(m <= 0.05 * w.max_abs() / g.dx);
}

TEST_CASE("mirrored rings cancel in total") {
  const GridDesc g = GridDesc::make3d(24, 24, 24, 1.0 / 24);
  VortexRing a, b;
  a.center = {0.3, 0.5, 0.5};
  a.normal = {1, 0, 0};
  b = a;
  b.center = {0.7, 0.5, 0.5};
  b.normal = {-1, 0, 0};
  a.radius = b.radius = 0.2;
  a.core = b.core = 0.06;
  const VortField w = vortex_ring(g, a) + vortex_ring(g, b);
  for (int c : w.components()) {
    double s = 0.0;
    for (double v : w[c].raw()) s += v;
    CHECK(std::abs(s) <= 1e-10 * w.max_abs() * static_cast<double>(w[c].size()));
  }
}

TEST_CASE("ring validation") {
  VortexRing r;
  r.radius = 0.05;
  r.core = 0.1;
  CHECK_THROWS_AS(r.validate(), ContractError);
  r.core = 0.0;
  CHECK_THROWS_AS(r.validate(), ContractError);
}

TEST_CASE("voxelize: empty disk and half-space floor") {
  const GridDesc g = GridDesc::make2d(32, 32, 1.0 / 32);
  SolidPrimitive disk;
  disk.center = {0.5, 0.5, 0};
  disk.radius = 0.0;
  CHECK(voxelize({disk}, g).solid_count() == 0);

  SolidPrimitive floor;
  floor.kind = SolidPrimitive::Kind::HalfSpace;
  floor.center = {0, 0.3, 0};
  floor.normal = {0, 1, 0};
  const SolidBoundary sb = voxelize({floor}, g);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      const double y = (j + 0.5) * g.dx;
      CHECK(static_cast<bool>(sb.solid[static_cast<std::size_t>(i) * 32 + j]) == (y < 0.3));
    }
}

TEST_CASE("voxelize: disk cell count matches centre inclusion") {
  const GridDesc g = GridDesc::make2d(512, 256, 1.0 / 256);
  SolidPrimitive disk;
  disk.center = {0.4, 0.503, 0};
  disk.radius = 0.141 / 2;
  std::size_t count = 0;
  for (int i = 0; i < 512; ++i)
    for (int j = 0; j < 256; ++j) {
      const double x = (i + 0.5) / 256.0 - 0.4, y = (j + 0.5) / 256.0 - 0.503;
      count += x * x + y * y < disk.radius * disk.radius;
    }
  CHECK(count > 0);
  CHECK(voxelize({disk}, g).solid_count() == count);
}

TEST_CASE("voxelize: wall velocities come from the primitive and the boundary") {
  const GridDesc g = GridDesc::make2d(16, 16, 1.0 / 16);
  SolidPrimitive box;
  box.kind = SolidPrimitive::Kind::Box;
  box.center = {0.5, 0.5, 0};
  box.half_extent = {0.1, 0.1, 0};
  box.velocity = {0.7, 0, 0};
  const SolidBoundary sb = voxelize({box}, g, {0.2, 0, 0});
  CHECK(sb.ambient[0] == 0.2);
  CHECK(sb.wall[0](8, 8, 0) == 0.7);
  CHECK(sb.wall[0](0, 3, 0) == 0.2);
}

TEST_CASE("unknown scene lists the catalog") {
  try {
    scene_defaults("nope");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& d : scene_catalog()) CHECK(msg.find(d.name) != std::string::npos);
  }
  CHECK_THROWS_AS(build_scene("nope"), ConfigError);
}

TEST_CASE("catalog defaults") {
  CHECK(scene_defaults("leapfrog2d").cfl == 1.0);
  CHECK(scene_defaults("leapfrog2d").reinit == 20);
  CHECK(scene_defaults("headon3d").cfl == 0.5);
  CHECK(scene_defaults("headon3d").reinit == 16);
  CHECK(scene_defaults("karman2d").inflow == 0.16);
}

TEST_CASE("built 2D scenes start divergence free") {
  for (const char* name : {"leapfrog2d", "taylor2d", "karman2d", "cavity2d"}) {
    const SceneDefaults& d = scene_defaults(name);
    SceneOptions o;
    o.dims = Index3{d.dims[0] / 8, d.dims[1] / 8, 1};
    const Simulation sim = build_scene(name, o);
    const Diagnostics diag = sim.diagnostics();
    INFO(name);
    CHECK(std::isfinite(diag.energy));
    CHECK(diag.mean_div_u <= 1e-5 * std::max(diag.max_u, 1e-12) / sim.state().grid.dx);
  }
}

TEST_CASE("scene construction is deterministic") {
  SceneOptions o;
  o.dims = Index3{32, 32, 1};
  const Simulation a = build_scene("leapfrog2d", o);
  const Simulation b = build_scene("leapfrog2d", o);
  CHECK(a.state().u == b.state().u);
}

TEST_CASE("head-on collision stays mirror symmetric over one step") {
  SceneOptions o;
  o.dims = Index3{16, 16, 16};
  o.poisson.tol = 1e-10;
  Simulation sim = build_scene("headon3d", o);
  auto asymmetry = [](const FaceField& u) {
    // Mirror x -> L - x: u_x flips sign, u_y and u_z are copied.
    double e = 0.0;
    for (int a : u.components()) {
      const Array3& c = u[a];
      const Index3 s = c.shape();
      const double sign = a == 0 ? -1.0 : 1.0;
      for (int i = 0; i < s[0]; ++i)
        for (int j = 0; j < s[1]; ++j)
          for (int k = 0; k < s[2]; ++k) e = std::max(e, std::abs(c(i, j, k) - sign * c(s[0] - 1 - i, j, k)));
    }
    return e;
  };
  const double scale = sim.state().u.max_abs();
  CHECK(scale > 0.0);
  CHECK(asymmetry(sim.state().u) <= 1e-10 * scale);
  sim.step();
  CHECK(asymmetry(sim.state().u) <= 1e-10 * scale);
}
