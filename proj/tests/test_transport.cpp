#include "doctest.h"

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "vortexmap/transport.hpp"

using namespace vxm;

namespace {

template <class F>
FaceField sample_faces(const GridDesc& g, F&& f) {
  FaceField u(g);
  for (int a : u.components()) {
    const auto l = u.layout(a);
    for (std::size_t n = 0; n < u[a].size(); ++n) u[a].raw()[n] = f(sample_position(g, l, u[a].unravel(n)))[a];
  }
  return u;
}

template <class F>
VortField sample_vorticity(const GridDesc& g, F&& f) {
  VortField w(g);
  for (int c : w.components()) {
    const auto l = w.layout(c);
    for (std::size_t n = 0; n < w[c].size(); ++n) w[c].raw()[n] = f(sample_position(g, l, w[c].unravel(n)))[c];
  }
  return w;
}

FlowMap shifted_maps(const GridDesc& g, Vec3 by) {
  FlowMap fm = reset_maps(g);
  for (int c : fm.map.components())
    for (Vec3& p : fm.map.block[c]) p = p + by;
  return fm;
}

}  // namespace

TEST_CASE("identity maps reproduce the field") {
  std::mt19937_64 rng(1);
  for (auto g : {GridDesc::make2d(8, 9, 0.1), GridDesc::make3d(5, 4, 6, 0.1)}) {
    const auto w = oracle::random_vorticity(g, rng);
    const FlowMap id = reset_maps(g);
    CHECK(pullback_line(w, id.map, id.jacobian) == w);
    CHECK(pushforward_line(w, id.map, id.jacobian) == w);
    const auto r = bfecc_pullback(w, id.map, id.jacobian, id.map, id.jacobian);
    CHECK(r.vorticity == w);
    CHECK(r.clamp_fraction() == 0.0);
  }
}

TEST_CASE("one-cell shift is exact in the interior") {
  std::mt19937_64 rng(2);
  const auto g = GridDesc::make2d(10, 10, 0.1);
  const auto w = oracle::random_vorticity(g, rng);
  const FlowMap back = shifted_maps(g, {-0.1, 0, 0});
  const FlowMap fwd = shifted_maps(g, {0.1, 0, 0});
  const auto p = pullback_line(w, back.map, back.jacobian);
  const auto b = bfecc_pullback(w, back.map, back.jacobian, fwd.map, fwd.jacobian);
  for (int i = 1; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) {
      CHECK(p.scalar()(i, j, 0) == doctest::Approx(w.scalar()(i - 1, j, 0)).epsilon(1e-13));
      if (i >= 2 && i <= 9) CHECK(b.vorticity.scalar()(i, j, 0) == doctest::Approx(w.scalar()(i - 1, j, 0)).epsilon(1e-12));
    }
  const auto q = pushforward_line(w, fwd.map, fwd.jacobian);
  for (int i = 0; i < 10; ++i) CHECK(q.scalar()(i, 3, 0) == doctest::Approx(w.scalar()(i + 1, 3, 0)).epsilon(1e-13));
}

TEST_CASE("pullback is linear and maps zero to zero") {
  std::mt19937_64 rng(3);
  const auto g = GridDesc::make3d(6, 5, 4, 0.2);
  const auto w = oracle::random_vorticity(g, rng);
  const auto v = oracle::random_vorticity(g, rng);
  const auto u = oracle::random_faces(g, rng);
  const FlowMap fm = rk4_joint_march(u, reset_maps(g), -0.05);
  const auto lhs = pullback_line(2.0 * w + (-0.5) * v, fm.map, fm.jacobian);
  const auto rhs = 2.0 * pullback_line(w, fm.map, fm.jacobian) + (-0.5) * pullback_line(v, fm.map, fm.jacobian);
  for (int c : lhs.components())
    for (std::size_t n = 0; n < lhs[c].size(); ++n) CHECK(std::abs(lhs[c].raw()[n] - rhs[c].raw()[n]) <= 1e-12);
  CHECK(pullback_line(VortField(g), fm.map, fm.jacobian).max_abs() == 0.0);
  CHECK(semi_lagrangian_vorticity(VortField(g), u, 0.05).max_abs() == 0.0);
}

TEST_CASE("clamped samples stay inside the transformed stencil bounds") {
  std::mt19937_64 rng(4);
  for (auto g : {GridDesc::make2d(12, 12, 0.1), GridDesc::make3d(6, 6, 6, 0.2)}) {
    const auto w = oracle::random_vorticity(g, rng);
    const auto u = oracle::random_faces(g, rng);
    const VelocitySampler s(u);
    const FlowMap back = rk4_joint_march(s, reset_maps(g), -0.1);
    const FlowMap fwd = rk4_joint_march(s, reset_maps(g), 0.1);
    const auto r = bfecc_pullback(w, back.map, back.jacobian, fwd.map, fwd.jacobian);
    CHECK(r.clamp_fraction() > 0.0);
    for (int c : w.components())
      for (std::size_t n = 0; n < w[c].size(); ++n) {
        if (g.dim == 2) {
          const auto [lo, hi] = stencil_bounds(w.scalar(), w.layout(2), g, back.map.block[2][n]);
          CHECK(r.vorticity.scalar().raw()[n] >= lo - 1e-14);
          CHECK(r.vorticity.scalar().raw()[n] <= hi + 1e-14);
        }
        if (!r.clamped[c][n]) continue;
        double lo = 0, hi = 0;
        for (int k : w.components()) {
          const auto [a, b] = stencil_bounds(w[k], w.layout(k), g, back.map.block[c][n]);
          const double J = back.jacobian.block[c][n](c, k);
          lo += std::min(J * a, J * b);
          hi += std::max(J * a, J * b);
        }
        CHECK(r.vorticity[c].raw()[n] >= lo - 1e-12);
        CHECK(r.vorticity[c].raw()[n] <= hi + 1e-12);
      }
  }
}

TEST_CASE("BFECC beats plain pullback on a rotated blob") {
  const auto g = GridDesc::make2d(64, 64, 2.0 / 64, {-1, -1, 0});
  const auto u = sample_faces(g, [](Vec3 p) { return Vec3{-p[1], p[0], 0}; });
  const VelocitySampler s(u);
  auto blob = [](double x, double y) { return std::exp(-((x - 0.4) * (x - 0.4) + y * y) / 0.02); };
  const auto w0 = sample_vorticity(g, [&](Vec3 p) { return Vec3{0, 0, blob(p[0], p[1])}; });
  VelocityBuffer buf;
  FlowMap fwd = reset_maps(g);
  const double dt = 0.02;
  for (int k = 0; k < 25; ++k) {
    buf.push(u, dt);
    fwd = march_forward(s, dt, fwd);
  }
  const FlowMap back = backtrace(buf, g);
  const auto plain = pullback_line(w0, back.map, back.jacobian);
  const auto corrected = bfecc_pullback(w0, back.map, back.jacobian, fwd.map, fwd.jacobian).vorticity;
  const double t = 0.5;
  double ep = 0, eb = 0;
  const Array3 shape(edge_layout(g, 2).shape);
  for (std::size_t n = 0; n < shape.size(); ++n) {
    const Vec3 p = sample_position(g, edge_layout(g, 2), shape.unravel(n));
    const double x = std::cos(t) * p[0] + std::sin(t) * p[1], y = -std::sin(t) * p[0] + std::cos(t) * p[1];
    const double ref = blob(x, y);
    ep += std::pow(plain.scalar().raw()[n] - ref, 2);
    eb += std::pow(corrected.scalar().raw()[n] - ref, 2);
  }
  MESSAGE("plain " << std::sqrt(ep) << " bfecc " << std::sqrt(eb));
  CHECK(eb <= ep);
  CHECK(corrected.max_abs() <= w0.max_abs());
}

TEST_CASE("pullback converges at second order under refinement") {
  auto run = [](int n) {
    const auto g = GridDesc::make2d(n, n, 2.0 / n, {-1, -1, 0});
    const auto u = sample_faces(g, [](Vec3 p) { return Vec3{-p[1], p[0], 0}; });
    auto blob = [](double x, double y) { return std::exp(-((x - 0.3) * (x - 0.3) + y * y) / 0.05); };
    const auto w0 = sample_vorticity(g, [&](Vec3 p) { return Vec3{0, 0, blob(p[0], p[1])}; });
    const FlowMap back = rk4_joint_march(u, reset_maps(g), -0.3);
    const auto w = pullback_line(w0, back.map, back.jacobian);
    double e = 0;
    const Array3 shape(edge_layout(g, 2).shape);
    for (std::size_t k = 0; k < shape.size(); ++k) {
      const Vec3 p = sample_position(g, edge_layout(g, 2), shape.unravel(k));
      const double x = std::cos(0.3) * p[0] + std::sin(0.3) * p[1], y = -std::sin(0.3) * p[0] + std::cos(0.3) * p[1];
      e = std::max(e, std::abs(w.scalar().raw()[k] - blob(x, y)));
    }
    return e;
  };
  const double coarse = run(32), fine = run(128);
  MESSAGE("coarse " << coarse << " fine " << fine);
  CHECK(coarse / fine >= 10.0);  // 4x refinement, ideal 16
}

TEST_CASE("pushforward undoes pullback for a smooth field") {
  const auto g = GridDesc::make2d(128, 128, 1.0 / 128);
  const double pi = std::acos(-1.0);
  const auto u = sample_faces(g, [&](Vec3 p) {
    return Vec3{std::sin(pi * p[0]) * std::cos(pi * p[1]), -std::cos(pi * p[0]) * std::sin(pi * p[1]), 0};
  });
  const VelocitySampler s(u);
  const auto w = sample_vorticity(g, [&](Vec3 p) {
    return Vec3{0, 0, std::exp(-((p[0] - 0.4) * (p[0] - 0.4) + (p[1] - 0.5) * (p[1] - 0.5)) / 0.01)};
  });
  VelocityBuffer buf;
  FlowMap fwd = reset_maps(g);
  const double dt = g.dx / u.max_abs();
  for (int k = 0; k < 10; ++k) {
    buf.push(u, dt);
    fwd = march_forward(s, dt, fwd);
  }
  const FlowMap back = backtrace(buf, g);
  const auto round = pushforward_line(pullback_line(w, back.map, back.jacobian), fwd.map, fwd.jacobian);
  double e = 0;
  for (std::size_t n = 0; n < round.scalar().size(); ++n)
    e = std::max(e, std::abs(round.scalar().raw()[n] - w.scalar().raw()[n]));
  CHECK(e <= 0.05 * w.max_abs());
}

TEST_CASE("semi-Lagrangian baseline") {
  std::mt19937_64 rng(5);
  const auto g = GridDesc::make2d(10, 10, 0.1);
  const auto w = oracle::random_vorticity(g, rng);
  CHECK(semi_lagrangian_vorticity(w, FaceField(g), 0.1) == w);
  const auto c = sample_faces(g, [](Vec3) { return Vec3{0, 1.0, 0}; });
  const auto s = semi_lagrangian_vorticity(w, c, 0.1);
  for (int i = 0; i <= 10; ++i)
    for (int j = 1; j <= 10; ++j) CHECK(s.scalar()(i, j, 0) == doctest::Approx(w.scalar()(i, j - 1, 0)).epsilon(1e-12));
  CHECK_THROWS_AS(semi_lagrangian_vorticity(w, c, 0.0), ContractError);
}

TEST_CASE("surface transport") {
  std::mt19937_64 rng(6);
  const auto g = GridDesc::make2d(10, 10, 0.1);
  const auto m = oracle::random_faces(g, rng);
  const FlowMap id = reset_maps(g, Stagger::Face);
  CHECK(transport_surface(m, id.map, id.jacobian) == m);
  FlowMap sh = id;
  for (int a : sh.map.components())
    for (Vec3& p : sh.map.block[a]) p = p + Vec3{0.1, 0, 0};
  const auto t = transport_surface(m, sh.map, sh.jacobian);
  for (int i = 0; i < 10; ++i) CHECK(t[0](i, 4, 0) == doctest::Approx(m[0](i + 1, 4, 0)).epsilon(1e-13));
  // Transposed Jacobian mixes components the opposite way to the line rule.
  FlowMap shear = id;
  for (int a : shear.jacobian.components())
    for (Mat3& J : shear.jacobian.block[a]) J(0, 1) = 2.0;
  const auto s = transport_surface(m, shear.map, shear.jacobian);
  CHECK(s[0](3, 4, 0) == doctest::Approx(m[0](3, 4, 0)));
  const Vec3 at = sample_position(g, face_layout(g, 1), {3, 4, 0});
  CHECK(s[1](3, 4, 0) == doctest::Approx(m[1](3, 4, 0) + 2.0 * interpolate_faces(m, at)[0]));
}
