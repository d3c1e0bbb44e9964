#include "doctest.h"

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "vortexmap/grid.hpp"

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

double brute_bilinear(const Array3& arr, const ComponentLayout& l, const GridDesc& g, Vec3 p) {
  // Clamp to the sample box, then weight the four surrounding samples.
  double q[2];
  int lo[2];
  for (int a = 0; a < 2; ++a) {
    q[a] = (p[a] - g.origin[a]) / g.dx - l.offset[a];
    q[a] = std::clamp(q[a], 0.0, double(arr.shape()[a] - 1));
    lo[a] = std::min(int(std::floor(q[a])), arr.shape()[a] - 2);
  }
  const double tx = q[0] - lo[0], ty = q[1] - lo[1];
  return (1 - tx) * (1 - ty) * arr(lo[0], lo[1], 0) + tx * (1 - ty) * arr(lo[0] + 1, lo[1], 0) +
         (1 - tx) * ty * arr(lo[0], lo[1] + 1, 0) + tx * ty * arr(lo[0] + 1, lo[1] + 1, 0);
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(GridDesc::make2d(3, 8, 0.1).validate(), ContractError);
  CHECK_THROWS_AS(GridDesc::make2d(8, 8, 0.0).validate(), ContractError);
  CHECK_NOTHROW(GridDesc::make3d(4, 4, 4, 0.1).validate());
}

TEST_CASE("component shapes") {
  const auto g = GridDesc::make3d(4, 5, 6, 0.1);
  CHECK(face_layout(g, 0).shape == Index3{5, 5, 6});
  CHECK(face_layout(g, 2).shape == Index3{4, 5, 7});
  CHECK(edge_layout(g, 0).shape == Index3{4, 6, 7});
  CHECK(edge_layout(g, 2).shape == Index3{5, 6, 6});
  const auto h = GridDesc::make2d(4, 5, 0.1);
  CHECK(edge_layout(h, 2).shape == Index3{5, 6, 1});
  CHECK(VortField(h).size() == 30);
}

TEST_CASE("curl of uniform flow vanishes; rigid rotation gives two") {
  const auto g = GridDesc::make2d(8, 8, 0.125, {-0.5, -0.5, 0});
  const auto uni = sample_faces(g, [](Vec3) { return Vec3{1, 0, 0}; });
  const auto w0 = curl_velocity(uni, g, {1, 0, 0});
  CHECK(w0.max_abs() == doctest::Approx(0.0));
  const auto rot = sample_faces(g, [](Vec3 p) { return Vec3{-p[1], p[0], 0}; });
  const auto w = curl_velocity(rot, g);
  for (int i = 1; i < 8; ++i)
    for (int j = 1; j < 8; ++j) CHECK(w.scalar()(i, j, 0) == doctest::Approx(2.0));
}

TEST_CASE("2D curl and divergence equal per-sample brute-force loops") {
  std::mt19937_64 rng(1);
  const auto g = GridDesc::make2d(6, 6, 0.3);
  const auto u = oracle::random_faces(g, rng);
  const auto w = curl_velocity(u, g);
  for (int i = 0; i <= 6; ++i)
    for (int j = 0; j <= 6; ++j) {
      auto ux = [&](int a, int b) { return (b >= 0 && b < 6) ? u[0](a, b, 0) : 0.0; };
      auto uy = [&](int a, int b) { return (a >= 0 && a < 6) ? u[1](a, b, 0) : 0.0; };
      const double ref = ((uy(i, j) - uy(i - 1, j)) - (ux(i, j) - ux(i, j - 1))) / g.dx;
      CHECK(w.scalar()(i, j, 0) == doctest::Approx(ref).epsilon(1e-13));
    }
  const auto d = divergence(u, g);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(d.values(i, j, 0) ==
            doctest::Approx((u[0](i + 1, j, 0) - u[0](i, j, 0) + u[1](i, j + 1, 0) - u[1](i, j, 0)) / g.dx));
}

TEST_CASE("curl of vorticity equals brute-force stencil") {
  std::mt19937_64 rng(2);
  const auto g = GridDesc::make2d(6, 6, 0.3);
  const auto w = oracle::random_vorticity(g, rng);
  const auto f = curl_vorticity(w, g);
  const auto& s = w.scalar();
  for (int i = 0; i <= 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(f[0](i, j, 0) == doctest::Approx((s(i, j + 1, 0) - s(i, j, 0)) / g.dx));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j <= 6; ++j) CHECK(f[1](i, j, 0) == doctest::Approx(-(s(i + 1, j, 0) - s(i, j, 0)) / g.dx));
  VortField c(g);
  c.scalar().fill(3.0);
  const auto fc = curl_vorticity(c, g);
  CHECK(fc.max_abs() == 0.0);
}

TEST_CASE("curl_vorticity is the transpose of curl_velocity") {
  std::mt19937_64 rng(3);
  for (auto g : {GridDesc::make2d(6, 7, 0.2), GridDesc::make3d(4, 5, 6, 0.2)}) {
    const auto u = oracle::random_faces(g, rng);
    const auto w = oracle::random_vorticity(g, rng);
    const auto cu = curl_velocity(u, g);
    const auto cw = curl_vorticity(w, g);
    double lhs = 0, rhs = 0;
    for (int c : w.components())
      for (std::size_t n = 0; n < w[c].size(); ++n) lhs += cu[c].raw()[n] * w[c].raw()[n];
    for (int a : u.components())
      for (std::size_t n = 0; n < u[a].size(); ++n) rhs += u[a].raw()[n] * cw[a].raw()[n];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("3D curl matches the circulation oracle") {
  std::mt19937_64 rng(4);
  const auto g = GridDesc::make3d(4, 5, 4, 0.5);
  const auto u = oracle::random_faces(g, rng);
  const auto w = curl_velocity(u, g);
  const oracle::FaceNumbering fn(g);
  std::vector<double> flat(fn.total);
  for (int a = 0; a < 3; ++a)
    for (std::size_t n = 0; n < u[a].size(); ++n) flat[fn.offset[a] + n] = u[a].raw()[n];
  for (const auto& row : oracle::circulation_rows(SolidBoundary::closed_box(g), fn)) {
    double s = 0;
    for (auto [id, c] : row.entries) s += c * flat[id];
    CHECK(w[row.comp][row.e] == doctest::Approx(s / g.dx).epsilon(1e-13));
  }
}

TEST_CASE("discrete identities: div curl = 0") {
  std::mt19937_64 rng(5);
  const auto g = GridDesc::make3d(5, 6, 4, 0.25);
  const auto u = oracle::random_faces(g, rng);
  const auto dw = vorticity_divergence(curl_velocity(u, g), g);
  const double scale = curl_velocity(u, g).max_abs() / g.dx;
  for (int i = 1; i < 5; ++i)
    for (int j = 1; j < 6; ++j)
      for (int k = 1; k < 4; ++k) CHECK(std::abs(dw(i, j, k)) <= 1e-12 * scale);
  CHECK_THROWS_AS(vorticity_divergence(VortField(GridDesc::make2d(4, 4, 1)), GridDesc::make2d(4, 4, 1)),
                  ContractError);

  // 2D: velocity from a nodal scalar through curl_vorticity has zero divergence.
  const auto h = GridDesc::make2d(7, 6, 0.2);
  const auto psi = oracle::random_vorticity(h, rng);
  const auto d = divergence(curl_vorticity(psi, h), h);
  for (double v : d.values.values()) CHECK(std::abs(v) <= 1e-12 * psi.max_abs() / (h.dx * h.dx));
}

TEST_CASE("vorticity divergence of a linear x-component") {
  const auto g = GridDesc::make3d(5, 5, 5, 0.2);
  VortField w(g);
  const auto l = w.layout(0);
  for (std::size_t n = 0; n < w[0].size(); ++n) w[0].raw()[n] = sample_position(g, l, w[0].unravel(n))[0];
  const auto d = vorticity_divergence(w, g);
  for (int i = 1; i < 5; ++i)
    for (int j = 1; j < 5; ++j)
      for (int k = 1; k < 5; ++k) CHECK(d(i, j, k) == doctest::Approx(1.0));
}

TEST_CASE("divergence of (x, 0) is one") {
  const auto g = GridDesc::make2d(6, 6, 0.1);
  const auto u = sample_faces(g, [](Vec3 p) { return Vec3{p[0], 0, 0}; });
  const auto d = divergence(u, g);
  for (double v : d.values.values()) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("velocity interpolation") {
  const auto g = GridDesc::make2d(8, 8, 0.125);
  std::mt19937_64 rng(6);
  const auto u = oracle::random_faces(g, rng);
  const auto s = interpolate_velocity(u, g, sample_position(g, face_layout(g, 0), {3, 5, 0}));
  CHECK(s.value[0] == u[0](3, 5, 0));

  const auto lin = sample_faces(g, [](Vec3 p) { return Vec3{p[0], -p[1], 0}; });
  const VelocitySampler sampler(lin);
  std::uniform_real_distribution<double> U(0.1, 0.9);
  for (int t = 0; t < 50; ++t) {
    const Vec3 p{U(rng), U(rng), 0};
    const auto v = sampler.sample(p);
    CHECK(v.value[0] == doctest::Approx(p[0]).epsilon(1e-12));
    CHECK(v.value[1] == doctest::Approx(-p[1]).epsilon(1e-12));
    CHECK(v.grad(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.grad(1, 1) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(v.grad(0, 1)) <= 1e-12);
    CHECK(std::abs(v.grad(1, 0)) <= 1e-12);
  }
  std::uniform_real_distribution<double> W(-0.2, 1.2);
  for (int t = 0; t < 100; ++t) {
    const Vec3 p{W(rng), W(rng), 0};
    const auto v = interpolate_faces(u, p);
    CHECK(v[0] == doctest::Approx(brute_bilinear(u[0], face_layout(g, 0), g, p)).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(brute_bilinear(u[1], face_layout(g, 1), g, p)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(sampler.sample({std::nan(""), 0.5, 0}), ContractError);
}

TEST_CASE("3D linear fields are reproduced with their gradient") {
  const auto g = GridDesc::make3d(6, 6, 6, 0.2);
  const Mat3 G{{0.3, -1.0, 0.5, 2.0, -0.2, 0.1, -0.7, 0.4, -0.1}};
  const auto u = sample_faces(g, [&](Vec3 p) { return G * p + Vec3{0.1, 0.2, 0.3}; });
  const VelocitySampler sampler(u);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.2, 1.0);
  for (int t = 0; t < 30; ++t) {
    const Vec3 p{U(rng), U(rng), U(rng)};
    const auto s = sampler.sample(p);
    const Vec3 ref = G * p + Vec3{0.1, 0.2, 0.3};
    for (int a = 0; a < 3; ++a) {
      CHECK(s.value[a] == doctest::Approx(ref[a]).epsilon(1e-12));
      for (int b = 0; b < 3; ++b) CHECK(s.grad(a, b) == doctest::Approx(G(a, b)).epsilon(1e-12));
    }
  }
}

TEST_CASE("operators are pure") {
  std::mt19937_64 rng(8);
  const auto g = GridDesc::make3d(4, 4, 5, 0.3);
  const auto u = oracle::random_faces(g, rng);
  CHECK(curl_velocity(u, g) == curl_velocity(u, g));
  CHECK(divergence(u, g).values == divergence(u, g).values);
}
