#pragma once

#include <array>
#include <cmath>

namespace vxm {

/// Fixed 3-vector. 2D quantities leave the z entry at zero.
struct Vec3 {
  std::array<double, 3> v{0.0, 0.0, 0.0};

  constexpr double& operator[](int i) { return v[i]; }
  constexpr double operator[](int i) const { return v[i]; }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) {
    for (int i = 0; i < 3; ++i) a.v[i] += b.v[i];
    return a;
  }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) {
    for (int i = 0; i < 3; ++i) a.v[i] -= b.v[i];
    return a;
  }
  friend constexpr Vec3 operator*(double s, Vec3 a) {
    for (int i = 0; i < 3; ++i) a.v[i] *= s;
    return a;
  }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return Vec3{{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]}};
}

/// Row-major 3x3 matrix. In 2D the z row and column stay those of the identity.
struct Mat3 {
  std::array<double, 9> m{0, 0, 0, 0, 0, 0, 0, 0, 0};

  static constexpr Mat3 identity() {
    Mat3 r;
    r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return r;
  }

  constexpr double& operator()(int r, int c) { return m[3 * r + c]; }
  constexpr double operator()(int r, int c) const { return m[3 * r + c]; }

  friend constexpr Mat3 operator+(Mat3 a, const Mat3& b) {
    for (int i = 0; i < 9; ++i) a.m[i] += b.m[i];
    return a;
  }
  friend constexpr Mat3 operator-(Mat3 a, const Mat3& b) {
    for (int i = 0; i < 9; ++i) a.m[i] -= b.m[i];
    return a;
  }
  friend constexpr Mat3 operator*(double s, Mat3 a) {
    for (int i = 0; i < 9; ++i) a.m[i] *= s;
    return a;
  }
  friend constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
        r(i, j) = s;
      }
    return r;
  }
  friend constexpr Vec3 operator*(const Mat3& a, const Vec3& x) {
    Vec3 r;
    for (int i = 0; i < 3; ++i) r[i] = a(i, 0) * x[0] + a(i, 1) * x[1] + a(i, 2) * x[2];
    return r;
  }
  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

inline Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
  return r;
}

inline double determinant(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Mat3 inverse(const Mat3& a);

}  // namespace vxm
