#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace vxm {

using Index3 = std::array<int, 3>;

/// Dense scalar array of up to three axes, row-major (last axis fastest).
/// 2D data uses an extent of 1 along z.
class Array3 {
 public:
  Array3() = default;
  explicit Array3(Index3 shape, double fill = 0.0)
      : shape_(shape), data_(static_cast<std::size_t>(shape[0]) * shape[1] * shape[2], fill) {}

  const Index3& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t linear(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k;
  }
  std::size_t linear(const Index3& x) const { return linear(x[0], x[1], x[2]); }
  Index3 unravel(std::size_t n) const {
    const int k = static_cast<int>(n % shape_[2]);
    n /= shape_[2];
    const int j = static_cast<int>(n % shape_[1]);
    return {static_cast<int>(n / shape_[1]), j, k};
  }
  bool contains(const Index3& x) const {
    for (int a = 0; a < 3; ++a)
      if (x[a] < 0 || x[a] >= shape_[a]) return false;
    return true;
  }
  /// Distance in linear storage between neighbours along `axis`.
  std::ptrdiff_t stride(int axis) const {
    if (axis == 2) return 1;
    if (axis == 1) return shape_[2];
    return static_cast<std::ptrdiff_t>(shape_[1]) * shape_[2];
  }

  double& operator()(int i, int j, int k) { return data_[linear(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[linear(i, j, k)]; }
  double& operator[](const Index3& x) { return data_[linear(x)]; }
  double operator[](const Index3& x) const { return data_[linear(x)]; }
  /// Value at `x`, or `outside` when `x` lies off the array.
  double get_or(const Index3& x, double outside) const { return contains(x) ? data_[linear(x)] : outside; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Array3&, const Array3&) = default;

 private:
  Index3 shape_{0, 0, 0};
  std::vector<double> data_;
};

inline Index3 shifted(Index3 x, int axis, int by) {
  x[axis] += by;
  return x;
}

}  // namespace vxm
