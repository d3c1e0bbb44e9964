#pragma once

#include <array>
#include <span>
#include <utility>

#include "vortexmap/array3.hpp"
#include "vortexmap/error.hpp"
#include "vortexmap/small_matrix.hpp"

namespace vxm {

/// Uniform Cartesian grid: cell counts per axis, cell width and min corner.
/// 2D grids carry dims[2] == 1 and ignore the z origin.
struct GridDesc {
  int dim = 2;
  Index3 dims{4, 4, 1};
  double dx = 1.0;
  Vec3 origin{};

  static GridDesc make2d(int nx, int ny, double dx, Vec3 origin = {});
  static GridDesc make3d(int nx, int ny, int nz, double dx, Vec3 origin = {});

  void validate() const;
  std::size_t cell_count() const { return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]; }
  double length(int axis) const { return dims[axis] * dx; }
  /// Clamp a position into the closed domain box.
  Vec3 clamp_to_domain(Vec3 p) const;

  friend bool operator==(const GridDesc&, const GridDesc&) = default;
};

/// Shape and sub-cell offset (in units of dx) of one staggered component array.
struct ComponentLayout {
  Index3 shape{1, 1, 1};
  std::array<double, 3> offset{0.5, 0.5, 0.5};
};

ComponentLayout face_layout(const GridDesc& g, int axis);
/// Vorticity component `c`: 2D nodes (c == 2), 3D edges parallel to axis c.
ComponentLayout edge_layout(const GridDesc& g, int c);
ComponentLayout cell_layout(const GridDesc& g);
ComponentLayout node_layout(const GridDesc& g);

Vec3 sample_position(const GridDesc& g, const ComponentLayout& l, const Index3& idx);

/// Axes carrying a velocity component.
std::span<const int> face_axes(int dim);
/// Vorticity components stored for the given dimension ({2} in 2D, {0,1,2} in 3D).
std::span<const int> vort_components(int dim);

enum class Stagger { Face, Edge };

/// Per-component arrays laid out on faces (velocity) or edges (vorticity).
template <Stagger S>
struct StaggeredField {
  GridDesc grid;
  std::array<Array3, 3> comp;

  StaggeredField() = default;
  explicit StaggeredField(const GridDesc& g) : grid(g) {
    for (int c : components()) comp[c] = Array3(layout(c).shape);
  }

  std::span<const int> components() const {
    return S == Stagger::Face ? face_axes(grid.dim) : vort_components(grid.dim);
  }
  ComponentLayout layout(int c) const { return S == Stagger::Face ? face_layout(grid, c) : edge_layout(grid, c); }

  Array3& operator[](int c) { return comp[c]; }
  const Array3& operator[](int c) const { return comp[c]; }

  /// 2D vorticity is a single nodal scalar.
  Array3& scalar() { return comp[2]; }
  const Array3& scalar() const { return comp[2]; }

  std::size_t size() const {
    std::size_t n = 0;
    for (int c : components()) n += comp[c].size();
    return n;
  }
  bool matches(const GridDesc& g) const;
  bool all_finite() const;
  double max_abs() const;

  friend bool operator==(const StaggeredField&, const StaggeredField&) = default;
};

using FaceField = StaggeredField<Stagger::Face>;
using VortField = StaggeredField<Stagger::Edge>;

struct CellField {
  GridDesc grid;
  Array3 values;

  CellField() = default;
  explicit CellField(const GridDesc& g) : grid(g), values(g.dims) {}
};

FaceField operator+(FaceField a, const FaceField& b);
VortField operator+(VortField a, const VortField& b);
VortField operator-(VortField a, const VortField& b);
VortField operator*(double s, VortField a);

/// Edge circulation of face velocities divided by dx. Faces outside the
/// domain take the matching component of `ambient`.
VortField curl_velocity(const FaceField& u, const GridDesc& g, const Vec3& ambient = {});
/// Face-located curl of edge vorticity (the transpose stencil of curl_velocity).
/// Samples outside the domain count as zero.
FaceField curl_vorticity(const VortField& w, const GridDesc& g);
CellField divergence(const FaceField& u, const GridDesc& g);
/// Nodal divergence of 3D edge vorticity. Throws for 2D fields.
Array3 vorticity_divergence(const VortField& w, const GridDesc& g);

/// Multilinear sample of a staggered scalar array at physical position `p`.
/// The fractional index is clamped to the array.
double interpolate(const Array3& a, const ComponentLayout& l, const GridDesc& g, const Vec3& p);

/// Min and max of the 2^d stored values surrounding `p`.
std::pair<double, double> stencil_bounds(const Array3& a, const ComponentLayout& l, const GridDesc& g,
                                         const Vec3& p);

/// Vorticity vector at `p`, each component interpolated from its own edge grid.
Vec3 interpolate_vorticity(const VortField& w, const Vec3& p);
/// Velocity vector at `p` (no gradient).
Vec3 interpolate_faces(const FaceField& u, const Vec3& p);

struct VelocitySample {
  Vec3 value;
  /// grad(a, b) = d u_a / d x_b.
  Mat3 grad;
};

/// Velocity plus a collocated central-difference gradient of each component,
/// both sampled multilinearly. Exact for globally linear fields.
class VelocitySampler {
 public:
  VelocitySampler() = default;
  explicit VelocitySampler(FaceField u);

  const FaceField& field() const { return u_; }
  const GridDesc& grid() const { return u_.grid; }
  VelocitySample sample(const Vec3& p) const;

 private:
  template <int D>
  VelocitySample sample_dim(const Vec3& q) const;

  // Per face component: value followed by its D gradient entries, interleaved per node.
  struct Packed {
    Index3 shape{};
    std::array<std::ptrdiff_t, 3> stride{};
    std::array<double, 3> offset{};
    std::vector<double> data;
  };
  FaceField u_;
  std::array<Packed, 3> packed_;
};

VelocitySample interpolate_velocity(const FaceField& u, const GridDesc& g, const Vec3& p);

}  // namespace vxm
