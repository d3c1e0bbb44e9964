#pragma once

#include <memory>
#include <vector>

#include "vortexmap/grid.hpp"

namespace vxm {

/// One value per staggered sample (vorticity edges/nodes, or faces for
/// surface-element transport). Blocks are indexed like the component arrays.
template <class T>
struct SampledField {
  GridDesc grid;
  Stagger stagger = Stagger::Edge;
  std::array<std::vector<T>, 3> block;

  std::span<const int> components() const {
    return stagger == Stagger::Face ? face_axes(grid.dim) : vort_components(grid.dim);
  }
  ComponentLayout layout(int c) const {
    return stagger == Stagger::Face ? face_layout(grid, c) : edge_layout(grid, c);
  }
  std::size_t size() const {
    std::size_t n = 0;
    for (int c : components()) n += block[c].size();
    return n;
  }
  bool same_layout(const GridDesc& g, Stagger s) const;

  friend bool operator==(const SampledField&, const SampledField&) = default;
};

using MapField = SampledField<Vec3>;
using JacobianField = SampledField<Mat3>;

struct FlowMap {
  MapField map;
  JacobianField jacobian;
};

MapField sample_positions(const GridDesc& g, Stagger s = Stagger::Edge);
JacobianField identity_jacobians(const GridDesc& g, Stagger s = Stagger::Edge);

/// Positions at the samples and identity Jacobians.
FlowMap reset_maps(const GridDesc& g, Stagger s = Stagger::Edge);

/// Joint fourth-order Runge-Kutta update of positions and Jacobians:
///   x_next = x + dt/6 (u1 + 2u2 + 2u3 + u4)
///   J_next = J - dt/6 (k1 + 2k2 + 2k3 + k4),  k_i = J_{i-1} grad u|_i
/// A negative dt traces positions backward while accumulating the forward
/// Jacobian; a positive dt carries the forward map and backward Jacobian.
/// Stage positions are clamped to the domain.
void march_in_place(const VelocitySampler& u, FlowMap& fm, double dt);
FlowMap rk4_joint_march(const VelocitySampler& u, FlowMap fm, double dt);
FlowMap rk4_joint_march(const FaceField& u, FlowMap fm, double dt);

/// Midpoint velocities and step sizes stored since the last reinitialization.
class VelocityBuffer {
 public:
  struct Entry {
    std::shared_ptr<const VelocitySampler> velocity;
    double dt = 0.0;
  };

  void push(std::shared_ptr<const VelocitySampler> u, double dt);
  void push(FaceField u, double dt);
  void clear() { entries_.clear(); }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }
  const Entry& back() const { return entries_.back(); }
  /// Sum of stored step sizes.
  double elapsed() const;

 private:
  std::vector<Entry> entries_;
};

/// Long-range backward map to the last reinitialization and the forward
/// Jacobian along it: start from identity and march every stored step in
/// reverse order with negated dt.
FlowMap backtrace(const VelocityBuffer& buf, const GridDesc& g, Stagger s = Stagger::Edge);

/// Advance the persistent forward map and backward Jacobian by one step.
FlowMap march_forward(const VelocitySampler& u_mid, double dt, FlowMap phi_T);

/// Multilinear interpolation of a vorticity-layout Jacobian field of component `c`.
Mat3 interpolate_jacobian(const JacobianField& J, int c, const Vec3& p);

JacobianField inverse(const JacobianField& J);

}  // namespace vxm
