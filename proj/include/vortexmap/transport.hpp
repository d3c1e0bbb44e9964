#pragma once

#include <cstdint>
#include <vector>

#include "vortexmap/flowmap.hpp"
#include "vortexmap/grid.hpp"

namespace vxm {

/// Line-element pullback: at each sample x, J(x) * w0(map(x)) projected onto
/// the sample's component. With (psi, F) this gives the current vorticity
/// from the initial one; with (phi, T) it carries a current field back to the
/// initial frame.
VortField pullback_line(const VortField& w0, const MapField& map, const JacobianField& J);
VortField pushforward_line(const VortField& w, const MapField& phi, const JacobianField& T);

/// Surface-element transport on face samples: s(x) = T(x)^T s0(map(x)).
FaceField transport_surface(const FaceField& s0, const MapField& map, const JacobianField& T);

struct TransportResult {
  VortField vorticity;
  /// 1 where the limiter changed the sample; blocks indexed like vorticity.
  std::array<std::vector<std::uint8_t>, 3> clamped;

  double clamp_fraction() const;
};

/// Back-and-forth error compensated pullback of the initial-frame vorticity,
/// followed by a min/max limiter against the interpolation stencil of w0 at
/// psi(x), carried through F(x).
TransportResult bfecc_pullback(const VortField& w0, const MapField& psi, const JacobianField& F,
                               const MapField& phi, const JacobianField& T);

/// Single-step baseline: one RK4 backward trace over dt, then a line pullback.
VortField semi_lagrangian_vorticity(const VortField& w, const VelocitySampler& u, double dt);
VortField semi_lagrangian_vorticity(const VortField& w, const FaceField& u, double dt);

}  // namespace vxm
