#include "vortexmap/transport.hpp"

#include <algorithm>

namespace vxm {

namespace {

void check_maps(const VortField& w, const MapField& map, const JacobianField& J, const char* op) {
  const std::string name(op);
  require(w.all_finite(), name + ": non-finite vorticity");
  require(map.same_layout(w.grid, Stagger::Edge), name + ": map layout does not match vorticity");
  require(J.same_layout(w.grid, Stagger::Edge), name + ": Jacobian layout does not match vorticity");
}

/// Interval image of the box prod_k [lo_k, hi_k] under row `c` of J.
std::pair<double, double> row_interval(const Mat3& J, int c, const Vec3& lo, const Vec3& hi,
                                       std::span<const int> comps) {
  double a = 0.0, b = 0.0;
  for (int k : comps) {
    const double x = J(c, k) * lo[k];
    const double y = J(c, k) * hi[k];
    a += std::min(x, y);
    b += std::max(x, y);
  }
  return {a, b};
}

}  // namespace

VortField pullback_line(const VortField& w0, const MapField& map, const JacobianField& J) {
  check_maps(w0, map, J, "pullback_line");
  VortField out(w0.grid);
  for (int c : out.components()) {
    auto& dst = out[c].raw();
    const auto& pos = map.block[c];
    const auto& jac = J.block[c];
    for (std::size_t n = 0; n < dst.size(); ++n) dst[n] = (jac[n] * interpolate_vorticity(w0, pos[n]))[c];
  }
  return out;
}

VortField pushforward_line(const VortField& w, const MapField& phi, const JacobianField& T) {
  return pullback_line(w, phi, T);
}

FaceField transport_surface(const FaceField& s0, const MapField& map, const JacobianField& T) {
  require(map.same_layout(s0.grid, Stagger::Face) && T.same_layout(s0.grid, Stagger::Face),
          "transport_surface: maps must be sampled on faces of the field's grid");
  FaceField out(s0.grid);
  for (int a : out.components()) {
    auto& dst = out[a].raw();
    for (std::size_t n = 0; n < dst.size(); ++n)
      dst[n] = (transpose(T.block[a][n]) * interpolate_faces(s0, map.block[a][n]))[a];
  }
  return out;
}

double TransportResult::clamp_fraction() const {
  std::size_t hit = 0, total = 0;
  for (int c : vorticity.components()) {
    total += clamped[c].size();
    hit += static_cast<std::size_t>(std::count(clamped[c].begin(), clamped[c].end(), std::uint8_t{1}));
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

TransportResult bfecc_pullback(const VortField& w0, const MapField& psi, const JacobianField& F,
                               const MapField& phi, const JacobianField& T) {
  check_maps(w0, psi, F, "bfecc_pullback");
  check_maps(w0, phi, T, "bfecc_pullback");
  const VortField w_bar = pullback_line(w0, psi, F);
  const VortField w_back = pushforward_line(w_bar, phi, T);
  const VortField err = 0.5 * (w_back - w0);
  const VortField err_bar = pullback_line(err, psi, F);

  TransportResult r;
  r.vorticity = w_bar - err_bar;
  const GridDesc& g = w0.grid;
  const auto comps = w0.components();
  for (int c : comps) {
    auto& dst = r.vorticity[c].raw();
    auto& flag = r.clamped[c];
    flag.assign(dst.size(), 0);
    for (std::size_t n = 0; n < dst.size(); ++n) {
      const Vec3& p = psi.block[c][n];
      Vec3 lo, hi;
      for (int k : comps) {
        const auto [a, b] = stencil_bounds(w0[k], w0.layout(k), g, p);
        lo[k] = a;
        hi[k] = b;
      }
      const auto [vmin, vmax] = row_interval(F.block[c][n], c, lo, hi, comps);
      const double v = dst[n];
      if (v < vmin || v > vmax) {
        dst[n] = std::clamp(v, vmin, vmax);
        flag[n] = 1;
      }
    }
  }
  return r;
}

VortField semi_lagrangian_vorticity(const VortField& w, const VelocitySampler& u, double dt) {
  require(dt > 0.0, "semi_lagrangian_vorticity: dt must be positive");
  FlowMap fm = reset_maps(w.grid);
  march_in_place(u, fm, -dt);
  return pullback_line(w, fm.map, fm.jacobian);
}

VortField semi_lagrangian_vorticity(const VortField& w, const FaceField& u, double dt) {
  require(u.grid == w.grid, "semi_lagrangian_vorticity: grid mismatch");
  return semi_lagrangian_vorticity(w, VelocitySampler(u), dt);
}

}  // namespace vxm
