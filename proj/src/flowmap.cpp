#include "vortexmap/flowmap.hpp"

#include <cmath>

#include "detail/stencil.hpp"

namespace vxm {

template <class T>
bool SampledField<T>::same_layout(const GridDesc& g, Stagger s) const {
  if (!(grid == g) || stagger != s) return false;
  for (int c : components()) {
    const Index3 sh = layout(c).shape;
    if (block[c].size() != static_cast<std::size_t>(sh[0]) * sh[1] * sh[2]) return false;
  }
  return true;
}

template struct SampledField<Vec3>;
template struct SampledField<Mat3>;

MapField sample_positions(const GridDesc& g, Stagger s) {
  MapField m;
  m.grid = g;
  m.stagger = s;
  for (int c : m.components()) {
    const ComponentLayout l = m.layout(c);
    const Array3 shape_only(l.shape);
    auto& blk = m.block[c];
    blk.resize(shape_only.size());
    for (std::size_t n = 0; n < blk.size(); ++n) blk[n] = sample_position(g, l, shape_only.unravel(n));
  }
  return m;
}

JacobianField identity_jacobians(const GridDesc& g, Stagger s) {
  JacobianField j;
  j.grid = g;
  j.stagger = s;
  for (int c : j.components()) {
    const Index3 sh = j.layout(c).shape;
    j.block[c].assign(static_cast<std::size_t>(sh[0]) * sh[1] * sh[2], Mat3::identity());
  }
  return j;
}

FlowMap reset_maps(const GridDesc& g, Stagger s) { return {sample_positions(g, s), identity_jacobians(g, s)}; }

void march_in_place(const VelocitySampler& u, FlowMap& fm, double dt) {
  require(std::isfinite(dt) && dt != 0.0, "rk4_joint_march: dt must be finite and non-zero");
  const GridDesc& g = u.grid();
  require(fm.map.same_layout(g, fm.map.stagger) && fm.jacobian.same_layout(g, fm.map.stagger),
          "rk4_joint_march: map/Jacobian layout does not match the velocity grid");
  const double h = 0.5 * dt;
  const double sixth = dt / 6.0;
  bool finite = true;
  for (int c : fm.map.components()) {
    auto& pos = fm.map.block[c];
    auto& jac = fm.jacobian.block[c];
    for (std::size_t n = 0; n < pos.size(); ++n) {
      const Vec3 x = pos[n];
      const Mat3 J = jac[n];
      const VelocitySample s1 = u.sample(x);
      const Mat3 k1 = J * s1.grad;
      const Vec3 x1 = g.clamp_to_domain(x + h * s1.value);
      const Mat3 J1 = J - h * k1;
      const VelocitySample s2 = u.sample(x1);
      const Mat3 k2 = J1 * s2.grad;
      const Vec3 x2 = g.clamp_to_domain(x + h * s2.value);
      const Mat3 J2 = J - h * k2;
      const VelocitySample s3 = u.sample(x2);
      const Mat3 k3 = J2 * s3.grad;
      const Vec3 x3 = g.clamp_to_domain(x + dt * s3.value);
      const Mat3 J3 = J - dt * k3;
      const VelocitySample s4 = u.sample(x3);
      const Mat3 k4 = J3 * s4.grad;
      pos[n] = g.clamp_to_domain(x + sixth * (s1.value + 2.0 * s2.value + 2.0 * s3.value + s4.value));
      jac[n] = J - sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      for (double v : jac[n].m) finite = finite && std::isfinite(v);
    }
  }
  require(finite, "rk4_joint_march: non-finite Jacobian (non-finite velocity input?)");
}

FlowMap rk4_joint_march(const VelocitySampler& u, FlowMap fm, double dt) {
  march_in_place(u, fm, dt);
  return fm;
}

FlowMap rk4_joint_march(const FaceField& u, FlowMap fm, double dt) {
  require(u.all_finite(), "rk4_joint_march: non-finite velocity");
  return rk4_joint_march(VelocitySampler(u), std::move(fm), dt);
}

void VelocityBuffer::push(std::shared_ptr<const VelocitySampler> u, double dt) {
  require(u != nullptr, "VelocityBuffer: null velocity");
  require(dt > 0.0 && std::isfinite(dt), "VelocityBuffer: step sizes must be positive");
  entries_.push_back({std::move(u), dt});
}

void VelocityBuffer::push(FaceField u, double dt) {
  push(std::make_shared<const VelocitySampler>(std::move(u)), dt);
}

double VelocityBuffer::elapsed() const {
  double t = 0.0;
  for (const auto& e : entries_) t += e.dt;
  return t;
}

FlowMap backtrace(const VelocityBuffer& buf, const GridDesc& g, Stagger s) {
  require(!buf.empty(), "backtrace: empty velocity buffer");
  FlowMap fm = reset_maps(g, s);
  for (auto it = buf.entries().rbegin(); it != buf.entries().rend(); ++it) march_in_place(*it->velocity, fm, -it->dt);
  return fm;
}

FlowMap march_forward(const VelocitySampler& u_mid, double dt, FlowMap phi_T) {
  require(dt > 0.0, "march_forward: dt must be positive");
  march_in_place(u_mid, phi_T, dt);
  return phi_T;
}

Mat3 interpolate_jacobian(const JacobianField& J, int c, const Vec3& p) {
  const ComponentLayout l = J.layout(c);
  const detail::Stencil st(l.shape, l, J.grid, J.grid.clamp_to_domain(p));
  Mat3 r;
  for (int n = 0; n < st.count; ++n) r = r + st.weight[n] * J.block[c][st.base + st.offset[n]];
  return r;
}

JacobianField inverse(const JacobianField& J) {
  JacobianField r = J;
  for (int c : r.components())
    for (Mat3& m : r.block[c]) m = inverse(m);
  return r;
}

}  // namespace vxm
