#include "vortexmap/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace vxm {

namespace {

double cell_volume(const GridDesc& g) { return std::pow(g.dx, g.dim); }

FaceField sample_force(const ForceFunction& f, const GridDesc& g, double t) {
  FaceField out(g);
  for (int a : out.components()) {
    const auto l = out.layout(a);
    auto& arr = out[a];
    for (std::size_t n = 0; n < arr.size(); ++n) arr.raw()[n] = f(sample_position(g, l, arr.unravel(n)), t)[a];
  }
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(cfl > 0.0) || !std::isfinite(cfl)) throw ContractError("solver config: cfl must be positive");
  if (reinit < 1) throw ContractError("solver config: reinit interval must be at least 1");
  if (!(dt_max > 0.0)) throw ContractError("solver config: dt_max must be positive");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw ContractError("solver config: viscosity must be non-negative");
}

double compute_dt(const FaceField& u, const GridDesc& g, double cfl, double dt_max, double nu) {
  require(cfl > 0.0, "compute_dt: cfl must be positive");
  const double umax = std::max(u.max_abs(), 1e-6 * g.dx);
  double dt = std::min(cfl * g.dx / umax, dt_max);
  if (nu > 0.0) dt = std::min(dt, 0.9 * g.dx * g.dx / (2.0 * g.dim * nu));
  return dt;
}

VortField velocity_curl(const FaceField& u, const SolidBoundary& solids) {
  const GridDesc& g = u.grid;
  VortField w = curl_velocity(u, g, solids.ambient);
  if (!solids.open_domain) return w;
  for (int c : w.components()) {
    Array3& a = w[c];
    const Index3 s = a.shape();
    for (std::size_t n = 0; n < a.size(); ++n) {
      const Index3 x = a.unravel(n);
      for (int ax = 0; ax < g.dim; ++ax)
        if (ax != c && (x[ax] == 0 || x[ax] == s[ax] - 1)) {
          a.raw()[n] = 0.0;
          break;
        }
    }
  }
  return w;
}

void reinitialize(SimState& s) {
  s.w_init = velocity_curl(s.u, s.solids);
  s.accum = VortField(s.grid);
  s.w = s.w_init;
  s.forward = reset_maps(s.grid);
  s.buffer.clear();
  s.since_reinit = 0;
}

SimState make_state(const GridDesc& g, SolverConfig cfg, SolidBoundary solids, FaceField u) {
  g.validate();
  cfg.validate();
  require(u.matches(g), "make_state: velocity layout does not match grid");
  require(solids.grid == g, "make_state: solid boundary grid mismatch");
  SimState s;
  s.grid = g;
  s.config = std::move(cfg);
  s.solids = std::move(solids);
  s.u = std::move(u);
  reinitialize(s);
  return s;
}

PoissonSolver::Reconstruction midpoint_velocity(const SimState& s, const PoissonSolver& solver, double dt) {
  require(dt > 0.0, "midpoint_velocity: dt must be positive");
  FlowMap half = reset_maps(s.grid);
  march_in_place(VelocitySampler(s.u), half, -0.5 * dt);
  const VortField w = velocity_curl(s.u, s.solids);
  const VortField w_mid = pullback_line(w, half.map, half.jacobian);
  return solver.velocity_from_vorticity(w_mid);
}

VortField vorticity_change(const SimState& s, const VortField& w_current, const DofClassification& cls, double dt) {
  const GridDesc& g = s.grid;
  VortField delta(g);
  const bool viscous = s.config.nu > 0.0;
  const bool forced = static_cast<bool>(s.config.force);
  if (!viscous && !forced) return delta;
  VortField curl_f;
  if (forced) curl_f = curl_velocity(sample_force(s.config.force, g, s.time), g);
  const double k = s.config.nu / (g.dx * g.dx);
  for (int c : delta.components()) {
    const Array3& w = w_current[c];
    const auto& status = cls.vort[c];
    auto value = [&](const Index3& x) {
      if (!w.contains(x)) return 0.0;
      const std::size_t n = w.linear(x);
      return status[n] == VortStatus::Excluded ? 0.0 : w.raw()[n];
    };
    for (std::size_t n = 0; n < w.size(); ++n) {
      if (status[n] != VortStatus::Interior) continue;
      double change = 0.0;
      if (viscous) {
        const Index3 x = w.unravel(n);
        double lap = -2.0 * g.dim * w.raw()[n];
        for (int a = 0; a < g.dim; ++a) lap += value(shifted(x, a, 1)) + value(shifted(x, a, -1));
        change += k * lap;
      }
      if (forced) change += curl_f[c].raw()[n];
      delta[c].raw()[n] = dt * change;
    }
  }
  return delta;
}

void accumulate_changes(SimState& s, const VortField& delta) {
  s.w = s.w + delta;
  if (s.config.scheme == AdvectionScheme::FlowMap)
    s.accum = s.accum + pushforward_line(delta, s.forward.map, s.forward.jacobian);
}

double max_vorticity_divergence(const VortField& w, const DofClassification& cls) {
  const GridDesc& g = w.grid;
  if (g.dim != 3) return 0.0;
  const Array3 div = vorticity_divergence(w, g);
  double m = 0.0;
  for (std::size_t n = 0; n < div.size(); ++n) {
    const Index3 x = div.unravel(n);
    bool inside = true;
    for (int c = 0; c < 3 && inside; ++c) {
      const Array3& wc = w[c];
      for (int by : {0, -1}) {
        const Index3 e = shifted(x, c, by);
        if (!wc.contains(e) || cls.vort[c][wc.linear(e)] != VortStatus::Interior) {
          inside = false;
          break;
        }
      }
    }
    if (inside) m = std::max(m, std::abs(div.raw()[n]));
  }
  return m;
}

double kinetic_energy(const FaceField& u) {
  double e = 0.0;
  for (int a : u.components())
    for (double v : u[a].values()) e += v * v;
  return 0.5 * e * cell_volume(u.grid);
}

double enstrophy(const VortField& w) {
  double e = 0.0;
  for (int c : w.components())
    for (double v : w[c].values()) e += v * v;
  return e * cell_volume(w.grid);
}

Simulation::Simulation(SimState s)
    : state_(std::move(s)), solver_(state_.grid, state_.solids, state_.config.poisson) {
  if (state_.motion) sync_solids(state_.time);
}

void Simulation::sync_solids(double t) {
  SolidBoundary sb = state_.motion(t);
  require(sb.grid == state_.grid, "solid motion: grid mismatch");
  if (sb.solid == solver_.solids().solid && sb.ambient == solver_.solids().ambient)
    solver_.set_wall_velocities(sb.wall);
  else
    solver_ = PoissonSolver(state_.grid, sb, state_.config.poisson);
  state_.solids = std::move(sb);
}

PoissonSolver::Reconstruction Simulation::project(const VortField& w) {
  auto rec = solver_.velocity_from_vorticity(w);
  if (!rec.stats.converged())
    throw SolverError(std::string(to_string(rec.stats.status)) + " at step " + std::to_string(state_.step) +
                      " (projection) after " + std::to_string(rec.stats.iterations) + " iterations");
  state_.u = rec.u;
  reinitialize(state_);
  last_solve_ = rec.stats;
  return rec;
}

Diagnostics Simulation::step(double dt_cap) {
  require(dt_cap > 0.0, "step: dt cap must be positive");
  const SimState before = state_;
  const long k = state_.step + 1;
  auto fail = [&](const SolveResult& r) {
    state_ = before;
    if (state_.motion) sync_solids(state_.time);
    throw SolverError(std::string(to_string(r.status)) + " at step " + std::to_string(k) + " after " +
                      std::to_string(r.iterations) + " iterations (residual " + std::to_string(r.relative_residual) +
                      ")");
  };

  SimState& s = state_;
  const bool flow_map = s.config.scheme == AdvectionScheme::FlowMap;
  if (flow_map && s.since_reinit >= s.config.reinit) reinitialize(s);
  const double dt = std::min(dt_cap, compute_dt(s.u, s.grid, s.config.cfl, s.config.dt_max, s.config.nu));

  if (s.motion) sync_solids(s.time + 0.5 * dt);
  const auto mid = midpoint_velocity(s, solver_, dt);
  if (!mid.stats.converged()) fail(mid.stats);
  auto mid_sampler = std::make_shared<const VelocitySampler>(mid.u);

  VortField w_hat;
  double clamp = 0.0;
  if (flow_map) {
    s.buffer.push(mid_sampler, dt);
    const FlowMap back = backtrace(s.buffer, s.grid);
    s.forward = march_forward(*mid_sampler, dt, std::move(s.forward));
    auto res = bfecc_pullback(s.w_init + s.accum, back.map, back.jacobian, s.forward.map, s.forward.jacobian);
    w_hat = std::move(res.vorticity);
    clamp = res.clamp_fraction();
  } else {
    w_hat = semi_lagrangian_vorticity(s.w, *mid_sampler, dt);
  }

  if (s.motion) sync_solids(s.time + dt);
  const DofClassification& cls = solver_.classification();
  s.w = std::move(w_hat);
  if (s.config.nu > 0.0 || s.config.force) {
    // Wall samples carry the circulation of the latest velocity.
    VortField w_now = s.w;
    const VortField wall = velocity_curl(s.u, s.solids);
    for (int c : w_now.components())
      for (std::size_t n = 0; n < w_now[c].size(); ++n)
        if (cls.vort[c][n] == VortStatus::Eliminated) w_now[c].raw()[n] = wall[c].raw()[n];
    accumulate_changes(s, vorticity_change(s, w_now, cls, dt));
  }

  const auto rec = solver_.velocity_from_vorticity(s.w);
  if (!rec.stats.converged()) fail(rec.stats);
  s.u = rec.u;
  s.step = k;
  s.time += dt;
  if (flow_map) ++s.since_reinit;
  last_solve_ = rec.stats;
  last_clamp_ = clamp;
  last_dt_ = dt;
  return diagnostics();
}

Diagnostics Simulation::diagnostics() const {
  const SimState& s = state_;
  const DofClassification& cls = solver_.classification();
  Diagnostics d;
  d.step = s.step;
  d.time = s.time;
  d.dt = last_dt_;
  d.max_u = s.u.max_abs();
  const VortField cu = curl_velocity(s.u, s.grid, s.solids.ambient);
  for (int c : cu.components())
    for (std::size_t n = 0; n < cu[c].size(); ++n)
      if (cls.vort[c][n] == VortStatus::Interior) d.max_w = std::max(d.max_w, std::abs(cu[c].raw()[n]));
  const CellField div = divergence(s.u, s.grid);
  double sum = 0.0;
  std::size_t fluid = 0;
  for (std::size_t n = 0; n < div.values.size(); ++n)
    if (!s.solids.solid[n]) {
      sum += std::abs(div.values.raw()[n]);
      ++fluid;
    }
  d.mean_div_u = fluid ? sum / static_cast<double>(fluid) : 0.0;
  d.max_div_w = max_vorticity_divergence(s.w, cls);
  d.poisson_iters = last_solve_.iterations;
  d.poisson_residual = last_solve_.relative_residual;
  d.clamp_fraction = last_clamp_;
  d.energy = kinetic_energy(s.u);
  return d;
}

DiagnosticsWriter::DiagnosticsWriter(std::ostream& os) : os_(os) {
  os_ << "step,time,dt,max_u,max_w,mean_div_u,max_div_w,poisson_iters,poisson_residual,clamp_fraction,energy\n";
}

void DiagnosticsWriter::write(const Diagnostics& d) {
  const auto old = os_.precision(17);
  os_ << d.step << ',' << d.time << ',' << d.dt << ',' << d.max_u << ',' << d.max_w << ',' << d.mean_div_u << ','
      << d.max_div_w << ',' << d.poisson_iters << ',' << d.poisson_residual << ',' << d.clamp_fraction << ','
      << d.energy << '\n';
  os_.precision(old);
  os_.flush();
}

}  // namespace vxm
