#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>

#include "vortexmap/flowmap.hpp"
#include "vortexmap/poisson.hpp"
#include "vortexmap/transport.hpp"

namespace vxm {

enum class AdvectionScheme {
  FlowMap,         ///< long-range bi-directional maps with BFECC pullback
  SemiLagrangian,  ///< one-step backward trace of the carried vorticity
};

/// Body force f(x, t); its discrete curl enters the accumulation buffer.
using ForceFunction = std::function<Vec3(const Vec3&, double)>;

/// Kinematic solids: the mask and wall velocities at time t.
using SolidMotion = std::function<SolidBoundary(double)>;

struct SolverConfig {
  double cfl = 1.0;
  int reinit = 20;
  double dt_max = 1.0 / 30.0;
  double nu = 0.0;
  PoissonSettings poisson{};
  AdvectionScheme scheme = AdvectionScheme::FlowMap;
  ForceFunction force;

  void validate() const;
};

struct Diagnostics {
  long step = 0;
  double time = 0.0;
  double dt = 0.0;
  double max_u = 0.0;
  double max_w = 0.0;
  double mean_div_u = 0.0;
  double max_div_w = 0.0;  ///< 3D only; 0 in 2D
  int poisson_iters = 0;
  double poisson_residual = 0.0;
  double clamp_fraction = 0.0;
  double energy = 0.0;
};

struct SimState {
  GridDesc grid;
  SolverConfig config;
  SolidBoundary solids;
  SolidMotion motion;  ///< empty for static solids

  FaceField u;
  VortField w_init;  ///< initial-frame vorticity since the last reinitialization
  VortField accum;   ///< initial-frame accumulation of viscous and force changes
  VortField w;       ///< latest transported vorticity
  FlowMap forward;   ///< phi and T
  VelocityBuffer buffer;

  long step = 0;
  int since_reinit = 0;
  double time = 0.0;
};

/// dt = cfl dx / max(max|u|, 1e-6 dx), capped at dt_max and, with viscosity,
/// at the explicit diffusion limit dx^2 / (2 d nu) (times 0.9).
double compute_dt(const FaceField& u, const GridDesc& g, double cfl, double dt_max, double nu = 0.0);

/// curl u with the solids' ambient velocity outside the domain; on an open
/// domain the samples on the domain boundary carry zero.
VortField velocity_curl(const FaceField& u, const SolidBoundary& solids);

/// A fresh state: solids and velocity installed, maps reset, w_init = curl u.
SimState make_state(const GridDesc& g, SolverConfig cfg, SolidBoundary solids, FaceField u);

void reinitialize(SimState& s);

/// Half-step backward map from the current velocity, pulled-back curl of the
/// current velocity, then a Poisson solve. Throws SolverError on failure.
PoissonSolver::Reconstruction midpoint_velocity(const SimState& s, const PoissonSolver& solver, double dt);

/// dt (nu Lap w + curl f), evaluated on `w_current`. Samples that are not
/// interior to the fluid are left at zero.
VortField vorticity_change(const SimState& s, const VortField& w_current, const DofClassification& cls, double dt);

/// Adds `delta` to the current field and its pushforward through (phi, T) to
/// the accumulation buffer.
void accumulate_changes(SimState& s, const VortField& delta);

/// Largest |div w| over nodes whose incident edges are all interior (3D).
double max_vorticity_divergence(const VortField& w, const DofClassification& cls);

/// Owns the state and a Poisson solver matching the current solid mask.
class Simulation {
 public:
  explicit Simulation(SimState s);

  const SimState& state() const { return state_; }
  const PoissonSolver& solver() const { return solver_; }
  /// Solve for u from the given vorticity with the current walls and reset the
  /// maps. Used when building scenes.
  PoissonSolver::Reconstruction project(const VortField& w);

  /// One full step. On solver failure throws SolverError naming the step;
  /// the state is left as it was before the call. `dt_cap` bounds the CFL step
  /// (used to land on frame boundaries).
  Diagnostics step(double dt_cap = std::numeric_limits<double>::infinity());
  Diagnostics diagnostics() const;

 private:
  void sync_solids(double t);

  SimState state_;
  PoissonSolver solver_;
  SolveResult last_solve_;
  double last_clamp_ = 0.0;
  double last_dt_ = 0.0;
};

double kinetic_energy(const FaceField& u);
double enstrophy(const VortField& w);

/// Writes the 11-column diagnostics CSV.
class DiagnosticsWriter {
 public:
  explicit DiagnosticsWriter(std::ostream& os);
  void write(const Diagnostics& d);

 private:
  std::ostream& os_;
};

}  // namespace vxm
