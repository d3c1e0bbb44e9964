#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "vortexmap/grid.hpp"

namespace vxm {

/// Voxelized solids plus Dirichlet velocities. Cells outside the domain count
/// as solid; `ambient` stands in for velocities on faces beyond the domain.
struct SolidBoundary {
  GridDesc grid;
  std::vector<std::uint8_t> solid;  ///< per cell, Array3 order over grid.dims
  FaceField wall;                   ///< read only on Dirichlet faces
  Vec3 ambient{};
  /// The domain boundary is a free-stream opening rather than a wall: fluid
  /// entering through it carries no vorticity.
  bool open_domain = false;

  static SolidBoundary closed_box(const GridDesc& g);

  bool is_solid(const Index3& cell) const;
  std::size_t solid_count() const;
  void validate() const;
};

enum class FaceStatus : std::uint8_t { Unknown = 0, Dirichlet = 1 };
enum class VortStatus : std::uint8_t { Interior = 0, Eliminated = 1, Excluded = 2 };

/// Which faces are solved for and which vorticity samples are known.
struct DofClassification {
  GridDesc grid;
  std::array<std::vector<FaceStatus>, 3> face;
  std::array<std::vector<VortStatus>, 3> vort;
  /// Stacked unknown index per face, -1 for Dirichlet faces.
  std::array<std::vector<std::int64_t>, 3> unknown_id;
  /// (axis, linear face index) per unknown; x-axis unknowns first.
  std::vector<std::pair<int, std::size_t>> unknowns;

  std::size_t unknown_count() const { return unknowns.size(); }
};

DofClassification classify_dofs(const GridDesc& g, const SolidBoundary& solids);

/// Compatible: vorticity on samples touching a wall is replaced by the
/// circulation of its faces (the coupled system). VelocityOnly: every
/// non-excluded vorticity sample is taken as given and only the velocity
/// Dirichlet data is imposed (ablation).
enum class BoundaryCoupling { Compatible, VelocityOnly };

/// Right-hand side of the dx^2-scaled system for every unknown face.
std::vector<double> setup_rhs(const VortField& w, const GridDesc& g, const SolidBoundary& solids,
                              const DofClassification& cls,
                              BoundaryCoupling coupling = BoundaryCoupling::Compatible);

/// Matrix-free product of the coupled operator with a stacked unknown vector.
std::vector<double> apply_operator(std::span<const double> x, const GridDesc& g, const SolidBoundary& solids,
                                   const DofClassification& cls,
                                   BoundaryCoupling coupling = BoundaryCoupling::Compatible);

struct CoupledSystem {
  GridDesc grid;
  DofClassification cls;
  std::vector<double> rhs;
  BoundaryCoupling coupling = BoundaryCoupling::Compatible;
  int dim() const { return grid.dim; }
};

struct PoissonSettings {
  double tol = 1e-6;
  int max_iters = 200;
  BoundaryCoupling coupling = BoundaryCoupling::Compatible;
  int pre_smooth = 2;
  int post_smooth = 2;
  int coarse_sweeps = 50;
  double damping = 2.0 / 3.0;
  bool multigrid = true;  ///< false: plain Jacobi-preconditioned CG
};

enum class SolveStatus { Converged, MaxIterations, Diverged };
const char* to_string(SolveStatus s);

struct SolveResult {
  std::vector<double> x;  ///< stacked unknowns
  int iterations = 0;
  double relative_residual = 0.0;
  SolveStatus status = SolveStatus::Converged;
  std::vector<double> residual_history;  ///< relative residual after each iteration
  double seconds = 0.0;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// Called after each CG iteration with the iteration number and current
/// stacked iterate.
using IterationObserver = std::function<void(int, std::span<const double>)>;

/// Multigrid hierarchy and matrix-free operator for one solid configuration.
class PoissonSolver {
 public:
  PoissonSolver(const GridDesc& g, SolidBoundary solids, PoissonSettings settings = {});
  ~PoissonSolver();
  PoissonSolver(PoissonSolver&&) noexcept;
  PoissonSolver& operator=(PoissonSolver&&) noexcept;

  const GridDesc& grid() const;
  const SolidBoundary& solids() const;
  const DofClassification& classification() const;
  const PoissonSettings& settings() const;
  void set_settings(const PoissonSettings& s);
  /// Replace Dirichlet velocities without touching the mask.
  void set_wall_velocities(const FaceField& wall);
  int levels() const;

  std::vector<double> rhs(const VortField& w) const;
  std::vector<double> apply(std::span<const double> x) const;
  /// One V-cycle applied to a stacked residual.
  std::vector<double> precondition(std::span<const double> r) const;
  SolveResult solve(std::span<const double> rhs, const IterationObserver& observer = {}) const;
  /// Unknowns scattered to faces; Dirichlet faces take their wall values.
  FaceField velocity(std::span<const double> x) const;

  struct Reconstruction {
    FaceField u;
    SolveResult stats;
  };
  Reconstruction velocity_from_vorticity(const VortField& w) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SolveResult mgpcg_solve(const CoupledSystem& sys, const SolidBoundary& solids, double tol, int max_iters);

/// One-shot reconstruction; see PoissonSolver::velocity_from_vorticity.
PoissonSolver::Reconstruction velocity_from_vorticity(const VortField& w, const GridDesc& g,
                                                       const SolidBoundary& solids,
                                                       const PoissonSettings& settings = {});

/// Appends one CSV row per solve: step,unknowns,iterations,residual,seconds.
class SolveLog {
 public:
  explicit SolveLog(std::ostream& os, bool header = true);
  void record(long step, std::size_t unknowns, const SolveResult& r);

 private:
  std::ostream& os_;
};

}  // namespace vxm
