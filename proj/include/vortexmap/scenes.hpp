#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vortexmap/simulation.hpp"

namespace vxm {

/// 2D Gaussian vortex, w = G / (pi a^2) exp(-r^2 / a^2).
struct GaussianVortex {
  Vec3 center;
  double strength = 1.0;
  double radius = 0.05;
};

/// w(r) = (U / a) (2 - r^2/a^2) exp((1 - r^2/a^2) / 2)
double taylor_vortex(double r, double U, double a);

/// Vortex ring of major radius R and core radius a. Positive strength moves
/// the ring along +normal.
struct VortexRing {
  Vec3 center;
  Vec3 normal{1, 0, 0};
  double radius = 0.2;
  double core = 0.05;
  double strength = 1.0;

  void validate() const;
  /// Continuous vorticity vector at p.
  Vec3 at(const Vec3& p) const;
};

/// Point vorticity of a parametric trefoil tube (closed curve, Gaussian core).
struct TrefoilTube {
  Vec3 center;
  double scale = 0.1;
  double core = 0.03;
  double strength = 1.0;
  int segments = 512;

  Vec3 at(const Vec3& p) const;
};

/// Rasterizes a continuous vorticity function onto the grid: 2D samples are
/// point values at nodes, 3D edge samples are averages over the dual face
/// (3x3 Gauss points) so that the discrete divergence stays small.
VortField rasterize_vorticity(const GridDesc& g, const std::function<Vec3(const Vec3&)>& w);

VortField vortex_ring(const GridDesc& g, const VortexRing& ring);

/// Implicit solid primitives; negative inside.
struct SolidPrimitive {
  enum class Kind { Sphere, Box, HalfSpace };
  Kind kind = Kind::Sphere;
  Vec3 center;
  double radius = 0.0;   ///< sphere (disk in 2D)
  Vec3 half_extent;      ///< box
  Vec3 normal{0, 1, 0};  ///< half-space: solid where (x - center) . normal < 0
  Vec3 velocity;         ///< rigid translation velocity

  double sdf(const Vec3& p, int dim) const;
};

/// Cells whose centre lies inside any primitive are solid. Faces touching a
/// solid take that primitive's velocity; faces on the domain boundary take
/// `boundary_velocity`, which also becomes the ambient velocity.
SolidBoundary voxelize(const std::vector<SolidPrimitive>& prims, const GridDesc& g, Vec3 boundary_velocity = {});

struct SceneDefaults {
  std::string name;
  std::string summary;
  int dim = 2;
  Index3 dims{256, 256, 1};
  double cfl = 1.0;
  int reinit = 20;
  double nu = 0.0;
  double inflow = 0.0;  ///< free-stream or lid speed, 0 if none
};

const std::vector<SceneDefaults>& scene_catalog();
/// Throws ConfigError listing the known names.
const SceneDefaults& scene_defaults(const std::string& name);

struct SceneOptions {
  std::optional<Index3> dims;  ///< 2D scenes ignore dims[2]
  std::optional<double> cfl;
  std::optional<int> reinit;
  std::optional<double> nu;
  PoissonSettings poisson{};
  AdvectionScheme scheme = AdvectionScheme::FlowMap;
  double dt_max = 1.0 / 30.0;
};

/// Builds the scene's grid, solids and initial vorticity, and projects once to
/// obtain the initial velocity.
Simulation build_scene(const std::string& name, const SceneOptions& opts = {});

/// Grid a scene uses at the given resolution (physical size fixed along y).
GridDesc scene_grid(const SceneDefaults& d, const Index3& dims);

}  // namespace vxm
