#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vortexmap/scenes.hpp"

namespace vxm {

/// Batch run settings. Optional fields fall back to the scene defaults.
struct RunConfig {
  std::string scene;
  std::optional<int> nx, ny, nz;
  std::optional<double> cfl;
  std::optional<int> reinit;
  std::optional<double> nu;
  int frames = 10;
  int steps_per_frame = 1000;  ///< cap; a frame ends early once it is reached
  double frame_dt = 1.0 / 30.0;
  double tol = 1e-6;
  int max_iters = 200;
  AdvectionScheme scheme = AdvectionScheme::FlowMap;
  BoundaryCoupling coupling = BoundaryCoupling::Compatible;
  std::filesystem::path out_dir = "out";
  int output_every = 1;  ///< frames between dumps and images, 0 for none
  bool emit_png = false;
  int png_axis = 2;

  void validate() const;
  SceneOptions scene_options() const;
};

/// Flat `key = value` lines; `#` starts a comment.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues parse_key_values(std::istream& is, const std::string& source);
KeyValues parse_key_values_file(const std::filesystem::path& path);
/// "key=value" as given on the command line.
std::pair<std::string, std::string> parse_assignment(const std::string& text);

/// Applies file values, then overrides. Unknown keys and malformed values
/// raise ConfigError naming the key.
RunConfig make_run_config(const KeyValues& file, const KeyValues& overrides);

/// Keys accepted in configuration files, for documentation and error text.
const std::vector<std::string>& config_keys();

struct RunSummary {
  int frames = 0;
  long steps = 0;
  double seconds = 0.0;
  double peak_mb = 0.0;
};

/// Builds the scene, writes diagnostics.csv, field dumps and images under
/// out_dir, and reports progress to `log`. Errors propagate as exceptions.
RunSummary run(const RunConfig& cfg, std::ostream& log);

/// Writes the vorticity slice normal to `axis` (the nodal field in 2D) as an
/// 8-bit RGB PNG with a blue-white-red map clamped at +-scale.
void write_vorticity_png(const std::filesystem::path& path, const VortField& w, int axis, double scale);
/// Largest |value| on the slice write_vorticity_png renders.
double vorticity_slice_max(const VortField& w, int axis);

/// Peak resident set size in MB, or 0 where unavailable.
double peak_memory_mb();

}  // namespace vxm
