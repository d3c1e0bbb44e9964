#include "vortexmap/run.hpp"

#include <png.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "vortexmap/field_io.hpp"

namespace vxm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void mismatch(const std::string& key, const std::string& value, const char* type) {
  throw ConfigError("config key '" + key + "': expected " + type + ", got '" + value + "'");
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) mismatch(key, v, "an integer");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) mismatch(key, v, "a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  mismatch(key, v, "a boolean");
}

int to_axis(const std::string& key, const std::string& v) {
  if (v == "x") return 0;
  if (v == "y") return 1;
  if (v == "z") return 2;
  mismatch(key, v, "one of x, y, z");
}

void apply(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "scene") {
    if (v.empty()) mismatch(key, v, "a scene name");
    c.scene = v;
  } else if (key == "nx") {
    c.nx = to_int(key, v);
  } else if (key == "ny") {
    c.ny = to_int(key, v);
  } else if (key == "nz") {
    c.nz = to_int(key, v);
  } else if (key == "cfl") {
    c.cfl = to_double(key, v);
  } else if (key == "reinit" || key == "reinit_steps") {
    c.reinit = to_int(key, v);
  } else if (key == "nu") {
    c.nu = to_double(key, v);
  } else if (key == "frames") {
    c.frames = to_int(key, v);
  } else if (key == "steps_per_frame") {
    c.steps_per_frame = to_int(key, v);
  } else if (key == "frame_dt") {
    c.frame_dt = to_double(key, v);
  } else if (key == "tol") {
    c.tol = to_double(key, v);
  } else if (key == "max_iters") {
    c.max_iters = to_int(key, v);
  } else if (key == "scheme") {
    if (v == "flowmap")
      c.scheme = AdvectionScheme::FlowMap;
    else if (v == "sl")
      c.scheme = AdvectionScheme::SemiLagrangian;
    else
      mismatch(key, v, "flowmap or sl");
  } else if (key == "coupling") {
    if (v == "compatible")
      c.coupling = BoundaryCoupling::Compatible;
    else if (v == "velocity_only")
      c.coupling = BoundaryCoupling::VelocityOnly;
    else
      mismatch(key, v, "compatible or velocity_only");
  } else if (key == "out_dir") {
    if (v.empty()) mismatch(key, v, "a path");
    c.out_dir = v;
  } else if (key == "output_every") {
    c.output_every = to_int(key, v);
  } else if (key == "emit_png") {
    c.emit_png = to_bool(key, v);
  } else if (key == "png_axis") {
    c.png_axis = to_axis(key, v);
  } else {
    std::string known;
    for (const auto& k : config_keys()) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config key '" + key + "' (known: " + known + ")");
  }
}

void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("config key '" + key + "': " + what);
}

std::string frame_name(const char* prefix, int frame, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05d.%s", prefix, frame, ext);
  return buf;
}

// The slice rendered for a given axis: component, fixed index and the two
// in-plane axes (horizontal, vertical).
struct Slice {
  int comp = 2;
  int fixed_axis = 2;
  int fixed = 0;
  int h = 0, v = 1;
};

Slice slice_of(const VortField& w, int axis) {
  Slice s;
  if (w.grid.dim == 2) return s;
  require(axis >= 0 && axis < 3, "vorticity slice: axis out of range");
  s.comp = axis;
  s.fixed_axis = axis;
  s.fixed = w[axis].shape()[axis] / 2;
  s.h = (axis + 1) % 3;
  s.v = (axis + 2) % 3;
  if (s.h > s.v) std::swap(s.h, s.v);
  return s;
}

double slice_value(const VortField& w, const Slice& s, int i, int j) {
  Index3 x{0, 0, 0};
  x[s.fixed_axis] = s.fixed;
  x[s.h] = i;
  x[s.v] = j;
  return w[s.comp][x];
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "scene", "nx",     "ny",       "nz",      "cfl",      "reinit",      "reinit_steps",
      "nu",    "frames", "steps_per_frame",     "frame_dt", "tol",         "max_iters",
      "scheme", "coupling", "out_dir", "output_every", "emit_png", "png_axis"};
  return keys;
}

KeyValues parse_key_values(std::istream& is, const std::string& source) {
  KeyValues out;
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(n) + ": expected key = value, got '" + line + "'");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    if (out.back().first.empty()) throw ConfigError(source + ":" + std::to_string(n) + ": empty key");
  }
  return out;
}

KeyValues parse_key_values_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  return parse_key_values(is, path.string());
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + text + "'");
  auto kv = std::make_pair(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  if (kv.first.empty()) throw ConfigError("expected key=value, got '" + text + "'");
  return kv;
}

RunConfig make_run_config(const KeyValues& file, const KeyValues& overrides) {
  RunConfig c;
  for (const auto& [k, v] : file) apply(c, k, v);
  for (const auto& [k, v] : overrides) apply(c, k, v);
  c.validate();
  return c;
}

void RunConfig::validate() const {
  check(!scene.empty(), "scene", "required");
  scene_defaults(scene);
  for (const auto& [key, n] : {std::pair{"nx", nx}, std::pair{"ny", ny}, std::pair{"nz", nz}})
    check(!n || *n >= 4, key, "must be at least 4");
  check(!cfl || *cfl > 0.0, "cfl", "must be positive");
  check(!reinit || *reinit >= 1, "reinit", "must be at least 1");
  check(!nu || *nu >= 0.0, "nu", "must be non-negative");
  check(frames >= 0, "frames", "must be non-negative");
  check(steps_per_frame >= 1, "steps_per_frame", "must be at least 1");
  check(frame_dt > 0.0, "frame_dt", "must be positive");
  check(tol > 0.0 && tol < 1.0, "tol", "must lie in (0, 1)");
  check(max_iters >= 1, "max_iters", "must be at least 1");
  check(output_every >= 0, "output_every", "must be non-negative");
}

SceneOptions RunConfig::scene_options() const {
  const SceneDefaults& d = scene_defaults(scene);
  SceneOptions o;
  Index3 dims = d.dims;
  if (nx) dims[0] = *nx;
  if (ny) dims[1] = *ny;
  if (nz && d.dim == 3) dims[2] = *nz;
  o.dims = dims;
  o.cfl = cfl;
  o.reinit = reinit;
  o.nu = nu;
  o.poisson.tol = tol;
  o.poisson.max_iters = max_iters;
  o.poisson.coupling = coupling;
  o.scheme = scheme;
  o.dt_max = frame_dt;
  return o;
}

double vorticity_slice_max(const VortField& w, int axis) {
  const Slice s = slice_of(w, axis);
  const Index3 shape = w[s.comp].shape();
  double m = 0.0;
  for (int j = 0; j < shape[s.v]; ++j)
    for (int i = 0; i < shape[s.h]; ++i) m = std::max(m, std::abs(slice_value(w, s, i, j)));
  return m;
}

void write_vorticity_png(const std::filesystem::path& path, const VortField& w, int axis, double scale) {
  require(scale > 0.0 && std::isfinite(scale), "write_vorticity_png: scale must be positive");
  const Slice s = slice_of(w, axis);
  const Index3 shape = w[s.comp].shape();
  const int width = shape[s.h], height = shape[s.v];

  std::vector<png_byte> pixels(static_cast<std::size_t>(width) * height * 3);
  for (int r = 0; r < height; ++r)
    for (int i = 0; i < width; ++i) {
      const double t = std::clamp(slice_value(w, s, i, height - 1 - r) / scale, -1.0, 1.0);
      const double red = t < 0 ? 1 + t : 1.0;
      const double green = 1 - std::abs(t);
      const double blue = t > 0 ? 1 - t : 1.0;
      png_byte* p = &pixels[(static_cast<std::size_t>(r) * width + i) * 3];
      p[0] = static_cast<png_byte>(std::lround(255 * red));
      p[1] = static_cast<png_byte>(std::lround(255 * green));
      p[2] = static_cast<png_byte>(std::lround(255 * blue));
    }

  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw IoError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed writing " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < height; ++r) png_write_row(png, &pixels[static_cast<std::size_t>(r) * width * 3]);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

double peak_memory_mb() {
  std::ifstream is("/proc/self/status");
  std::string line;
  while (std::getline(is, line))
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream ls(line.substr(6));
      double kb = 0.0;
      ls >> kb;
      return kb / 1024.0;
    }
  return 0.0;
}

RunSummary run(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out_dir.string() + ": " + ec.message());

  Simulation sim = build_scene(cfg.scene, cfg.scene_options());
  const GridDesc& g = sim.state().grid;
  log << "scene " << cfg.scene << " grid " << g.dims[0] << "x" << g.dims[1];
  if (g.dim == 3) log << "x" << g.dims[2];
  log << " cfl " << sim.state().config.cfl << " reinit " << sim.state().config.reinit << " nu " << sim.state().config.nu
      << "\n";

  const auto csv_path = cfg.out_dir / "diagnostics.csv";
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  DiagnosticsWriter writer(csv);
  writer.write(sim.diagnostics());

  double png_scale = vorticity_slice_max(sim.state().w, cfg.png_axis);
  if (!(png_scale > 0.0)) png_scale = 1.0;

  auto emit = [&](int frame) {
    std::vector<FieldRecord> recs = to_records(sim.state().u);
    for (auto& r : to_records(sim.state().w)) recs.push_back(std::move(r));
    write_dump(cfg.out_dir / frame_name("frame", frame, "vxm"), recs);
    if (cfg.emit_png)
      write_vorticity_png(cfg.out_dir / frame_name("vorticity", frame, "png"), sim.state().w, cfg.png_axis, png_scale);
  };
  if (cfg.output_every > 0) emit(0);

  RunSummary sum;
  const double t_start = sim.state().time;
  for (int f = 1; f <= cfg.frames; ++f) {
    const double t_end = t_start + f * cfg.frame_dt;
    int k = 0;
    while (sim.state().time < t_end - 1e-9 * cfg.frame_dt && k < cfg.steps_per_frame) {
      writer.write(sim.step(t_end - sim.state().time));
      ++k;
    }
    if (!csv) throw IoError("write failed for " + csv_path.string());
    if (cfg.output_every > 0 && f % cfg.output_every == 0) emit(f);
    const Diagnostics d = sim.diagnostics();
    log << "frame " << f << "/" << cfg.frames << " steps " << k << " t " << d.time << " max_w " << d.max_w
        << " iters " << d.poisson_iters << "\n";
    sum.frames = f;
  }
  sum.steps = sim.state().step;
  sum.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  sum.peak_mb = peak_memory_mb();
  return sum;
}

}  // namespace vxm
