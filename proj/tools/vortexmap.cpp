// Command-line front end: run a scene, compare dumps, list scenes.

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>

#include "vortexmap/field_io.hpp"
#include "vortexmap/run.hpp"

namespace {

enum Exit { kOk = 0, kDiffers = 1, kConfig = 2, kSolver = 3, kIo = 4 };

int cmd_run(const std::string& config, const std::vector<std::string>& sets) {
  vxm::KeyValues overrides;
  for (const auto& s : sets) overrides.push_back(vxm::parse_assignment(s));
  const vxm::KeyValues file = config.empty() ? vxm::KeyValues{} : vxm::parse_key_values_file(config);
  const vxm::RunConfig cfg = vxm::make_run_config(file, overrides);
  const vxm::RunSummary s = vxm::run(cfg, std::cout);
  std::cout << std::fixed << std::setprecision(2) << "done: " << s.frames << " frames, " << s.steps << " steps, wall "
            << s.seconds << " s, peak memory " << s.peak_mb << " MB\n";
  return kOk;
}

int cmd_diff(const std::string& a, const std::string& b, double tol) {
  const auto d = vxm::compare_records(vxm::read_dump(a), vxm::read_dump(b));
  std::cout << std::setprecision(17) << "max_abs " << d.max_abs << " mean_abs " << d.mean_abs << " values " << d.values
            << "\n";
  return d.max_abs <= tol ? kOk : kDiffers;
}

int cmd_scenes() {
  for (const auto& d : vxm::scene_catalog()) {
    std::cout << std::left << std::setw(22) << d.name << " " << d.dims[0] << "x" << d.dims[1];
    if (d.dim == 3) std::cout << "x" << d.dims[2];
    std::cout << "  cfl " << d.cfl << "  reinit " << d.reinit << "  nu " << d.nu << "  " << d.summary << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vortexmap: vortex flow-map fluid solver"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;
  auto* run = app.add_subcommand("run", "run a scene");
  run->add_option("--config", config, "flat key = value configuration file");
  run->add_option("--set", sets, "override, key=value (repeatable)");

  std::string a, b;
  double tol = 0.0;
  auto* diff = app.add_subcommand("diff", "compare two field dumps");
  diff->add_option("a", a)->required();
  diff->add_option("b", b)->required();
  diff->add_option("--tol", tol, "largest accepted absolute difference")->required();

  auto* scenes = app.add_subcommand("scenes", "list scenes and their defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(config, sets);
    if (*diff) return cmd_diff(a, b, tol);
    if (*scenes) return cmd_scenes();
  } catch (const vxm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const vxm::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const vxm::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const vxm::ContractError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
