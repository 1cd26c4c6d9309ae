#include "wavemech/config.hpp"
#include "wavemech/parallel.hpp"
#include "wavemech/render.hpp"
#include "wavemech/scenario.hpp"
#include "wavemech/snapshot.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace wavemech;

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::configuration:
    case ErrorKind::superluminal:
    case ErrorKind::dimension:
    case ErrorKind::shape:
      return 2;
    case ErrorKind::diverged:
      return 3;
    default:
      return 1;
  }
}

int run(const std::string& config_path, const RunOptions& opts) {
  const ScenarioResult r = run_scenario(Config::load(config_path), opts);
  if (!opts.verify) {
    std::cout << r.scenario << ": outputs in " << r.out_dir.string() << '\n';
    return 0;
  }
  for (const auto& c : r.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.check_name << '\n';
  std::cout << r.scenario << ": " << (r.all_pass() ? "all checks passed" : "verification failed") << " (report in "
            << (r.out_dir / "report.json").string() << ")\n";
  return r.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavemech: double-solution wave mechanics scenarios"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  long long seed = -1;
  std::string out_dir;
  app.add_option("--threads", threads, "worker threads (default: WAVEMECH_THREADS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "override run.seed")->check(CLI::NonNegativeNumber);
  app.add_option("--out-dir", out_dir, "override output.dir");

  std::string config_path;
  auto* sim = app.add_subcommand("simulate", "run a scenario and write its data files");
  sim->add_option("config", config_path, "scenario config")->required();
  auto* ver = app.add_subcommand("verify", "run a scenario and its verification checks");
  ver->add_option("config", config_path, "scenario config")->required();

  std::string snapshot_path, quantity = "amplitude", scale = "linear", image_path;
  double mass = 1.0, decades = 6.0;
  auto* ren = app.add_subcommand("render", "render a snapshot as a PPM heatmap");
  ren->add_option("snapshot", snapshot_path, "snapshot file")->required();
  ren->add_option("--quantity", quantity, "amplitude, phase_gradient_mag or Q");
  ren->add_option("--scale", scale, "linear or log");
  ren->add_option("--decades", decades, "log scale range");
  ren->add_option("--mass", mass, "mass used by Q");
  ren->add_option("--out", image_path, "output image")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (threads > 0) set_thread_count(threads);
    RunOptions opts;
    if (!out_dir.empty()) opts.out_dir = out_dir;
    if (seed >= 0) opts.seed = static_cast<std::uint64_t>(seed);
    if (*sim) {
      opts.verify = false;
      return run(config_path, opts);
    }
    if (*ver) return run(config_path, opts);
    RenderOptions ro;
    ro.quantity = render_quantity_from_string(quantity);
    ro.scale = color_scale_from_string(scale);
    ro.mass = mass;
    ro.decades = decades;
    const Snapshot snap = read_snapshot(snapshot_path);
    write_ppm(image_path, render_heatmap(snap.field, ro));
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
