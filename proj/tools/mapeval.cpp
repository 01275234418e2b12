#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>

#include "mapeval/disturbance.hpp"
#include "mapeval/evaluator.hpp"
#include "mapeval/io.hpp"
#include "mapeval/simulator.hpp"

namespace fs = std::filesystem;
using namespace mapeval;

namespace {

struct SimulateArgs {
  std::string scene_file;
  std::string path_file;
  std::string out_dir;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  double max_range = 80.0;
  int n_lasers = 16;
  double angular_resolution = 0.2;
  int threads = 1;
};

int run_simulate(const SimulateArgs& args) {
  const Scene scene = read_scene_spec(args.scene_file);
  const PathSpec path = read_path_spec(args.path_file);

  SensorModel sensor;
  sensor.n_lasers = args.n_lasers;
  sensor.angular_resolution_deg = args.angular_resolution;
  sensor.validate();

  SimOptions sim;
  sim.seed = args.seed;
  sim.range_noise_sigma = args.noise_sigma;
  sim.max_range_m = args.max_range;

  const Benchmark bench = build_benchmark(scene, path, sensor, sim, args.threads);

  fs::create_directories(fs::path(args.out_dir) / "clouds");
  Manifest manifest;
  manifest.sensor = sensor;
  manifest.sim = sim;
  manifest.frame_count = static_cast<std::int64_t>(bench.trajectory.size());
  write_manifest((fs::path(args.out_dir) / "manifest.txt").string(), manifest);
  write_trajectory((fs::path(args.out_dir) / manifest.trajectory_file).string(),
                   bench.trajectory);
  for (std::size_t i = 0; i < bench.clouds.size(); ++i) {
    const std::string name =
        cloud_file_name(manifest.cloud_pattern, static_cast<std::int64_t>(i));
    write_cloud((fs::path(args.out_dir) / name).string(), bench.clouds[i]);
  }
  std::cout << "simulated " << bench.trajectory.size() << " frames into " << args.out_dir
            << "\n";
  return 0;
}

struct PerturbArgs {
  std::string trajectory_in;
  std::string mode = "xy";
  std::string trajectory_out;
  std::string plan_out;
  std::uint64_t seed = 0;
};

int run_perturb(const PerturbArgs& args) {
  const Trajectory traj = read_trajectory(args.trajectory_in);
  const std::vector<double> arclen = pose_arclengths(traj);
  if (arclen.empty()) throw SpecError("empty trajectory");

  DisturbanceMode mode;
  if (args.mode == "xy") {
    mode = DisturbanceMode::XY;
  } else if (args.mode == "z") {
    mode = DisturbanceMode::Z;
  } else if (args.mode == "xyz") {
    mode = DisturbanceMode::Combined;  // stress-testing mode, not the benchmark protocol
  } else {
    throw SpecError("mode must be xy, z or xyz");
  }

  const DisturbancePlan plan = plan_disturbances(arclen.back(), mode, args.seed);
  const Trajectory perturbed = inject_disturbance(traj, plan);
  write_plan(args.plan_out, plan);
  write_trajectory(args.trajectory_out, perturbed);
  std::cout << "applied " << plan.segments.size() << " disturbance segments\n";
  return 0;
}

struct EvaluateArgs {
  std::string trajectory_file;
  std::string benchmark_dir;
  std::string report_out;
  std::string config_file;
  std::string ghosts_dir;
  int threads = 1;
};

int run_evaluate(const EvaluateArgs& args, const EvalConfig& cfg) {
  const Trajectory traj = read_trajectory(args.trajectory_file);
  const Manifest manifest = read_manifest((fs::path(args.benchmark_dir) / "manifest.txt").string());
  if (manifest.frame_count != static_cast<std::int64_t>(traj.size())) {
    throw InputMismatch("trajectory has " + std::to_string(traj.size()) +
                        " poses but the benchmark holds " +
                        std::to_string(manifest.frame_count) + " clouds");
  }
  std::vector<PointCloud> clouds(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const std::string name = cloud_file_name(manifest.cloud_pattern, static_cast<std::int64_t>(i));
    clouds[i] = read_cloud((fs::path(args.benchmark_dir) / name).string());
    clouds[i].frame_index = static_cast<std::int64_t>(i);
  }

  EvaluateOptions opts;
  opts.threads = args.threads;
  opts.keep_bad_pose_frames = !args.ghosts_dir.empty();
  const TrajectoryEvaluation eval = evaluate_trajectory(traj, clouds, cfg, manifest.sensor, opts);

  write_report(args.report_out, eval.report, cfg);

  if (!args.ghosts_dir.empty()) {
    fs::create_directories(args.ghosts_dir);
    for (std::int64_t bad : eval.report.bad_pose_indices) {
      const PoseEvaluation& pe = eval.poses[static_cast<std::size_t>(bad)];
      char name[48];
      std::snprintf(name, sizeof(name), "ghosts_pose_%06lld.ply", static_cast<long long>(bad));
      export_ghosts_ply((fs::path(args.ghosts_dir) / name).string(), pe.frame_world,
                        pe.ghost_positions);
    }
  }

  std::printf("evaluated %zu poses (%zu unevaluated), %zu bad, P_acc = %.6f\n",
              eval.report.per_pose.size(), eval.report.unevaluated_indices.size(),
              eval.report.bad_pose_indices.size(), eval.report.p_acc);
  return 0;
}

// every tuning knob is exposed as a flag; flags set on the command line win
// over values from --config
struct ConfigFlags {
  std::vector<std::pair<CLI::Option*, std::function<void(EvalConfig&, const EvalConfig&)>>> flags;

  void add(CLI::App* cmd, EvalConfig& cfg) {
    auto opt = [&](const char* name, auto EvalConfig::*field, const char* help) {
      CLI::Option* o = cmd->add_option(name, cfg.*field, help);
      flags.emplace_back(o, [field](EvalConfig& dst, const EvalConfig& src) {
        dst.*field = src.*field;
      });
    };
    opt("--submap-radius-m", &EvalConfig::submap_radius_m, "submap gathering radius r_s");
    opt("--ghost-search-radius-m", &EvalConfig::ghost_search_radius_m,
        "radius search range r_ghs at each sampling position");
    opt("--on-ray-tolerance-m", &EvalConfig::on_ray_tolerance_m,
        "on-ray distance threshold d_thre");
    opt("--grazing-angle-threshold-deg", &EvalConfig::grazing_angle_threshold_deg,
        "grazing angle threshold theta_thre");
    opt("--ghost-severity-threshold-m", &EvalConfig::ghost_severity_threshold_m,
        "minimum d_prj counted as severe ghosting");
    opt("--pole-ratio-threshold", &EvalConfig::pole_ratio_threshold, "t_pole");
    opt("--ordinary-ratio-threshold", &EvalConfig::ordinary_ratio_threshold, "t_ordi");
    opt("--voxel-leaf-m", &EvalConfig::voxel_leaf_m, "submap voxel filter leaf size");
    opt("--ray-sample-spacing-m", &EvalConfig::ray_sample_spacing_m,
        "spacing of sampling positions along each ray");
    opt("--ray-start-offset-m", &EvalConfig::ray_start_offset_m,
        "sampling start offset from the captured point");
    opt("--ray-end-margin-m", &EvalConfig::ray_end_margin_m, "excluded margin near the sensor");
    opt("--pca-neighborhood-radius-m", &EvalConfig::pca_neighborhood_radius_m,
        "neighborhood radius for normal estimation");
    opt("--pca-min-neighbors", &EvalConfig::pca_min_neighbors,
        "minimum neighborhood size for a reliable normal");
  }

  // overlay the explicitly set flags onto `base`
  EvalConfig merge(const EvalConfig& base, const EvalConfig& from_flags) const {
    EvalConfig out = base;
    for (const auto& [option, apply] : flags) {
      if (option->count() > 0) apply(out, from_flags);
    }
    return out;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relative accuracy evaluation of 3D lidar maps via ghosting detection"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "build a synthetic lidar benchmark");
  sim->add_option("--scene", sim_args.scene_file, "scene spec file")->required();
  sim->add_option("--path", sim_args.path_file, "trajectory path spec file")->required();
  sim->add_option("--out", sim_args.out_dir, "output benchmark directory")->required();
  sim->add_option("--seed", sim_args.seed, "noise seed");
  sim->add_option("--noise-sigma", sim_args.noise_sigma, "Gaussian range noise sigma [m]");
  sim->add_option("--max-range", sim_args.max_range, "maximum lidar range [m]");
  sim->add_option("--n-lasers", sim_args.n_lasers, "number of lasers");
  sim->add_option("--angular-resolution", sim_args.angular_resolution,
                  "horizontal angular resolution [deg]");
  sim->add_option("--threads", sim_args.threads, "simulation worker count");

  PerturbArgs pert_args;
  CLI::App* pert = app.add_subcommand("perturb", "inject pose disturbances (recall protocol)");
  pert->add_option("--trajectory", pert_args.trajectory_in, "input trajectory")->required();
  pert->add_option("--mode", pert_args.mode, "xy, z, or xyz (combined, non-standard)")
      ->required();
  pert->add_option("--out", pert_args.trajectory_out, "perturbed trajectory output")->required();
  pert->add_option("--plan", pert_args.plan_out, "disturbance plan output")->required();
  pert->add_option("--seed", pert_args.seed, "magnitude shuffle seed");

  EvaluateArgs eval_args;
  EvalConfig cfg;
  std::string config_file;
  CLI::App* eval = app.add_subcommand("evaluate", "evaluate map relative accuracy");
  eval->add_option("--trajectory", eval_args.trajectory_file, "estimated trajectory")->required();
  eval->add_option("--clouds", eval_args.benchmark_dir,
                   "benchmark directory (holds manifest.txt and the cloud files)")
      ->required();
  eval->add_option("--report", eval_args.report_out, "report output file")->required();
  eval->add_option("--config", config_file, "config file overriding defaults");
  eval->add_option("--threads", eval_args.threads, "evaluation worker count");
  eval->add_option("--ghosts-dir", eval_args.ghosts_dir,
                   "write a PLY of ghosting points per bad pose into this directory");
  ConfigFlags config_flags;
  config_flags.add(eval, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_args);
    if (pert->parsed()) return run_perturb(pert_args);
    if (eval->parsed()) {
      if (!config_file.empty()) {
        cfg = config_flags.merge(read_eval_config(config_file), cfg);
      }
      cfg.validate();
      return run_evaluate(eval_args, cfg);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
