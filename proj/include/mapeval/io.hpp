#pragma once

#include <string>

#include "mapeval/disturbance.hpp"
#include "mapeval/ghost.hpp"
#include "mapeval/simulator.hpp"
#include "mapeval/types.hpp"

namespace mapeval {

// --- trajectory: text, one pose per line `index tx ty tz qx qy qz qw` ---

Trajectory read_trajectory(const std::string& path);
void write_trajectory(const std::string& path, const Trajectory& trajectory);

// --- point cloud: binary, magic "LPCD0001", u32 count, 17-byte records ---

PointCloud read_cloud(const std::string& path);
void write_cloud(const std::string& path, const PointCloud& cloud);

// --- evaluation report: versioned key-value text with config echo ---

void write_report(const std::string& path, const EvaluationReport& report, const EvalConfig& cfg);

struct ParsedReport {
  EvaluationReport report;
  EvalConfig config;
};
ParsedReport read_report(const std::string& path);

// --- ghost export: ASCII PLY, frame points red, ghost points yellow ---

void export_ghosts_ply(const std::string& path, const PointCloud& frame_world,
                       const std::vector<Eigen::Vector3d>& ghost_positions);

// --- declarative specs (key-value text, '#' comments) ---

Scene read_scene_spec(const std::string& path);
PathSpec read_path_spec(const std::string& path);

EvalConfig read_eval_config(const std::string& path);

DisturbancePlan read_plan(const std::string& path);
void write_plan(const std::string& path, const DisturbancePlan& plan);

/// Benchmark directory manifest: sensor model, simulation options and the
/// file layout, so an output tree is self-describing.
struct Manifest {
  SensorModel sensor;
  SimOptions sim;
  std::int64_t frame_count = 0;
  std::string trajectory_file = "trajectory.txt";
  std::string cloud_pattern = "clouds/frame_%06d.lpcd";
};

Manifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const Manifest& manifest);

/// Expands `pattern` (one %d-style placeholder) with a frame index.
std::string cloud_file_name(const std::string& pattern, std::int64_t index);

}  // namespace mapeval
