#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "mapeval/types.hpp"

namespace mapeval {

/// Axis-aligned box obstacle (walls, buildings). Points on it are Default.
struct Box {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();
};

/// Vertical cylinder from z=0 to z=height. Points on it are Pole.
struct Pole {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.1;
  double height = 4.0;
};

/// Synthetic world: an infinite ground plane z=0 plus boxes and poles.
struct Scene {
  std::vector<Box> boxes;
  std::vector<Pole> poles;

  void validate() const;
};

struct SimOptions {
  double max_range_m = 80.0;
  double range_noise_sigma = 0.0;  // Gaussian noise on the measured range
  std::uint64_t seed = 0;
};

/// First-hit intersection of a world ray against the scene.
/// Returns the hit range (or nullopt) and the label of the hit primitive.
std::optional<std::pair<double, Label>> raycast(const Scene& scene, const Eigen::Vector3d& origin,
                                                const Eigen::Vector3d& direction,
                                                double max_range);

/// Casts the sensor's full firing pattern from `pose` and returns the hit
/// points in body coordinates with exact scan/fire ids and primitive labels.
/// Vertical angles span [-25, +15] degrees evenly over the lasers.
PointCloud simulate_scan(const Scene& scene, const Pose& pose, const SensorModel& sensor,
                         const SimOptions& opts = {});

/// Polyline path for a benchmark trajectory; headings follow the tangent.
struct PathSpec {
  std::vector<Eigen::Vector2d> waypoints;
  double spacing_m = 1.0;
  bool closed = true;

  double total_length() const;
};

struct Benchmark {
  Trajectory trajectory;
  std::vector<PointCloud> clouds;
};

/// Samples poses along the path and simulates one scan per pose.
/// Throws SpecError on an empty or degenerate path.
Benchmark build_benchmark(const Scene& scene, const PathSpec& path, const SensorModel& sensor,
                          const SimOptions& opts = {}, int threads = 1);

/// The desk-scale dog-bone benchmark used by the test harness: a walled
/// yard with buildings and a pole-lined central corridor that the path
/// traverses twice, so cross-pass ghosting is exercised.
Scene default_benchmark_scene();
PathSpec default_benchmark_path();

}  // namespace mapeval
