#pragma once

#include "mapeval/ghost.hpp"
#include "mapeval/kdtree.hpp"
#include "mapeval/types.hpp"

namespace mapeval {

/// Per-pose evaluation outcome. `stats` is empty when the pose had no
/// neighbor within the submap radius (unevaluated, not bad). The hit lists
/// are populated per EvaluateOptions; frame_world is filled only for bad
/// poses when keep_bad_pose_frames is set.
struct PoseEvaluation {
  std::optional<PoseStats> stats;
  std::vector<GhostHit> severe_hits;             // hits with d_prj > severity threshold
  std::vector<Eigen::Vector3d> ghost_positions;  // aligned with severe_hits
  PointCloud frame_world;                        // downsampled evaluated frame (world)
};

struct EvaluateOptions {
  int threads = 1;
  bool keep_severe_hits = false;      // retain severe hits for every evaluated pose
  bool keep_bad_pose_frames = false;  // retain world frames + hits of bad poses (for export)
};

/// Gathers all frames j != i whose pose translation lies within r_s of pose
/// i, transforms them to world, voxel-filters the union and indexes it.
/// Throws EmptySubmap when no neighbor pose is in range.
SubmapIndex assemble_submap(const Trajectory& trajectory, const std::vector<PointCloud>& clouds,
                            std::size_t i, const EvalConfig& cfg, const SensorModel& sensor);

/// Full single-pose evaluation: scan-pattern downsampling, world transform,
/// ghost detection against the neighborhood submap, and the pole/ordinary
/// ghost-ratio classification.
PoseEvaluation evaluate_pose(const Trajectory& trajectory, const std::vector<PointCloud>& clouds,
                             std::size_t i, const EvalConfig& cfg, const SensorModel& sensor,
                             const EvaluateOptions& opts = {});

struct TrajectoryEvaluation {
  EvaluationReport report;
  std::vector<PoseEvaluation> poses;  // index-aligned with the trajectory
};

/// Evaluates every pose and aggregates S_b, P_bad and P_acc. Results are
/// identical for any thread count.
TrajectoryEvaluation evaluate_trajectory(const Trajectory& trajectory,
                                         const std::vector<PointCloud>& clouds,
                                         const EvalConfig& cfg, const SensorModel& sensor,
                                         const EvaluateOptions& opts = {});

}  // namespace mapeval
