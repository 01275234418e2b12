#include "mapeval/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "mapeval/geometry.hpp"
#include "mapeval/preprocess.hpp"

namespace mapeval {

SubmapIndex assemble_submap(const Trajectory& trajectory, const std::vector<PointCloud>& clouds,
                            std::size_t i, const EvalConfig& cfg,
                            [[maybe_unused]] const SensorModel& sensor) {
  if (trajectory.size() != clouds.size()) {
    throw InputMismatch("trajectory has " + std::to_string(trajectory.size()) + " poses but " +
                        std::to_string(clouds.size()) + " clouds were given");
  }
  if (i >= trajectory.size()) throw InputMismatch("pose index out of range");

  const Pose& pose_i = trajectory.poses[i];
  std::vector<std::size_t> neighbors;
  std::size_t total = 0;
  for (std::size_t j = 0; j < trajectory.size(); ++j) {
    if (j == i) continue;  // a frame cannot ghost against itself
    if ((trajectory.poses[j].translation - pose_i.translation).norm() > cfg.submap_radius_m) {
      continue;
    }
    neighbors.push_back(j);
    total += clouds[j].points.size();
  }

  std::vector<LidarPoint> merged;
  merged.reserve(total);
  for (std::size_t j : neighbors) {
    const Eigen::Matrix3d rot = trajectory.poses[j].rotation.toRotationMatrix();
    const Eigen::Vector3d& t = trajectory.poses[j].translation;
    for (const LidarPoint& q : clouds[j].points) {
      LidarPoint p = q;
      p.position = rot * q.position + t;
      merged.push_back(p);
    }
  }
  if (merged.empty()) {
    throw EmptySubmap("no neighbor pose within r_s of pose " + std::to_string(pose_i.index));
  }

  // the grid is anchored to the evaluated pose so the filter commutes with
  // rigid motions of the whole benchmark
  voxel_filter_points(merged, cfg.voxel_leaf_m, pose_i.transform());
  return build_submap_index(std::move(merged));
}

PoseEvaluation evaluate_pose(const Trajectory& trajectory, const std::vector<PointCloud>& clouds,
                             std::size_t i, const EvalConfig& cfg, const SensorModel& sensor,
                             const EvaluateOptions& opts) {
  PoseEvaluation result;

  SubmapIndex submap;
  try {
    submap = assemble_submap(trajectory, clouds, i, cfg, sensor);
  } catch (const EmptySubmap&) {
    return result;  // unevaluated, not bad
  }

  const Pose& pose = trajectory.poses[i];
  const DownsampleParams params = DownsampleParams::from_sensor(sensor);
  const PointCloud downsampled = downsample_frame(clouds[i], sensor, params);

  PoseStats stats;
  stats.index = pose.index;
  for (const LidarPoint& p : downsampled.points) {
    if (p.label == Label::Pole) {
      ++stats.n_pole;
    } else {
      ++stats.n_ordi;
    }
  }

  PointCloud frame_world = to_world(downsampled, pose);
  const Eigen::Vector3d origin = lidar_origin(pose, sensor);
  const std::vector<GhostHit> hits = detect_frame_ghosts(frame_world, origin, submap, cfg);

  for (const GhostHit& hit : hits) {
    if (!(hit.d_prj > cfg.ghost_severity_threshold_m)) continue;
    result.severe_hits.push_back(hit);
    result.ghost_positions.push_back(submap.points[hit.ghost_index].position);
    if (frame_world.points[hit.capturing_index].label == Label::Pole) {
      ++stats.m_pole;
    } else {
      ++stats.m_ordi;
    }
  }
  stats.is_bad = stats.pole_ratio() > cfg.pole_ratio_threshold ||
                 stats.ordi_ratio() > cfg.ordinary_ratio_threshold;
  result.stats = stats;

  const bool keep_hits = opts.keep_severe_hits || (opts.keep_bad_pose_frames && stats.is_bad);
  if (!keep_hits) {
    result.severe_hits.clear();
    result.severe_hits.shrink_to_fit();
    result.ghost_positions.clear();
    result.ghost_positions.shrink_to_fit();
  }
  if (opts.keep_bad_pose_frames && stats.is_bad) {
    result.frame_world = std::move(frame_world);
  }
  return result;
}

TrajectoryEvaluation evaluate_trajectory(const Trajectory& trajectory,
                                         const std::vector<PointCloud>& clouds,
                                         const EvalConfig& cfg, const SensorModel& sensor,
                                         const EvaluateOptions& opts) {
  trajectory.validate();
  sensor.validate();
  cfg.validate();
  if (trajectory.size() != clouds.size()) {
    throw InputMismatch("trajectory has " + std::to_string(trajectory.size()) + " poses but " +
                        std::to_string(clouds.size()) + " clouds were given");
  }

  const std::size_t n = trajectory.size();
  TrajectoryEvaluation out;
  out.poses.resize(n);

  const int threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      out.poses[i] = evaluate_pose(trajectory, clouds, i, cfg, sensor, opts);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n) break;
          out.poses[i] = evaluate_pose(trajectory, clouds, i, cfg, sensor, opts);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  // deterministic reduction in pose-index order
  std::size_t evaluated = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const PoseEvaluation& pe = out.poses[i];
    if (!pe.stats) {
      out.report.unevaluated_indices.push_back(trajectory.poses[i].index);
      continue;
    }
    ++evaluated;
    out.report.per_pose.push_back(*pe.stats);
    if (pe.stats->is_bad) out.report.bad_pose_indices.push_back(pe.stats->index);
  }
  out.report.p_bad =
      evaluated > 0 ? static_cast<double>(out.report.bad_pose_indices.size()) / evaluated : 0.0;
  out.report.p_acc = 1.0 - out.report.p_bad;
  return out;
}

}  // namespace mapeval
