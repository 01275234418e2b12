#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <vector>

#include "mapeval/errors.hpp"

namespace mapeval {

enum class Label : std::uint8_t { Default = 0, Ground = 1, Pole = 2 };

enum class Frame : std::uint8_t { Body = 0, World = 1 };

struct LidarPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::uint16_t scan_id = 0;
  std::uint16_t fire_id = 0;
  Label label = Label::Default;
};

/// Rigid transform as unit quaternion + translation. Applying it maps
/// p -> R*p + t.
struct RigidTransform {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.conjugate();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }

  RigidTransform operator*(const RigidTransform& rhs) const {
    RigidTransform out;
    out.rotation = rotation * rhs.rotation;
    out.rotation.normalize();
    out.translation = rotation * rhs.translation + translation;
    return out;
  }
};

/// One estimated pose of the trajectory (the transform placing the body
/// frame of scan `index` into the world frame).
struct Pose {
  std::int64_t index = 0;
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  RigidTransform transform() const { return RigidTransform{rotation, translation}; }
};

struct Trajectory {
  std::vector<Pose> poses;

  std::size_t size() const { return poses.size(); }

  /// Indices must be contiguous from 0; quaternions unit within 1e-9.
  void validate() const;
};

struct PointCloud {
  std::int64_t frame_index = -1;
  Frame frame = Frame::Body;
  std::vector<LidarPoint> points;
};

/// Sensor geometry: laser count, horizontal resolution and the transform
/// placing the lidar optical center in the body frame.
struct SensorModel {
  int n_lasers = 16;
  double angular_resolution_deg = 0.2;
  RigidTransform lidar_extrinsic{Eigen::Quaterniond::Identity(), Eigen::Vector3d(0, 0, 1.8)};

  int firings_per_rev() const { return static_cast<int>(360.0 / angular_resolution_deg); }

  void validate() const;
};

struct EvalConfig {
  double submap_radius_m = 30.0;           // r_s
  double ghost_search_radius_m = 0.05;     // r_ghs
  double on_ray_tolerance_m = 0.03;        // d_thre
  double grazing_angle_threshold_deg = 75.0;
  double ghost_severity_threshold_m = 0.1;
  double pole_ratio_threshold = 0.05;      // t_pole
  double ordinary_ratio_threshold = 0.02;  // t_ordi
  double voxel_leaf_m = 0.02;
  double ray_sample_spacing_m = 0.05;
  double ray_start_offset_m = 0.15;
  double ray_end_margin_m = 1.0;
  double pca_neighborhood_radius_m = 0.3;
  int pca_min_neighbors = 8;

  void validate() const;
};

struct PoseStats {
  std::int64_t index = 0;
  std::int64_t n_pole = 0;
  std::int64_t n_ordi = 0;
  std::int64_t m_pole = 0;
  std::int64_t m_ordi = 0;
  bool is_bad = false;

  double pole_ratio() const { return n_pole > 0 ? static_cast<double>(m_pole) / n_pole : 0.0; }
  double ordi_ratio() const { return n_ordi > 0 ? static_cast<double>(m_ordi) / n_ordi : 0.0; }
};

struct EvaluationReport {
  std::vector<PoseStats> per_pose;                // evaluated poses, ascending index
  std::vector<std::int64_t> unevaluated_indices;  // poses without a submap
  std::vector<std::int64_t> bad_pose_indices;     // S_b, sorted
  double p_bad = 0.0;
  double p_acc = 1.0;
};

}  // namespace mapeval
