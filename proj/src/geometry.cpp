#include "mapeval/geometry.hpp"

#include <cmath>

namespace mapeval {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kUnitQuatTol = 1e-9;
}  // namespace

double deg_to_rad(double deg) { return deg * kPi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

Eigen::Vector3d compose(const Pose& pose, const Eigen::Vector3d& point_body) {
  return pose.rotation * point_body + pose.translation;
}

Eigen::Vector3d lidar_origin(const Pose& pose, const SensorModel& sensor) {
  return compose(pose, sensor.lidar_extrinsic.translation);
}

Pose inverse(const Pose& pose) {
  Pose inv;
  inv.index = pose.index;
  inv.rotation = pose.rotation.conjugate();
  inv.translation = -(inv.rotation * pose.translation);
  return inv;
}

void Trajectory::validate() const {
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Pose& p = poses[i];
    if (p.index != static_cast<std::int64_t>(i)) {
      throw NonContiguousIndex("pose indices must be contiguous from 0, got " +
                               std::to_string(p.index) + " at position " + std::to_string(i));
    }
    if (std::abs(p.rotation.norm() - 1.0) > kUnitQuatTol) {
      throw Error("pose " + std::to_string(p.index) + ": quaternion is not unit norm");
    }
    if (!p.translation.allFinite()) {
      throw Error("pose " + std::to_string(p.index) + ": non-finite translation");
    }
  }
}

void SensorModel::validate() const {
  if (n_lasers < 2) throw InvalidConfig("sensor needs at least 2 lasers");
  if (!(angular_resolution_deg > 0.0) || firings_per_rev() <= 0) {
    throw InvalidConfig("angular resolution must be positive and divide 360 into >= 1 firings");
  }
  if (std::abs(lidar_extrinsic.rotation.norm() - 1.0) > kUnitQuatTol) {
    throw InvalidConfig("lidar extrinsic rotation is not a unit quaternion");
  }
}

void EvalConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw InvalidConfig(std::string(name) + " must be strictly positive");
  };
  positive(submap_radius_m, "submap_radius_m");
  positive(ghost_search_radius_m, "ghost_search_radius_m");
  positive(on_ray_tolerance_m, "on_ray_tolerance_m");
  positive(grazing_angle_threshold_deg, "grazing_angle_threshold_deg");
  positive(ghost_severity_threshold_m, "ghost_severity_threshold_m");
  positive(voxel_leaf_m, "voxel_leaf_m");
  positive(ray_sample_spacing_m, "ray_sample_spacing_m");
  positive(ray_start_offset_m, "ray_start_offset_m");
  positive(ray_end_margin_m, "ray_end_margin_m");
  positive(pca_neighborhood_radius_m, "pca_neighborhood_radius_m");
  if (pca_min_neighbors < 3) throw InvalidConfig("pca_min_neighbors must be >= 3");
  if (!(ghost_search_radius_m > on_ray_tolerance_m)) {
    throw InvalidConfig("ghost_search_radius_m must exceed on_ray_tolerance_m");
  }
  auto ratio = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw InvalidConfig(std::string(name) + " must be in (0,1)");
  };
  ratio(pole_ratio_threshold, "pole_ratio_threshold");
  ratio(ordinary_ratio_threshold, "ordinary_ratio_threshold");
}

}  // namespace mapeval
