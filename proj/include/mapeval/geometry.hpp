#pragma once

#include "mapeval/types.hpp"

namespace mapeval {

/// World position of a body-frame point under `pose` (R*p + t).
Eigen::Vector3d compose(const Pose& pose, const Eigen::Vector3d& point_body);

/// World position of the lidar optical center O_i for a pose.
Eigen::Vector3d lidar_origin(const Pose& pose, const SensorModel& sensor);

Pose inverse(const Pose& pose);

double deg_to_rad(double deg);
double rad_to_deg(double rad);

}  // namespace mapeval
