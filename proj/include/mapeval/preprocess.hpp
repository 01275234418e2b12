#pragma once

#include <optional>

#include "mapeval/types.hpp"

namespace mapeval {

/// Scatter-downsampling parameters derived from the sensor geometry.
/// Moduli are floored to integers; a zero modulus is clamped to 1.
struct DownsampleParams {
  struct Band {
    double range_m;
    std::int64_t modulus;
  };

  std::int64_t eta_ground = 1;
  std::vector<Band> eta_vec;
  double xi = 1.0;  // firings_per_rev / n_lasers, per-laser phase offset

  static DownsampleParams from_sensor(const SensorModel& sensor);
};

/// Voxel-grid filter keeping, per occupied cell, the input point nearest to
/// the cell's point centroid (first such point on ties). Positions are never
/// altered; output preserves input order. When `anchor` is given, cell keys
/// and centroid distances are computed in the anchor frame so the grid moves
/// rigidly with it.
PointCloud voxel_filter(const PointCloud& cloud, double leaf,
                        const std::optional<RigidTransform>& anchor = std::nullopt);

/// In-place variant over a bare point sequence (used for submap assembly).
void voxel_filter_points(std::vector<LidarPoint>& points, double leaf,
                         const std::optional<RigidTransform>& anchor = std::nullopt);

/// Scan-pattern downsampling of a single body-frame cloud: poles always
/// retained, ground thinned by eta_ground, remaining points thinned by the
/// modulus of the first range band containing them. Output points are
/// bit-identical copies of input points.
PointCloud downsample_frame(const PointCloud& cloud, const SensorModel& sensor,
                            const DownsampleParams& params);

/// Transforms a body-frame cloud into the world frame through `pose`.
PointCloud to_world(const PointCloud& cloud, const Pose& pose);

}  // namespace mapeval
