#pragma once

#include <optional>

#include "mapeval/kdtree.hpp"
#include "mapeval/types.hpp"

namespace mapeval {

/// One detected free-space violation: submap point `ghost_index` lies on the
/// observation ray from the sensor to frame point `capturing_index`.
struct GhostHit {
  std::size_t capturing_index = 0;  // into the evaluated frame cloud
  std::size_t ghost_index = 0;      // into the submap point sequence
  double d_adj = 0.0;               // perpendicular distance to the ray
  double d_ghs = 0.0;               // depth along the ray toward the sensor
  std::optional<double> theta_deg;  // ray/surface-normal angle, empty if the normal was unreliable
  double d_prj = 0.0;               // grazing-corrected ghost severity
};

/// Perpendicular distance from pg to the line through o and pj:
/// |(pj-o) x (pj-pg)| / |pj-o|.
double point_to_ray_distance(const Eigen::Vector3d& o, const Eigen::Vector3d& pj,
                             const Eigen::Vector3d& pg);

/// Signed distance from pg's projection on the ray to pj, positive when pg
/// lies between o and pj: (pj-o) . (pj-pg) / |pj-o|.
double along_ray_depth(const Eigen::Vector3d& o, const Eigen::Vector3d& pj,
                       const Eigen::Vector3d& pg);

/// PCA surface normal at pj from its submap neighborhood. Returns nullopt
/// when fewer than cfg.pca_min_neighbors points lie within
/// cfg.pca_neighborhood_radius_m. The sign points toward `toward` when
/// supplied, otherwise toward non-negative Z, then Y, then X.
std::optional<Eigen::Vector3d> estimate_normal(
    const SubmapIndex& index, const Eigen::Vector3d& pj, const EvalConfig& cfg,
    const std::optional<Eigen::Vector3d>& toward = std::nullopt);

/// Angle in degrees between the ray o->pj and the (sign-agnostic) normal n,
/// folded into [0, 90].
double ray_normal_angle(const Eigen::Vector3d& o, const Eigen::Vector3d& pj,
                        const Eigen::Vector3d& n);

/// Final ghost severity d_prj: d_ghs*cos(theta) past the grazing threshold,
/// d_ghs while on-ray, 0 otherwise. Non-positive depths always yield 0; an
/// unreliable normal (empty theta) skips the grazing test.
double decide_metric(double d_adj, double d_ghs, const std::optional<double>& theta_deg,
                     const EvalConfig& cfg);

/// Walks sample positions along every observation ray of the frame and
/// reports at most one GhostHit (the max-severity candidate) per frame point.
/// `frame` must be in world coordinates and `origin` is the sensor center.
std::vector<GhostHit> detect_frame_ghosts(const PointCloud& frame, const Eigen::Vector3d& origin,
                                          const SubmapIndex& index, const EvalConfig& cfg);

}  // namespace mapeval
