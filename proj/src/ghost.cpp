#include "mapeval/ghost.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "mapeval/geometry.hpp"

namespace mapeval {

namespace {
constexpr double kDegenerateLength = 1e-9;
}

double point_to_ray_distance(const Eigen::Vector3d& o, const Eigen::Vector3d& pj,
                             const Eigen::Vector3d& pg) {
  const Eigen::Vector3d op = pj - o;
  const double len = op.norm();
  if (len < kDegenerateLength) throw DegenerateRay();
  return op.cross(pj - pg).norm() / len;
}

double along_ray_depth(const Eigen::Vector3d& o, const Eigen::Vector3d& pj,
                       const Eigen::Vector3d& pg) {
  const Eigen::Vector3d op = pj - o;
  const double len = op.norm();
  if (len < kDegenerateLength) throw DegenerateRay();
  return op.dot(pj - pg) / len;
}

std::optional<Eigen::Vector3d> estimate_normal(const SubmapIndex& index,
                                               const Eigen::Vector3d& pj, const EvalConfig& cfg,
                                               const std::optional<Eigen::Vector3d>& toward) {
  std::vector<int> neighbors;
  index.tree.collect_in_radius(pj, cfg.pca_neighborhood_radius_m, neighbors);
  if (static_cast<int>(neighbors.size()) < cfg.pca_min_neighbors) return std::nullopt;
  std::sort(neighbors.begin(), neighbors.end());  // canonical accumulation order

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (int idx : neighbors) mean += index.points[idx].position;
  mean /= static_cast<double>(neighbors.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int idx : neighbors) {
    const Eigen::Vector3d d = index.points[idx].position - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(neighbors.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  Eigen::Vector3d normal = solver.eigenvectors().col(0);  // smallest eigenvalue
  normal.normalize();

  if (toward) {
    if (normal.dot(*toward - pj) < 0.0) normal = -normal;
  } else if (normal.z() < 0.0 || (normal.z() == 0.0 && normal.y() < 0.0) ||
             (normal.z() == 0.0 && normal.y() == 0.0 && normal.x() < 0.0)) {
    normal = -normal;
  }
  return normal;
}

double ray_normal_angle(const Eigen::Vector3d& o, const Eigen::Vector3d& pj,
                        const Eigen::Vector3d& n) {
  const Eigen::Vector3d op = pj - o;
  const double len = op.norm();
  if (len < kDegenerateLength) throw DegenerateRay();
  // the normal sign is arbitrary for a surface, so fold into [0, 90]
  const double c = std::min(1.0, std::abs(op.dot(n)) / len);
  return rad_to_deg(std::acos(c));
}

double decide_metric(double d_adj, double d_ghs, const std::optional<double>& theta_deg,
                     const EvalConfig& cfg) {
  if (d_ghs <= 0.0) return 0.0;
  if (!(d_adj < cfg.on_ray_tolerance_m)) return 0.0;
  if (theta_deg && *theta_deg > cfg.grazing_angle_threshold_deg) {
    return d_ghs * std::cos(deg_to_rad(*theta_deg));
  }
  return d_ghs;
}

std::vector<GhostHit> detect_frame_ghosts(const PointCloud& frame, const Eigen::Vector3d& origin,
                                          const SubmapIndex& index, const EvalConfig& cfg) {
  std::vector<GhostHit> hits;
  const double r = cfg.ghost_search_radius_m;
  const double spacing = cfg.ray_sample_spacing_m;
  const double start = cfg.ray_start_offset_m;
  const Eigen::Vector3d inflate(r, r, r);
  constexpr int kSamplesPerChunk = 8;

  std::vector<int> box_buf;
  std::vector<int> candidates;

  for (std::size_t j = 0; j < frame.points.size(); ++j) {
    const Eigen::Vector3d pj = frame.points[j].position;
    const Eigen::Vector3d to_origin = origin - pj;
    const double ray_len = to_origin.norm();
    if (ray_len < kDegenerateLength) continue;
    const double span = ray_len - cfg.ray_end_margin_m - start;
    if (span < 0.0) continue;  // whole ray inside the excluded margins
    const int steps = static_cast<int>(span / spacing);
    const Eigen::Vector3d dir = to_origin / ray_len;

    candidates.clear();
    for (int k0 = 0; k0 <= steps; k0 += kSamplesPerChunk) {
      const int k1 = std::min(k0 + kSamplesPerChunk - 1, steps);
      const Eigen::Vector3d a = pj + (start + k0 * spacing) * dir;
      const Eigen::Vector3d b = pj + (start + k1 * spacing) * dir;
      box_buf.clear();
      index.tree.collect_in_box(a.cwiseMin(b) - inflate, a.cwiseMax(b) + inflate, box_buf);
      for (int idx : box_buf) {
        const Eigen::Vector3d& pg = index.points[idx].position;
        // membership in the discrete sampling pattern: distance to the
        // nearest sample position must not exceed the search radius
        const double t = (pg - pj).dot(dir);
        int k = static_cast<int>(std::lround((t - start) / spacing));
        k = std::clamp(k, 0, steps);
        const Eigen::Vector3d sample = pj + (start + k * spacing) * dir;
        if ((pg - sample).squaredNorm() <= r * r) candidates.push_back(idx);
      }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    if (candidates.empty()) continue;

    const Eigen::Vector3d w = pj - origin;
    bool theta_ready = false;
    std::optional<double> theta;
    bool captured = false;
    GhostHit best;
    for (int idx : candidates) {
      const Eigen::Vector3d& pg = index.points[idx].position;
      const Eigen::Vector3d v = pj - pg;
      const double d_adj = w.cross(v).norm() / ray_len;
      if (!(d_adj < cfg.on_ray_tolerance_m)) continue;
      const double d_ghs = w.dot(v) / ray_len;
      if (d_ghs <= 0.0 || d_ghs >= ray_len) continue;
      if (!theta_ready) {
        const std::optional<Eigen::Vector3d> normal = estimate_normal(index, pj, cfg, origin);
        if (normal) theta = ray_normal_angle(origin, pj, *normal);
        theta_ready = true;
      }
      const double d_prj = decide_metric(d_adj, d_ghs, theta, cfg);
      if (!captured || d_prj > best.d_prj) {
        captured = true;
        best.capturing_index = j;
        best.ghost_index = static_cast<std::size_t>(idx);
        best.d_adj = d_adj;
        best.d_ghs = d_ghs;
        best.theta_deg = theta;
        best.d_prj = d_prj;
      }
    }
    if (captured) hits.push_back(best);
  }
  return hits;
}

}  // namespace mapeval
