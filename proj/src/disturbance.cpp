#include "mapeval/disturbance.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mapeval {

DisturbancePlan plan_disturbances(double total_arclen_m, DisturbanceMode mode,
                                  std::uint64_t seed) {
  constexpr double kSegmentLength = 50.0;
  constexpr double kMinGap = 25.0;
  constexpr int kMaxSegments = 8;  // benchmark protocol: 6 + 1 + 1 areas

  const int fit = static_cast<int>((total_arclen_m + kMinGap) / (kSegmentLength + kMinGap));
  const int k = std::min(kMaxSegments, fit);
  if (k < 1) {
    throw SpecError("trajectory too short for a 50 m disturbance segment");
  }

  // magnitude pool in 6:1:1 proportion, each magnitude present once three
  // segments fit
  std::vector<double> magnitudes;
  if (k == 1) {
    magnitudes = {0.10};
  } else if (k == 2) {
    magnitudes = {0.10, 0.20};
  } else {
    const int n15 = std::max(1, static_cast<int>(std::llround(k / 8.0)));
    const int n20 = n15;
    magnitudes.assign(k - n15 - n20, 0.10);
    magnitudes.insert(magnitudes.end(), n15, 0.15);
    magnitudes.insert(magnitudes.end(), n20, 0.20);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(magnitudes.begin(), magnitudes.end(), rng);

  DisturbancePlan plan;
  const double stride = total_arclen_m / k;
  for (int j = 0; j < k; ++j) {
    DisturbanceSegment seg;
    seg.start_arclen_m = (j + 0.5) * stride - kSegmentLength / 2.0;
    seg.length_m = kSegmentLength;
    seg.magnitude_m = magnitudes[j];
    switch (mode) {
      case DisturbanceMode::XY:
        seg.axis = DisturbanceAxis::XY;
        break;
      case DisturbanceMode::Z:
        seg.axis = DisturbanceAxis::Z;
        break;
      case DisturbanceMode::Combined:
        seg.axis = (j % 2 == 0) ? DisturbanceAxis::XY : DisturbanceAxis::Z;
        break;
    }
    plan.segments.push_back(seg);
  }
  return plan;
}

std::vector<double> pose_arclengths(const Trajectory& trajectory) {
  std::vector<double> arclen(trajectory.size(), 0.0);
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    arclen[i] = arclen[i - 1] +
                (trajectory.poses[i].translation - trajectory.poses[i - 1].translation).norm();
  }
  return arclen;
}

namespace {

Eigen::Vector3d local_tangent(const Trajectory& trajectory, std::size_t i) {
  const auto& poses = trajectory.poses;
  const std::size_t lo = i > 0 ? i - 1 : i;
  const std::size_t hi = i + 1 < poses.size() ? i + 1 : i;
  Eigen::Vector3d t = poses[hi].translation - poses[lo].translation;
  if (t.norm() < 1e-12) t = Eigen::Vector3d::UnitX();
  return t.normalized();
}

}  // namespace

Trajectory inject_disturbance(const Trajectory& trajectory, const DisturbancePlan& plan) {
  trajectory.validate();
  const std::vector<double> arclen = pose_arclengths(trajectory);
  const double total = arclen.empty() ? 0.0 : arclen.back();

  std::vector<DisturbanceSegment> segments = plan.segments;
  std::sort(segments.begin(), segments.end(),
            [](const DisturbanceSegment& a, const DisturbanceSegment& b) {
              return a.start_arclen_m < b.start_arclen_m;
            });
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const DisturbanceSegment& seg = segments[s];
    if (seg.start_arclen_m < 0.0 || seg.start_arclen_m + seg.length_m > total + 1e-9) {
      throw PlanOutOfRange("disturbance segment [" + std::to_string(seg.start_arclen_m) + ", " +
                           std::to_string(seg.start_arclen_m + seg.length_m) +
                           ") exceeds the trajectory arclength " + std::to_string(total));
    }
    if (s > 0 && segments[s - 1].start_arclen_m + segments[s - 1].length_m > seg.start_arclen_m) {
      throw SpecError("disturbance segments overlap");
    }
  }

  Trajectory out = trajectory;
  std::size_t seg_idx = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    while (seg_idx < segments.size() &&
           arclen[i] >= segments[seg_idx].start_arclen_m + segments[seg_idx].length_m) {
      ++seg_idx;
    }
    if (seg_idx >= segments.size()) break;
    const DisturbanceSegment& seg = segments[seg_idx];
    if (arclen[i] < seg.start_arclen_m) continue;  // in the gap before this segment

    Eigen::Vector3d offset;
    if (seg.axis == DisturbanceAxis::Z) {
      offset = Eigen::Vector3d(0.0, 0.0, seg.magnitude_m);
    } else {
      const Eigen::Vector3d t = local_tangent(trajectory, i);
      Eigen::Vector3d normal(-t.y(), t.x(), 0.0);
      const double len = normal.norm();
      normal = len > 1e-12 ? Eigen::Vector3d(normal / len) : Eigen::Vector3d::UnitX();
      offset = seg.magnitude_m * normal;
    }
    out.poses[i].translation += offset;
  }
  return out;
}

}  // namespace mapeval
