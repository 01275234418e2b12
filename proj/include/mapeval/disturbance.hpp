#pragma once

#include <cstdint>

#include "mapeval/types.hpp"

namespace mapeval {

enum class DisturbanceAxis : std::uint8_t { XY = 0, Z = 1 };

struct DisturbanceSegment {
  double start_arclen_m = 0.0;
  double length_m = 50.0;
  DisturbanceAxis axis = DisturbanceAxis::XY;
  double magnitude_m = 0.1;
};

struct DisturbancePlan {
  std::vector<DisturbanceSegment> segments;
};

enum class DisturbanceMode : std::uint8_t { XY, Z, Combined };

/// Builds a plan of 50 m disturbance segments spread evenly over the
/// trajectory, magnitudes 0.10/0.15/0.20 m drawn from a 6:1:1 pool (at least
/// one of each once three segments fit), in seeded random order. At most
/// eight segments are placed, matching the benchmark protocol.
/// Combined mode alternates XY and Z across segments (stress testing only).
DisturbancePlan plan_disturbances(double total_arclen_m, DisturbanceMode mode,
                                  std::uint64_t seed);

/// Arclength of each pose along the trajectory polyline (arclen[0] = 0).
std::vector<double> pose_arclengths(const Trajectory& trajectory);

/// Offsets the translation of every pose whose arclength falls inside a
/// segment: XY along the horizontal normal of the local path direction, Z
/// straight up. Poses outside all segments are returned bit-identical.
/// Throws PlanOutOfRange if a segment starts beyond the trajectory.
Trajectory inject_disturbance(const Trajectory& trajectory, const DisturbancePlan& plan);

}  // namespace mapeval
