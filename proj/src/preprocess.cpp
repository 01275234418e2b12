#include "mapeval/preprocess.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "mapeval/geometry.hpp"

namespace mapeval {

DownsampleParams DownsampleParams::from_sensor(const SensorModel& sensor) {
  sensor.validate();
  const double theta_r = sensor.angular_resolution_deg;
  auto modulus = [theta_r](double numerator) {
    const auto m = static_cast<std::int64_t>(numerator / theta_r);
    return m > 0 ? m : 1;
  };
  DownsampleParams params;
  params.eta_ground = modulus(30.0);
  params.eta_vec = {{5.0, modulus(6.0)},
                    {10.0, modulus(4.0)},
                    {20.0, modulus(2.0)},
                    {900.0, modulus(1.0)}};
  params.xi = static_cast<double>(sensor.firings_per_rev()) / sensor.n_lasers;
  return params;
}

namespace {

constexpr std::uint64_t kEmptySlot = std::numeric_limits<std::uint64_t>::max();

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// cell boundaries sit at half-leaf offsets: surfaces modeled at round
// coordinates (ground z=0, walls on metric grids) then fall mid-cell, so
// ulp-level noise cannot flip their cell assignment
inline std::uint64_t pack_cell(const Eigen::Vector3d& r, double inv_leaf) {
  constexpr std::int64_t kBias = 1 << 20;
  const auto kx = static_cast<std::int64_t>(std::floor(r.x() * inv_leaf + 0.5)) + kBias;
  const auto ky = static_cast<std::int64_t>(std::floor(r.y() * inv_leaf + 0.5)) + kBias;
  const auto kz = static_cast<std::int64_t>(std::floor(r.z() * inv_leaf + 0.5)) + kBias;
  if ((kx | ky | kz) < 0 || kx >= (1 << 21) || ky >= (1 << 21) || kz >= (1 << 21)) {
    throw Error("voxel filter: coordinate outside the supported extent");
  }
  return static_cast<std::uint64_t>(kx) | (static_cast<std::uint64_t>(ky) << 21) |
         (static_cast<std::uint64_t>(kz) << 42);
}

// Minimal open-addressing map cell-key -> dense id; plain std::unordered_map
// is too slow on the multi-million point submaps assembled per pose.
class CellMap {
 public:
  void reset(std::size_t expected) {
    std::size_t cap = 16;
    while (cap < expected * 2) cap <<= 1;
    mask_ = cap - 1;
    keys_.assign(cap, kEmptySlot);
    ids_.assign(cap, -1);
  }

  int find_or_insert(std::uint64_t key, int next_id) {
    std::size_t slot = splitmix64(key) & mask_;
    while (true) {
      if (keys_[slot] == key) return ids_[slot];
      if (keys_[slot] == kEmptySlot) {
        keys_[slot] = key;
        ids_[slot] = next_id;
        return next_id;
      }
      slot = (slot + 1) & mask_;
    }
  }

 private:
  std::size_t mask_ = 0;
  std::vector<std::uint64_t> keys_;
  std::vector<int> ids_;
};

// scratch buffers persist across calls; submap filtering runs once per
// evaluated pose on millions of points
struct VoxelScratch {
  CellMap map;
  std::vector<Eigen::Vector3d> local;
  std::vector<int> cell_of;
  std::vector<Eigen::Vector3d> sum;
  std::vector<int> count;
  std::vector<double> best_d2;
  std::vector<std::int64_t> best_idx;
};

std::vector<char> voxel_keep_mask(const std::vector<LidarPoint>& points, double leaf,
                                  const std::optional<RigidTransform>& anchor) {
  thread_local VoxelScratch scratch;
  const std::size_t n = points.size();
  const double inv_leaf = 1.0 / leaf;

  scratch.local.resize(n);
  if (anchor.has_value()) {
    const RigidTransform inv = anchor->inverse();
    const Eigen::Matrix3d rot = inv.rotation.toRotationMatrix();
    for (std::size_t i = 0; i < n; ++i) {
      scratch.local[i] = rot * points[i].position + inv.translation;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) scratch.local[i] = points[i].position;
  }

  scratch.map.reset(n);
  scratch.cell_of.resize(n);
  scratch.sum.clear();
  scratch.count.clear();
  int n_cells = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int id = scratch.map.find_or_insert(pack_cell(scratch.local[i], inv_leaf), n_cells);
    if (id == n_cells) {
      ++n_cells;
      scratch.sum.push_back(Eigen::Vector3d::Zero());
      scratch.count.push_back(0);
    }
    scratch.cell_of[i] = id;
    scratch.sum[id] += scratch.local[i];
    scratch.count[id] += 1;
  }

  // representative per cell: first input point nearest the point centroid
  scratch.best_d2.assign(n_cells, std::numeric_limits<double>::infinity());
  scratch.best_idx.assign(n_cells, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const int id = scratch.cell_of[i];
    const Eigen::Vector3d centroid = scratch.sum[id] / scratch.count[id];
    const double d2 = (scratch.local[i] - centroid).squaredNorm();
    if (d2 < scratch.best_d2[id]) {
      scratch.best_d2[id] = d2;
      scratch.best_idx[id] = static_cast<std::int64_t>(i);
    }
  }

  std::vector<char> keep(n, 0);
  for (int id = 0; id < n_cells; ++id) keep[scratch.best_idx[id]] = 1;
  return keep;
}

}  // namespace

void voxel_filter_points(std::vector<LidarPoint>& points, double leaf,
                         const std::optional<RigidTransform>& anchor) {
  if (!(leaf > 0.0)) throw InvalidConfig("voxel leaf must be positive");
  if (points.empty()) return;
  const std::vector<char> keep = voxel_keep_mask(points, leaf, anchor);
  std::size_t out = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (keep[i]) points[out++] = points[i];
  }
  points.resize(out);
}

PointCloud voxel_filter(const PointCloud& cloud, double leaf,
                        const std::optional<RigidTransform>& anchor) {
  PointCloud out;
  out.frame_index = cloud.frame_index;
  out.frame = cloud.frame;
  out.points = cloud.points;
  voxel_filter_points(out.points, leaf, anchor);
  return out;
}

PointCloud downsample_frame(const PointCloud& cloud, const SensorModel& sensor,
                            const DownsampleParams& params) {
  if (cloud.frame != Frame::Body) {
    throw FrameMismatch("downsample_frame expects a body-frame cloud");
  }
  const std::int64_t fm = sensor.firings_per_rev();

  PointCloud out;
  out.frame_index = cloud.frame_index;
  out.frame = cloud.frame;
  out.points.reserve(cloud.points.size() / 8);

  for (const LidarPoint& p : cloud.points) {
    if (p.scan_id >= sensor.n_lasers || p.fire_id >= fm) {
      throw InvalidScanOrFireId("scan_id " + std::to_string(p.scan_id) + " / fire_id " +
                                std::to_string(p.fire_id) + " out of range for the sensor");
    }
    if (p.label == Label::Pole) {
      out.points.push_back(p);
      continue;
    }
    auto f_scat = static_cast<std::int64_t>(std::floor(p.fire_id + p.scan_id * params.xi));
    if (f_scat >= 2 * fm) throw Error("scatter key exceeded a single wrap");
    if (f_scat >= fm) f_scat -= fm;

    if (p.label == Label::Ground && f_scat % params.eta_ground == 0) {
      out.points.push_back(p);
      continue;
    }
    const double range = p.position.norm();
    for (const DownsampleParams::Band& band : params.eta_vec) {
      if (range < band.range_m) {
        if (f_scat % band.modulus == 0) out.points.push_back(p);
        break;
      }
    }
  }
  return out;
}

PointCloud to_world(const PointCloud& cloud, const Pose& pose) {
  if (cloud.frame != Frame::Body) {
    throw FrameMismatch("to_world expects a body-frame cloud");
  }
  if (cloud.frame_index >= 0 && cloud.frame_index != pose.index) {
    throw InputMismatch("cloud frame_index " + std::to_string(cloud.frame_index) +
                        " does not match pose index " + std::to_string(pose.index));
  }
  PointCloud out;
  out.frame_index = cloud.frame_index;
  out.frame = Frame::World;
  out.points = cloud.points;
  for (LidarPoint& p : out.points) p.position = compose(pose, p.position);
  return out;
}

}  // namespace mapeval
