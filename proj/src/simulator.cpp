#include "mapeval/simulator.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "mapeval/geometry.hpp"

namespace mapeval {

void Scene::validate() const {
  for (const Box& b : boxes) {
    if ((b.max - b.min).minCoeff() <= 0.0) throw SpecError("box with non-positive extent");
    if (b.min.z() < 0.0) throw SpecError("box below the ground plane");
  }
  for (const Pole& p : poles) {
    if (!(p.radius > 0.0)) throw SpecError("pole radius must be positive");
    if (!(p.height > 0.0)) throw SpecError("pole height must be positive");
  }
}

namespace {

constexpr double kRayEps = 1e-9;

std::optional<double> intersect_ground(const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  if (d.z() >= -kRayEps) return std::nullopt;  // parallel or upward
  const double t = -o.z() / d.z();
  if (t <= kRayEps) return std::nullopt;
  return t;
}

std::optional<double> intersect_box(const Box& box, const Eigen::Vector3d& o,
                                    const Eigen::Vector3d& d) {
  double t_enter = 0.0;
  double t_exit = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    if (std::abs(d[axis]) < kRayEps) {
      if (o[axis] < box.min[axis] || o[axis] > box.max[axis]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[axis] - o[axis]) / d[axis];
    double t1 = (box.max[axis] - o[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return std::nullopt;
  }
  if (t_enter <= kRayEps) return std::nullopt;  // origin inside or behind
  return t_enter;
}

std::optional<double> intersect_pole(const Pole& pole, const Eigen::Vector3d& o,
                                     const Eigen::Vector3d& d) {
  std::optional<double> best;
  // lateral surface
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > kRayEps * kRayEps) {
    const double ox = o.x() - pole.center_x;
    const double oy = o.y() - pole.center_y;
    const double b = 2.0 * (ox * d.x() + oy * d.y());
    const double c = ox * ox + oy * oy - pole.radius * pole.radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double t = (-b - std::sqrt(disc)) / (2.0 * a);
      if (t > kRayEps) {
        const double z = o.z() + t * d.z();
        if (z >= 0.0 && z <= pole.height) best = t;
      }
    }
  }
  // top cap
  if (d.z() < -kRayEps) {
    const double t = (pole.height - o.z()) / d.z();
    if (t > kRayEps && (!best || t < *best)) {
      const double x = o.x() + t * d.x() - pole.center_x;
      const double y = o.y() + t * d.y() - pole.center_y;
      if (x * x + y * y <= pole.radius * pole.radius) best = t;
    }
  }
  return best;
}

}  // namespace

std::optional<std::pair<double, Label>> raycast(const Scene& scene, const Eigen::Vector3d& origin,
                                                const Eigen::Vector3d& direction,
                                                double max_range) {
  double best = max_range;
  Label label = Label::Default;
  bool hit = false;

  if (auto t = intersect_ground(origin, direction); t && *t <= best) {
    best = *t;
    label = Label::Ground;
    hit = true;
  }
  for (const Box& box : scene.boxes) {
    if (auto t = intersect_box(box, origin, direction); t && *t <= best) {
      best = *t;
      label = Label::Default;
      hit = true;
    }
  }
  for (const Pole& pole : scene.poles) {
    if (auto t = intersect_pole(pole, origin, direction); t && *t <= best) {
      best = *t;
      label = Label::Pole;
      hit = true;
    }
  }
  if (!hit) return std::nullopt;
  return std::make_pair(best, label);
}

namespace {

inline std::uint64_t mix_seed(std::uint64_t seed, std::int64_t frame) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(frame + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

PointCloud simulate_scan(const Scene& scene, const Pose& pose, const SensorModel& sensor,
                         const SimOptions& opts) {
  sensor.validate();
  scene.validate();

  const int fm = sensor.firings_per_rev();
  const Eigen::Vector3d origin = lidar_origin(pose, sensor);
  const Eigen::Quaterniond world_from_lidar = pose.rotation * sensor.lidar_extrinsic.rotation;
  const RigidTransform body_from_world = pose.transform().inverse();

  std::mt19937_64 rng(mix_seed(opts.seed, pose.index));
  std::normal_distribution<double> noise(0.0, 1.0);
  const bool noisy = opts.range_noise_sigma > 0.0;

  PointCloud cloud;
  cloud.frame_index = pose.index;
  cloud.frame = Frame::Body;
  cloud.points.reserve(static_cast<std::size_t>(sensor.n_lasers) * fm / 2);

  constexpr double kVerticalMinDeg = -25.0;
  constexpr double kVerticalMaxDeg = 15.0;
  const double vertical_step =
      (kVerticalMaxDeg - kVerticalMinDeg) / static_cast<double>(sensor.n_lasers - 1);

  for (int s = 0; s < sensor.n_lasers; ++s) {
    const double v = deg_to_rad(kVerticalMinDeg + s * vertical_step);
    const double cv = std::cos(v);
    const double sv = std::sin(v);
    for (int f = 0; f < fm; ++f) {
      const double h = deg_to_rad(f * sensor.angular_resolution_deg);
      const Eigen::Vector3d dir_lidar(cv * std::cos(h), cv * std::sin(h), sv);
      const Eigen::Vector3d dir_world = world_from_lidar * dir_lidar;
      const auto hit = raycast(scene, origin, dir_world, opts.max_range_m);
      if (!hit) {
        if (noisy) noise(rng);  // keep the stream aligned with the firing pattern
        continue;
      }
      double range = hit->first;
      if (noisy) {
        range += opts.range_noise_sigma * noise(rng);
        if (range < 0.05) range = 0.05;
      }
      LidarPoint p;
      p.position = body_from_world.apply(origin + range * dir_world);
      p.scan_id = static_cast<std::uint16_t>(s);
      p.fire_id = static_cast<std::uint16_t>(f);
      p.label = hit->second;
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

double PathSpec::total_length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    total += (waypoints[i] - waypoints[i - 1]).norm();
  }
  if (closed && waypoints.size() >= 2 && (waypoints.back() - waypoints.front()).norm() > 0.0) {
    total += (waypoints.back() - waypoints.front()).norm();
  }
  return total;
}

namespace {

struct PathSample {
  Eigen::Vector2d position;
  Eigen::Vector2d tangent;
};

std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> path_segments(const PathSpec& path) {
  std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> segments;
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    if ((path.waypoints[i] - path.waypoints[i - 1]).norm() > 0.0) {
      segments.emplace_back(path.waypoints[i - 1], path.waypoints[i]);
    }
  }
  if (path.closed && path.waypoints.size() >= 2 &&
      (path.waypoints.back() - path.waypoints.front()).norm() > 0.0) {
    segments.emplace_back(path.waypoints.back(), path.waypoints.front());
  }
  return segments;
}

PathSample sample_path(const std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>>& segments,
                       double arclen) {
  double walked = 0.0;
  for (const auto& [a, b] : segments) {
    const double len = (b - a).norm();
    if (arclen <= walked + len) {
      const double u = (arclen - walked) / len;
      return PathSample{a + u * (b - a), (b - a) / len};
    }
    walked += len;
  }
  const auto& [a, b] = segments.back();
  return PathSample{b, (b - a).normalized()};
}

}  // namespace

Benchmark build_benchmark(const Scene& scene, const PathSpec& path, const SensorModel& sensor,
                          const SimOptions& opts, int threads) {
  const auto segments = path_segments(path);
  if (segments.empty()) throw SpecError("path needs at least two distinct waypoints");
  if (!(path.spacing_m > 0.0)) throw SpecError("pose spacing must be positive");

  const double total = path.total_length();
  std::size_t count;
  if (path.closed) {
    count = static_cast<std::size_t>(total / path.spacing_m);
  } else {
    count = static_cast<std::size_t>(total / path.spacing_m) + 1;
  }
  if (count == 0) throw SpecError("path shorter than one pose spacing");

  Benchmark bench;
  bench.trajectory.poses.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const PathSample s = sample_path(segments, k * path.spacing_m);
    Pose pose;
    pose.index = static_cast<std::int64_t>(k);
    pose.translation = Eigen::Vector3d(s.position.x(), s.position.y(), 0.0);
    const double yaw = std::atan2(s.tangent.y(), s.tangent.x());
    pose.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()));
    bench.trajectory.poses[k] = pose;
  }

  bench.clouds.resize(count);
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) {
      bench.clouds[k] = simulate_scan(scene, bench.trajectory.poses[k], sensor, opts);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&]() {
        while (true) {
          const std::size_t k = next.fetch_add(1);
          if (k >= count) break;
          bench.clouds[k] = simulate_scan(scene, bench.trajectory.poses[k], sensor, opts);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  return bench;
}

Scene default_benchmark_scene() {
  // a walled street circuit: every leg of the path runs between continuous
  // walls ~10 m to each side, so open ground never extends into regions the
  // submap covers only sparsely; pole positions are deliberately irregular
  // so no pole lines up with a building corner along a whole family of rays
  Scene scene;
  auto wall = [&scene](double x0, double y0, double x1, double y1, double height) {
    Box b;
    b.min = Eigen::Vector3d(x0, y0, 0.0);
    b.max = Eigen::Vector3d(x1, y1, height);
    scene.boxes.push_back(b);
  };
  // stem street (both passes run through it)
  wall(10, -10, 11, 20, 5);
  wall(-11, -10, -10, 20, 5);
  wall(-11, -11, 11, -10, 5);  // south cap behind the start pose
  // loop head: outer perimeter
  wall(-50, 179, 50, 180, 5);     // north
  wall(-50, 20, -11, 21, 5);      // south-west piece
  wall(11, 20, 50, 21, 5);        // south-east piece
  wall(49, 20, 50, 180, 5);       // east
  wall(-50, 20, -49, 180, 5);     // west
  // central block inside the loop head
  wall(-30, 40, 30, 160, 5);

  auto pole = [&scene](double x, double y) {
    scene.poles.push_back(Pole{x, y, 0.22, 5.0});
  };
  // stem
  pole(5.4, 3.7);
  pole(-4.7, 12.9);
  pole(5.6, 24.2);
  // south street
  pole(-24.6, 24.3);
  pole(-14.2, 36.1);
  pole(14.7, 35.6);
  pole(27.2, 24.9);
  // east leg
  pole(45.3, 53.7);
  pole(34.6, 81.2);
  pole(44.8, 109.4);
  pole(35.3, 137.8);
  pole(45.1, 160.2);
  // north street
  pole(28.4, 175.2);
  pole(12.6, 164.3);
  pole(-8.7, 175.8);
  pole(-24.3, 164.6);
  // west leg
  pole(-45.6, 151.3);
  pole(-34.4, 123.8);
  pole(-44.2, 96.7);
  pole(-34.8, 69.2);
  pole(-45.0, 45.6);
  return scene;
}

PathSpec default_benchmark_path() {
  PathSpec path;
  path.spacing_m = 1.0;
  path.closed = true;
  path.waypoints = {{0, 0},      {0, 30},   {40, 30},  {40, 170},
                    {-40, 170},  {-40, 30}, {0, 30}};
  return path;
}

}  // namespace mapeval
