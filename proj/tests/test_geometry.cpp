#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mapeval/geometry.hpp"

using namespace mapeval;

namespace {

std::mt19937_64 rng(12345);

Eigen::Quaterniond random_rotation() {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q;
}

Eigen::Vector3d random_vector(double scale = 10.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

Pose make_pose(std::int64_t index, const Eigen::Quaterniond& q, const Eigen::Vector3d& t) {
  Pose p;
  p.index = index;
  p.rotation = q;
  p.translation = t;
  return p;
}

}  // namespace

TEST_CASE("compose on the identity pose returns the point") {
  Pose pose;
  CHECK(compose(pose, {1, 2, 3}).isApprox(Eigen::Vector3d(1, 2, 3)));
}

TEST_CASE("compose with a pure translation shifts the point") {
  Pose pose = make_pose(0, Eigen::Quaterniond::Identity(), {10, 0, 0});
  CHECK(compose(pose, {1, 0, 0}).isApprox(Eigen::Vector3d(11, 0, 0)));
}

TEST_CASE("compose with a 90 degree yaw rotates x into y") {
  Pose pose = make_pose(0, Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitZ())),
                        {0, 0, 0});
  const Eigen::Vector3d p = compose(pose, {1, 0, 0});
  CHECK(p.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.y() == doctest::Approx(1.0));
  CHECK(p.z() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lidar_origin composes the extrinsic translation") {
  SensorModel sensor;
  sensor.lidar_extrinsic.translation = {0, 0, 1.8};

  Pose identity;
  CHECK(lidar_origin(identity, sensor).isApprox(Eigen::Vector3d(0, 0, 1.8)));

  Pose shifted = make_pose(1, Eigen::Quaterniond::Identity(), {5, 5, 0});
  CHECK(lidar_origin(shifted, sensor).isApprox(Eigen::Vector3d(5, 5, 1.8)));

  sensor.lidar_extrinsic.translation = {1, 0, 1.8};
  Pose flipped = make_pose(2, Eigen::Quaterniond(Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitZ())),
                           {0, 0, 0});
  const Eigen::Vector3d o = lidar_origin(flipped, sensor);
  CHECK(o.x() == doctest::Approx(-1.0));
  CHECK(o.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(o.z() == doctest::Approx(1.8));
}

TEST_CASE("compose round-trips through the inverse pose") {
  for (int i = 0; i < 200; ++i) {
    const Pose pose = make_pose(0, random_rotation(), random_vector(50.0));
    const Pose inv = inverse(pose);
    const Eigen::Vector3d p = random_vector(100.0);
    CHECK((compose(inv, compose(pose, p)) - p).norm() < 1e-9);
  }
}

TEST_CASE("rigid transforms preserve pairwise distances") {
  for (int i = 0; i < 100; ++i) {
    const Pose pose = make_pose(0, random_rotation(), random_vector(50.0));
    const Eigen::Vector3d a = random_vector();
    const Eigen::Vector3d b = random_vector();
    const double before = (a - b).norm();
    const double after = (compose(pose, a) - compose(pose, b)).norm();
    CHECK(std::abs(before - after) < 1e-9);
  }
}

TEST_CASE("RigidTransform composition matches sequential application") {
  for (int i = 0; i < 50; ++i) {
    const RigidTransform f{random_rotation(), random_vector()};
    const RigidTransform g{random_rotation(), random_vector()};
    const Eigen::Vector3d p = random_vector();
    CHECK(((f * g).apply(p) - f.apply(g.apply(p))).norm() < 1e-9);
    CHECK((f.inverse().apply(f.apply(p)) - p).norm() < 1e-9);
  }
}

TEST_CASE("trajectory validation rejects gaps and bad quaternions") {
  Trajectory traj;
  traj.poses.push_back(make_pose(0, Eigen::Quaterniond::Identity(), {0, 0, 0}));
  traj.poses.push_back(make_pose(2, Eigen::Quaterniond::Identity(), {1, 0, 0}));
  CHECK_THROWS_AS(traj.validate(), NonContiguousIndex);

  traj.poses[1].index = 1;
  CHECK_NOTHROW(traj.validate());

  traj.poses[1].rotation = Eigen::Quaterniond(1.0, 0.001, 0.0, 0.0);  // not normalized
  CHECK_THROWS_AS(traj.validate(), Error);
}

TEST_CASE("eval config validation enforces the search radius relation") {
  EvalConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  cfg.ghost_search_radius_m = cfg.on_ray_tolerance_m;  // must be strictly larger
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);

  cfg = EvalConfig{};
  cfg.pole_ratio_threshold = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);

  cfg = EvalConfig{};
  cfg.voxel_leaf_m = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}

TEST_CASE("sensor model computes firings per revolution") {
  SensorModel sensor;
  sensor.n_lasers = 16;
  sensor.angular_resolution_deg = 0.2;
  CHECK(sensor.firings_per_rev() == 1800);
  CHECK_NOTHROW(sensor.validate());

  sensor.angular_resolution_deg = 0.4;
  CHECK(sensor.firings_per_rev() == 900);
}
