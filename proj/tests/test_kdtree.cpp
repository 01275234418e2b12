#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "mapeval/kdtree.hpp"

using namespace mapeval;

namespace {

std::mt19937_64 rng(777);

std::vector<Eigen::Vector3d> random_points(std::size_t n, double extent) {
  std::uniform_real_distribution<double> u(-extent, extent);
  std::vector<Eigen::Vector3d> pts(n);
  for (auto& p : pts) p = Eigen::Vector3d(u(rng), u(rng), u(rng));
  return pts;
}

// independent oracle: exhaustive scan with the same inclusive boundary
std::vector<KdTree::Result> linear_radius_search(const std::vector<Eigen::Vector3d>& pts,
                                                 const Eigen::Vector3d& center, double radius) {
  std::vector<KdTree::Result> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d2 = (pts[i] - center).squaredNorm();
    if (d2 <= radius * radius) out.push_back({static_cast<int>(i), std::sqrt(d2)});
  }
  std::sort(out.begin(), out.end(), [](const KdTree::Result& a, const KdTree::Result& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.index < b.index;
  });
  return out;
}

bool same_results(const std::vector<KdTree::Result>& a, const std::vector<KdTree::Result>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].index != b[i].index || a[i].distance != b[i].distance) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("single point is retrievable at its own location") {
  KdTree tree({Eigen::Vector3d(1, 2, 3)});
  const auto res = tree.radius_search({1, 2, 3}, 0.01);
  REQUIRE(res.size() == 1);
  CHECK(res[0].index == 0);
  CHECK(res[0].distance == 0.0);
}

TEST_CASE("unit cube corners are all within the center ball") {
  std::vector<Eigen::Vector3d> corners;
  for (int x = 0; x <= 1; ++x)
    for (int y = 0; y <= 1; ++y)
      for (int z = 0; z <= 1; ++z) corners.emplace_back(x, y, z);
  KdTree tree(corners);
  const auto res = tree.radius_search({0.5, 0.5, 0.5}, 1.0);
  CHECK(res.size() == 8);
  // corner distance is sqrt(0.75)
  for (const auto& r : res) CHECK(r.distance == doctest::Approx(std::sqrt(0.75)));
  CHECK(same_results(res, linear_radius_search(corners, {0.5, 0.5, 0.5}, 1.0)));
}

TEST_CASE("boundary is inclusive") {
  std::vector<Eigen::Vector3d> pts = {{0, 0, 0}, {1, 0, 0}};
  KdTree tree(pts);
  auto res = tree.radius_search({0, 0, 0}, 0.5);
  REQUIRE(res.size() == 1);
  CHECK(res[0].index == 0);

  res = tree.radius_search({0, 0, 0}, 1.0);
  REQUIRE(res.size() == 2);
  CHECK(res[0].index == 0);
  CHECK(res[1].index == 1);
}

TEST_CASE("radius search equals the linear-scan oracle on random data") {
  const auto pts = random_points(1000, 5.0);
  KdTree tree(pts);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> ur(0.05, 3.0);
  for (int q = 0; q < 100; ++q) {
    const Eigen::Vector3d center(u(rng), u(rng), u(rng));
    const double radius = ur(rng);
    CHECK(same_results(tree.radius_search(center, radius),
                       linear_radius_search(pts, center, radius)));
  }
}

TEST_CASE("radius search handles duplicate points deterministically") {
  std::vector<Eigen::Vector3d> pts(50, Eigen::Vector3d(1, 1, 1));
  pts.push_back({2, 2, 2});
  KdTree tree(pts);
  const auto res = tree.radius_search({1, 1, 1}, 0.5);
  REQUIRE(res.size() == 50);
  for (int i = 0; i < 50; ++i) CHECK(res[i].index == i);  // tie-break by insertion index
}

TEST_CASE("monotonicity: larger radius is a superset") {
  const auto pts = random_points(500, 2.0);
  KdTree tree(pts);
  for (int q = 0; q < 20; ++q) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const Eigen::Vector3d center(u(rng), u(rng), u(rng));
    const auto small = tree.radius_search(center, 0.5);
    const auto large = tree.radius_search(center, 1.5);
    std::vector<int> small_idx, large_idx;
    for (const auto& r : small) small_idx.push_back(r.index);
    for (const auto& r : large) large_idx.push_back(r.index);
    std::sort(small_idx.begin(), small_idx.end());
    std::sort(large_idx.begin(), large_idx.end());
    CHECK(std::includes(large_idx.begin(), large_idx.end(), small_idx.begin(), small_idx.end()));
  }
}

TEST_CASE("identical input order yields identical result ordering") {
  const auto pts = random_points(300, 3.0);
  KdTree a(pts);
  KdTree b(pts);
  const auto ra = a.radius_search({0, 0, 0}, 2.0);
  const auto rb = b.radius_search({0, 0, 0}, 2.0);
  CHECK(same_results(ra, rb));
}

TEST_CASE("knn equals a sorted linear scan") {
  const auto pts = random_points(400, 4.0);
  KdTree tree(pts);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int q = 0; q < 50; ++q) {
    const Eigen::Vector3d center(u(rng), u(rng), u(rng));
    const int k = 1 + static_cast<int>(rng() % 20);
    const auto got = tree.knn_search(center, k);

    auto all = linear_radius_search(pts, center, 1e9);
    all.resize(k);
    CHECK(same_results(got, all));
  }
}

TEST_CASE("collect_in_box matches a direct filter") {
  const auto pts = random_points(600, 3.0);
  KdTree tree(pts);
  const Eigen::Vector3d lo(-1.0, -0.5, -2.0);
  const Eigen::Vector3d hi(0.5, 2.0, 1.0);
  std::vector<int> got;
  tree.collect_in_box(lo, hi, got);
  std::sort(got.begin(), got.end());
  std::vector<int> want;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if ((pts[i].array() >= lo.array()).all() && (pts[i].array() <= hi.array()).all()) {
      want.push_back(static_cast<int>(i));
    }
  }
  CHECK(got == want);
}

TEST_CASE("empty index input is rejected") {
  CHECK_THROWS_AS(build_submap_index({}), EmptyInput);
}
