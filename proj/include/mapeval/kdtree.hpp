#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "mapeval/types.hpp"

namespace mapeval {

/// Balanced kd-tree over 3D points with exact (non-approximate) queries.
/// Splits on the widest-spread axis at the median; ties in every comparison
/// are broken by insertion index, so build and query results are fully
/// deterministic for a fixed input order.
class KdTree {
 public:
  struct Result {
    int index;        // insertion index of the point
    double distance;  // Euclidean distance to the query center
  };

  KdTree() = default;
  explicit KdTree(std::vector<Eigen::Vector3d> points);

  std::size_t size() const { return coords_.size(); }

  /// All points with distance <= radius, sorted ascending by distance,
  /// ties by insertion index.
  std::vector<Result> radius_search(const Eigen::Vector3d& center, double radius) const;

  /// The k nearest points, sorted ascending by distance, ties by index.
  std::vector<Result> knn_search(const Eigen::Vector3d& center, int k) const;

  /// Appends the insertion indices of all points with distance <= radius
  /// (unsorted, deterministic traversal order). Cheaper than radius_search
  /// when ordering is irrelevant.
  void collect_in_radius(const Eigen::Vector3d& center, double radius,
                         std::vector<int>& out) const;

  /// Appends insertion indices of all points inside the closed box [lo, hi].
  void collect_in_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                      std::vector<int>& out) const;

 private:
  struct Node {
    int begin = 0;
    int end = 0;         // leaf covers order_[begin, end)
    int axis = -1;       // -1 for leaf nodes
    double threshold = 0.0;
    int left = -1;
    int right = -1;
  };

  int build_node(int begin, int end);

  static constexpr int kLeafSize = 16;

  std::vector<Eigen::Vector3d> coords_;  // permuted for locality
  std::vector<int> orig_index_;          // coords_[i] was input point orig_index_[i]
  std::vector<Node> nodes_;
  int root_ = -1;
};

/// World-frame neighborhood submap indexed for radius queries.
struct SubmapIndex {
  std::vector<LidarPoint> points;
  KdTree tree;
};

/// Builds the index. Throws EmptyInput on an empty point set.
SubmapIndex build_submap_index(std::vector<LidarPoint> points);

}  // namespace mapeval
