#include "mapeval/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mapeval {

namespace {

struct Entry {
  Eigen::Vector3d c;
  int idx;
};

}  // namespace

KdTree::KdTree(std::vector<Eigen::Vector3d> points) {
  const int n = static_cast<int>(points.size());
  if (n == 0) return;

  std::vector<Entry> entries(n);
  for (int i = 0; i < n; ++i) entries[i] = Entry{points[i], i};
  points.clear();
  points.shrink_to_fit();

  nodes_.reserve(2 * (n / kLeafSize + 2));

  // iterative build over [begin, end) ranges of the entry array
  struct Range {
    int begin, end, node;
  };
  std::vector<Range> pending;
  nodes_.push_back(Node{0, n, -1, 0.0, -1, -1});
  root_ = 0;
  pending.push_back({0, n, 0});
  while (!pending.empty()) {
    Range r = pending.back();
    pending.pop_back();
    if (r.end - r.begin <= kLeafSize) continue;

    Eigen::Vector3d lo = entries[r.begin].c;
    Eigen::Vector3d hi = entries[r.begin].c;
    for (int i = r.begin + 1; i < r.end; ++i) {
      lo = lo.cwiseMin(entries[i].c);
      hi = hi.cwiseMax(entries[i].c);
    }
    const Eigen::Vector3d spread = hi - lo;
    int axis = 0;
    if (spread.y() > spread.x()) axis = 1;
    if (spread.z() > spread[axis]) axis = 2;

    const int mid = r.begin + (r.end - r.begin) / 2;
    // ties broken by insertion index so the partition is unique
    std::nth_element(entries.begin() + r.begin, entries.begin() + mid, entries.begin() + r.end,
                     [axis](const Entry& a, const Entry& b) {
                       if (a.c[axis] != b.c[axis]) return a.c[axis] < b.c[axis];
                       return a.idx < b.idx;
                     });

    const int left = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{r.begin, mid, -1, 0.0, -1, -1});
    const int right = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{mid, r.end, -1, 0.0, -1, -1});
    Node& node = nodes_[r.node];
    node.axis = axis;
    node.threshold = entries[mid].c[axis];
    node.left = left;
    node.right = right;
    pending.push_back({r.begin, mid, left});
    pending.push_back({mid, r.end, right});
  }

  coords_.resize(n);
  orig_index_.resize(n);
  for (int i = 0; i < n; ++i) {
    coords_[i] = entries[i].c;
    orig_index_[i] = entries[i].idx;
  }
}

std::vector<KdTree::Result> KdTree::radius_search(const Eigen::Vector3d& center,
                                                  double radius) const {
  std::vector<Result> results;
  if (root_ < 0) return results;
  const double r2 = radius * radius;
  int stack[64];
  int top = 0;
  stack[top++] = root_;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const double d2 = (coords_[i] - center).squaredNorm();
        if (d2 <= r2) results.push_back(Result{orig_index_[i], std::sqrt(d2)});
      }
      continue;
    }
    const double delta = center[node.axis] - node.threshold;
    if (delta <= radius) stack[top++] = node.left;
    if (delta >= -radius) stack[top++] = node.right;
  }
  std::sort(results.begin(), results.end(), [](const Result& a, const Result& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.index < b.index;
  });
  return results;
}

void KdTree::collect_in_radius(const Eigen::Vector3d& center, double radius,
                               std::vector<int>& out) const {
  if (root_ < 0) return;
  const double r2 = radius * radius;
  int stack[64];
  int top = 0;
  stack[top++] = root_;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        if ((coords_[i] - center).squaredNorm() <= r2) out.push_back(orig_index_[i]);
      }
      continue;
    }
    const double delta = center[node.axis] - node.threshold;
    if (delta <= radius) stack[top++] = node.left;
    if (delta >= -radius) stack[top++] = node.right;
  }
}

void KdTree::collect_in_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                            std::vector<int>& out) const {
  if (root_ < 0) return;
  int stack[64];
  int top = 0;
  stack[top++] = root_;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const Eigen::Vector3d& p = coords_[i];
        if (p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y() &&
            p.z() >= lo.z() && p.z() <= hi.z()) {
          out.push_back(orig_index_[i]);
        }
      }
      continue;
    }
    if (lo[node.axis] <= node.threshold) stack[top++] = node.left;
    if (hi[node.axis] >= node.threshold) stack[top++] = node.right;
  }
}

std::vector<KdTree::Result> KdTree::knn_search(const Eigen::Vector3d& center, int k) const {
  std::vector<Result> best;
  if (root_ < 0 || k <= 0) return best;
  best.reserve(k + 1);
  auto closer = [](const Result& a, const Result& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.index < b.index;
  };
  double bound = std::numeric_limits<double>::infinity();

  struct Item {
    int node;
    double lower_bound;
  };
  std::vector<Item> stack;
  stack.push_back({root_, 0.0});
  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    if (static_cast<int>(best.size()) == k && item.lower_bound > bound) continue;
    const Node& node = nodes_[item.node];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        Result cand{orig_index_[i], (coords_[i] - center).norm()};
        if (static_cast<int>(best.size()) < k) {
          best.push_back(cand);
          std::sort(best.begin(), best.end(), closer);
        } else if (closer(cand, best.back())) {
          best.back() = cand;
          std::sort(best.begin(), best.end(), closer);
        }
        if (static_cast<int>(best.size()) == k) bound = best.back().distance;
      }
      continue;
    }
    const double delta = center[node.axis] - node.threshold;
    const int near = delta <= 0 ? node.left : node.right;
    const int far = delta <= 0 ? node.right : node.left;
    stack.push_back({far, std::max(item.lower_bound, std::abs(delta))});
    stack.push_back({near, item.lower_bound});
  }
  return best;
}

SubmapIndex build_submap_index(std::vector<LidarPoint> points) {
  if (points.empty()) throw EmptyInput("cannot index an empty point set");
  std::vector<Eigen::Vector3d> coords;
  coords.reserve(points.size());
  for (const LidarPoint& p : points) {
    if (!p.position.allFinite()) throw EmptyInput("non-finite coordinate in index input");
    coords.push_back(p.position);
  }
  SubmapIndex index;
  index.points = std::move(points);
  index.tree = KdTree(std::move(coords));
  return index;
}

}  // namespace mapeval
