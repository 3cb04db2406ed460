#pragma once

#include <utility>
#include <vector>

#include "hypkob/types.hpp"

namespace hypkob {

/// Static kd-tree over a point set; exact nearest and k-nearest queries.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Vec> points);

  std::size_t size() const { return points_.size(); }
  const Vec& point(std::size_t i) const { return points_[i]; }

  /// Index of the nearest point; ties resolved to the smaller index.
  int nearest(const Vec& q) const;

  /// The k nearest points as (squared distance, index), ascending.
  std::vector<std::pair<double, int>> knn(const Vec& q, int k) const;

 private:
  struct Node {
    int lo, hi;  // range into order_
    int axis;
    double split;
    int left = -1, right = -1;
  };
  int build(int lo, int hi, int depth);
  void search(int node, const Vec& q, int k, std::vector<std::pair<double, int>>& heap) const;

  std::vector<Vec> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace hypkob
