#include "hypkob/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace hypkob {

namespace {
constexpr int kLeafSize = 8;
}

KdTree::KdTree(std::vector<Vec> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) root_ = build(0, static_cast<int>(points_.size()), 0);
}

int KdTree::build(int lo, int hi, int depth) {
  Node node{lo, hi, -1, 0.0};
  const int idx = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (hi - lo <= kLeafSize) return idx;

  const int dim = static_cast<int>(points_[order_[lo]].size());
  int axis = 0;
  double best_spread = -1.0;
  for (int a = 0; a < dim; ++a) {
    double mn = points_[order_[lo]](a), mx = mn;
    for (int i = lo; i < hi; ++i) {
      mn = std::min(mn, points_[order_[i]](a));
      mx = std::max(mx, points_[order_[i]](a));
    }
    if (mx - mn > best_spread) {
      best_spread = mx - mn;
      axis = a;
    }
  }
  (void)depth;
  const int mid = (lo + hi) / 2;
  std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                   [&](int a, int b) {
                     const double va = points_[a](axis), vb = points_[b](axis);
                     return va < vb || (va == vb && a < b);
                   });
  nodes_[idx].axis = axis;
  nodes_[idx].split = points_[order_[mid]](axis);
  const int left = build(lo, mid, depth + 1);
  const int right = build(mid, hi, depth + 1);
  nodes_[idx].left = left;
  nodes_[idx].right = right;
  return idx;
}

void KdTree::search(int ni, const Vec& q, int k, std::vector<std::pair<double, int>>& heap) const {
  const Node& node = nodes_[ni];
  if (node.axis < 0) {
    for (int i = node.lo; i < node.hi; ++i) {
      const int p = order_[i];
      std::pair<double, int> cand{(points_[p] - q).squaredNorm(), p};
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double diff = q(node.axis) - node.split;
  const int first = diff < 0 ? node.left : node.right;
  const int second = diff < 0 ? node.right : node.left;
  search(first, q, k, heap);
  if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().first) {
    search(second, q, k, heap);
  }
}

std::vector<std::pair<double, int>> KdTree::knn(const Vec& q, int k) const {
  std::vector<std::pair<double, int>> heap;
  if (root_ < 0 || k <= 0) return heap;
  heap.reserve(static_cast<std::size_t>(k) + 1);
  search(root_, q, k, heap);
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

int KdTree::nearest(const Vec& q) const {
  auto r = knn(q, 1);
  return r.empty() ? -1 : r.front().second;
}

}  // namespace hypkob
