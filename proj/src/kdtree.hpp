#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

namespace langevin::detail {

/// Static k-d tree over a row-major n x d point array (not owned).
class KdTree {
 public:
  KdTree(const double* data, std::size_t n, int dim) : data_(data), dim_(dim), index_(n) {
    std::iota(index_.begin(), index_.end(), std::size_t{0});
    if (n > 0) {
      nodes_.reserve(2 * n / kLeafSize + 2);
      build(0, n, 0);
    }
  }

  /// Euclidean distance to the k-th nearest stored point, skipping the
  /// stored point with index `exclude` (pass npos for none).
  double kth_distance(const double* query, int k, std::size_t exclude = npos) const {
    Heap heap;
    search(0, query, static_cast<std::size_t>(k), exclude, heap);
    return heap.size() < static_cast<std::size_t>(k) ? std::numeric_limits<double>::infinity()
                                                     : std::sqrt(heap.top());
  }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

 private:
  static constexpr std::size_t kLeafSize = 16;
  using Heap = std::priority_queue<double>;

  struct Node {
    std::size_t begin, end;
    int axis = -1;  // -1: leaf
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  const double* point(std::size_t i) const { return data_ + i * static_cast<std::size_t>(dim_); }

  std::size_t build(std::size_t begin, std::size_t end, int depth) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;
    // Split on the axis of largest spread.
    int axis = 0;
    double best = -1.0;
    for (int a = 0; a < dim_; ++a) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t i = begin; i < end; ++i) {
        const double v = point(index_[i])[a];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best) best = hi - lo, axis = a;
    }
    if (best <= 0.0) return id;  // all points equal
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + static_cast<std::ptrdiff_t>(begin),
                     index_.begin() + static_cast<std::ptrdiff_t>(mid),
                     index_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) { return point(a)[axis] < point(b)[axis]; });
    const double split = point(index_[mid])[axis];
    const std::size_t left = build(begin, mid, depth + 1);
    const std::size_t right = build(mid, end, depth + 1);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(std::size_t id, const double* q, std::size_t k, std::size_t exclude, Heap& heap) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = index_[i];
        if (idx == exclude) continue;
        const double* p = point(idx);
        double d2 = 0.0;
        for (int a = 0; a < dim_; ++a) d2 += (p[a] - q[a]) * (p[a] - q[a]);
        if (heap.size() < k) {
          heap.push(d2);
        } else if (d2 < heap.top()) {
          heap.pop();
          heap.push(d2);
        }
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::size_t near = diff < 0.0 ? node.left : node.right;
    const std::size_t far = diff < 0.0 ? node.right : node.left;
    search(near, q, k, exclude, heap);
    if (heap.size() < k || diff * diff <= heap.top()) search(far, q, k, exclude, heap);
  }

  const double* data_;
  int dim_;
  std::vector<std::size_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace langevin::detail
