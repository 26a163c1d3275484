#include "gcloam/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gcloam {

KdTree::KdTree(std::vector<Eigen::Vector3d> points) : points_(std::move(points)) {
  if (points_.empty()) return;
  nodes_.reserve(points_.size());
  std::vector<int> order(points_.size());
  std::iota(order.begin(), order.end(), 0);
  root_ = build(order, 0, static_cast<int>(order.size()));
}

int KdTree::build(std::vector<int>& order, int begin, int end) {
  if (begin >= end) return -1;

  // Split on the axis with the widest extent over this range.
  Eigen::Vector3d lo = points_[order[begin]];
  Eigen::Vector3d hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order[i]]);
    hi = hi.cwiseMax(points_[order[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](int a, int b) {
                     const double ca = points_[a][axis];
                     const double cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });

  const int node_id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{order[mid], axis, -1, -1});
  const int left = build(order, begin, mid);
  const int right = build(order, mid + 1, end);
  nodes_[node_id].left = left;
  nodes_[node_id].right = right;
  return node_id;
}

void KdTree::search(int node_id, const Eigen::Vector3d& query, std::size_t k,
                    std::vector<Candidate>& heap) const {
  if (node_id < 0) return;
  const Node& node = nodes_[node_id];

  const Candidate cand{(points_[node.point] - query).squaredNorm(), node.point};
  if (heap.size() < k) {
    heap.push_back(cand);
    std::push_heap(heap.begin(), heap.end());
  } else if (cand < heap.front()) {
    std::pop_heap(heap.begin(), heap.end());
    heap.back() = cand;
    std::push_heap(heap.begin(), heap.end());
  }

  const double diff = query[node.axis] - points_[node.point][node.axis];
  const int near = diff < 0 ? node.left : node.right;
  const int far = diff < 0 ? node.right : node.left;

  search(near, query, k, heap);
  // Equal plane distance can still tie on the far side, so prune strictly.
  if (heap.size() < k || diff * diff <= heap.front().dist2) {
    search(far, query, k, heap);
  }
}

std::vector<KdTree::Neighbor> KdTree::knn(const Eigen::Vector3d& query, int k) const {
  if (empty()) throw EmptyTree("knn query on empty kd-tree");
  if (k < 1) throw Error("knn requires k >= 1");

  std::vector<Candidate> heap;
  heap.reserve(static_cast<std::size_t>(k));
  search(root_, query, static_cast<std::size_t>(k), heap);

  std::sort(heap.begin(), heap.end());
  std::vector<Neighbor> out;
  out.reserve(heap.size());
  for (const auto& c : heap) out.push_back({c.index, std::sqrt(c.dist2)});
  return out;
}

KdTree::Neighbor KdTree::nearest(const Eigen::Vector3d& query) const {
  return knn(query, 1).front();
}

}  // namespace gcloam
