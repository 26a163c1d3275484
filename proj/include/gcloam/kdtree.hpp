#pragma once

#include <Eigen/Core>
#include <vector>

#include "gcloam/errors.hpp"

namespace gcloam {

/// Static 3D kd-tree. Queries return exactly the k nearest points, with
/// distance ties broken by insertion index (matches a brute-force sort).
class KdTree {
 public:
  struct Neighbor {
    int index = -1;
    double distance = 0.0;  // euclidean
  };

  KdTree() = default;
  explicit KdTree(std::vector<Eigen::Vector3d> points);

  std::vector<Neighbor> knn(const Eigen::Vector3d& query, int k) const;
  Neighbor nearest(const Eigen::Vector3d& query) const;

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Eigen::Vector3d& point(int index) const { return points_[index]; }
  const std::vector<Eigen::Vector3d>& points() const { return points_; }

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  struct Candidate {
    double dist2;
    int index;
    bool operator<(const Candidate& other) const {
      return dist2 < other.dist2 || (dist2 == other.dist2 && index < other.index);
    }
  };

  int build(std::vector<int>& order, int begin, int end);
  void search(int node_id, const Eigen::Vector3d& query, std::size_t k,
              std::vector<Candidate>& heap) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace gcloam
