#pragma once

// Brute-force reference implementations used as independent oracles. These
// deliberately take different routes than the library (materialized affinity
// matrix, projection-based distances, literal window arithmetic) and must stay
// decoupled from the code under test.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gcloam/features.hpp"
#include "gcloam/matching.hpp"

namespace gcloam::oracles {

struct RankedNeighbor {
  int index;
  double dist2;
};

inline std::vector<RankedNeighbor> bruteForceKnn(const std::vector<Eigen::Vector3d>& points,
                                                 const Eigen::Vector3d& query, int k) {
  std::vector<RankedNeighbor> all;
  all.reserve(points.size());
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    all.push_back({i, (points[i] - query).squaredNorm()});
  }
  std::sort(all.begin(), all.end(), [](const RankedNeighbor& a, const RankedNeighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  });
  if (static_cast<int>(all.size()) > k) all.resize(k);
  return all;
}

/// Point-to-line distance via projection onto the line direction (the library
/// uses the cross-product form).
inline double lineDistanceByProjection(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                       const Eigen::Vector3d& b) {
  const Eigen::Vector3d u = (b - a).normalized();
  const Eigen::Vector3d v = p - a;
  return (v - v.dot(u) * u).norm();
}

/// Signed point-to-plane distance via the scalar triple product.
inline double planeDistanceByDeterminant(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                         const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  Eigen::Matrix3d m;
  m.col(0) = b - a;
  m.col(1) = c - a;
  m.col(2) = p - a;
  return m.determinant() / (b - a).cross(c - a).norm();
}

/// Smoothness by accumulating the neighbor sum first:
/// || 2w * p_i - sum_j p_j || / (|S| * ||p_i||).
inline double smoothnessBySum(const std::vector<Eigen::Vector3d>& points, int i, int w) {
  Eigen::Vector3d neighbor_sum = Eigen::Vector3d::Zero();
  for (int j = i - w; j <= i + w; ++j) {
    if (j != i) neighbor_sum += points[j];
  }
  const double set_size = 2.0 * w + 1.0;
  return (2.0 * w * points[i] - neighbor_sum).norm() / (set_size * points[i].norm());
}

struct VoteOracleResult {
  std::vector<int> votes;
  std::vector<int> kept;  // descending votes, ties by index
};

/// Materializes the full symmetric affinity matrix, then tallies one vote per
/// partner at or above eta and filters below the x-fraction floor.
inline VoteOracleResult voteOracle(const std::vector<Correspondence>& corrs, double eta,
                                   double fraction_x, double sigma) {
  const int n = static_cast<int>(corrs.size());
  VoteOracleResult out;
  out.votes.assign(n, 0);
  if (n < 2) {
    for (int i = 0; i < n; ++i) out.kept.push_back(i);
    return out;
  }

  std::vector<std::vector<double>> affinity(n, std::vector<double>(n, 1.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = (corrs[i].target - corrs[j].target).norm() -
                       (corrs[i].source - corrs[j].source).norm();
      affinity[i][j] = std::exp(-(d * d) / (sigma * sigma));
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j != i && affinity[i][j] >= eta) ++out.votes[i];
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (out.votes[a] != out.votes[b]) return out.votes[a] > out.votes[b];
    return a < b;
  });
  for (int idx : order) {
    if (out.votes[idx] > fraction_x * n) out.kept.push_back(idx);
  }
  return out;
}

struct SelectionOracleResult {
  std::vector<int> edges;
  std::vector<int> planars;
};

/// Literal ordered-set window selection: sort descending, edges are ranks
/// k..k+m-1, planars the n ranks before the last l, thresholded on both sides;
/// the k sharpest and l flattest ranks are never selected.
inline SelectionOracleResult selectionOracle(std::vector<SmoothnessEntry> entries, int m, int n,
                                             int k, int l, double r_t) {
  std::sort(entries.begin(), entries.end(), [](const SmoothnessEntry& a, const SmoothnessEntry& b) {
    if (a.smoothness != b.smoothness) return a.smoothness > b.smoothness;
    return a.point_index < b.point_index;
  });
  const int count = static_cast<int>(entries.size());

  SelectionOracleResult out;
  for (int rank = 0; rank < count; ++rank) {
    const bool in_sharpest_k = rank < k;
    const bool in_flattest_l = rank >= count - l;
    if (in_sharpest_k || in_flattest_l) continue;

    if (rank >= k && rank < k + m && entries[rank].smoothness > r_t) {
      out.edges.push_back(entries[rank].point_index);
    }
    if (rank >= count - l - n && rank < count - l && entries[rank].smoothness < r_t) {
      out.planars.push_back(entries[rank].point_index);
    }
  }
  return out;
}

}  // namespace gcloam::oracles
