#pragma once

#include <span>
#include <vector>

#include "gcloam/scan.hpp"

namespace gcloam {

struct SelectionParams {
  double sigma_disjoint = 0.3;     // neighbor-distance asymmetry gate, meters
  int half_window = 5;             // smoothness neighbors per side
  double smoothness_threshold = 0.1;  // r_t: above = edge, below = planar
  int subregions = 6;              // equal point-count splits per channel
  int edges_per_subregion = 2;     // m
  int planars_per_subregion = 4;   // n
  int skip_sharpest = 1;           // k
  int skip_flattest = 2;           // l
};

struct SmoothnessEntry {
  int point_index = 0;  // position within the channel's point list
  double smoothness = 0.0;
};

struct FeaturePoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  int channel = 0;
  int subregion = 0;
  double smoothness = 0.0;
  double rel_time = 0.0;
};

struct FeatureSet {
  std::vector<FeaturePoint> edges;
  std::vector<FeaturePoint> planars;

  bool empty() const { return edges.empty() && planars.empty(); }
};

/// True where |dist(prev,this) - dist(next,this)| exceeds sigma; first and
/// last points of a channel are never marked. Lists shorter than 3 come back
/// all false.
std::vector<bool> markDisjoint(std::span<const LidarPoint> channel_points,
                               double sigma_disjoint);

/// r = || sum_{j in window, j != i} (p_i - p_j) || / (|S| * ||p_i||)
/// with |S| = 2*half_window + 1. Throws InsufficientNeighbors when the point
/// lacks a full window on either side.
double smoothness(std::span<const LidarPoint> channel_points, int i, int half_window);

struct SubregionSelection {
  std::vector<int> edge_indices;    // point indices, sharper first
  std::vector<int> planar_indices;  // point indices, flatter last
};

/// Rank the entries by descending smoothness (ties by point index) and pick
/// the configured windows: edges are the m entries after the first k, planars
/// the n entries before the last l; the k sharpest and l flattest are never
/// selected, and the threshold gate applies on both sides.
SubregionSelection selectInSubregion(std::vector<SmoothnessEntry> entries,
                                     const SelectionParams& params);

FeatureSet selectFeatures(const Scan& scan, const SelectionParams& params, int threads = 1);

}  // namespace gcloam
