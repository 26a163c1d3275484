#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "gcloam/matching.hpp"
#include "gcloam/odometry.hpp"
#include "gcloam/solver.hpp"

namespace gcloam {

struct MappingParams {
  MatchingParams matching;         // sigma 0.5 m for map subgraphs
  int sector_target = 350;         // correspondences per voting subgraph
  int neighborhood_size = 5;
  double max_neighbor_distance = 2.0;  // all 5 neighbors must sit inside this
  double edge_voxel = 0.2;
  double planar_voxel = 0.4;
  double active_radius = 100.0;
  SolverOptions solver;
  bool use_graph_filter = true;
  int threads = 1;

  MappingParams() {
    matching.sigma = 0.5;
    matching.max_match_distance = 2.0;
    solver.max_iterations = 4;
  }
};

/// World-frame edge and planar feature stores with one representative point
/// per voxel and an eviction radius around the current pose.
class LocalFeatureMap {
 public:
  LocalFeatureMap() : LocalFeatureMap(0.2, 0.4) {}
  LocalFeatureMap(double edge_voxel, double planar_voxel);

  /// Inserts transformed features (keep-first per voxel), evicts everything
  /// beyond the active radius of the pose, and refreshes the KD-trees.
  void integrate(const FeatureSet& features, const PoseSE3& pose, double active_radius);

  const KdTree& tree(FeatureKind kind) const;
  const std::vector<Eigen::Vector3d>& points(FeatureKind kind) const;
  std::size_t size(FeatureKind kind) const { return points(kind).size(); }
  double voxelSize(FeatureKind kind) const;

  /// One "x y z" line per point.
  void exportXyz(FeatureKind kind, const std::string& path) const;

 private:
  struct Store {
    double voxel = 0.0;
    std::vector<Eigen::Vector3d> points;
    std::unordered_set<std::uint64_t> occupied;
    KdTree tree;

    bool insert(const Eigen::Vector3d& p);
    void evictBeyond(const Eigen::Vector3d& center, double radius);
  };

  Store& store(FeatureKind kind);
  const Store& store(FeatureKind kind) const;

  Store edges_;
  Store planars_;
};

struct MapCorrespondence {
  Correspondence corr;  // target = centroid of the 5-NN map neighborhood
  std::vector<Eigen::Vector3d> neighborhood;
};

struct MapAssociation {
  std::vector<MapCorrespondence> all;
  std::size_t dropped = 0;  // neighborhood missing or beyond the distance gate
};

/// Pairs each feature (projected by T_guess) with the centroid of its five
/// nearest same-kind map points. Sector ids come from an equal-count azimuth
/// split sized to params.sector_target.
MapAssociation mapCorrespondences(const FeatureSet& features, const LocalFeatureMap& map,
                                  const PoseSE3& T_guess, const MappingParams& params);

/// Unit-weight blocks from the kept neighborhoods: the two most line-spanning
/// points anchor an edge, the largest-area triangle anchors a plane.
/// Degenerate neighborhoods are skipped and counted.
std::vector<ResidualBlock> mapResidualBlocks(const MapAssociation& assoc, const VoteTable& table,
                                             std::size_t& dropped);

struct MappingResult {
  PoseSE3 pose;
  SolveReport report;
  CorrespondenceStats stats;
  VoteTable votes;
  bool under_constrained = false;
};

/// Scan-to-map refinement: vote-filter the centroid pairs, rebuild line/plane
/// anchors from each kept neighborhood, and run one unweighted solve from
/// T_odom.
MappingResult refinePose(const FeatureSet& features, const LocalFeatureMap& map,
                         const PoseSE3& T_odom, const MappingParams& params);

/// Owns the map and the refined global pose chain.
class MappingStage {
 public:
  explicit MappingStage(const MappingParams& params)
      : params_(params), map_(params.edge_voxel, params.planar_voxel) {}

  /// Refines compose(global, relative) against the map, integrates the frame,
  /// and returns the refined global pose.
  MappingResult processFrame(const FeatureSet& features, const PoseSE3& relative);

  const LocalFeatureMap& map() const { return map_; }
  const PoseSE3& globalPose() const { return global_; }

 private:
  MappingParams params_;
  LocalFeatureMap map_;
  PoseSE3 global_;
  bool initialized_ = false;
};

}  // namespace gcloam
