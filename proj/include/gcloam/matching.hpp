#pragma once

#include <span>
#include <string>
#include <vector>

#include "gcloam/features.hpp"
#include "gcloam/kdtree.hpp"
#include "gcloam/se3.hpp"

namespace gcloam {

enum class FeatureKind { kEdge, kPlanar };

/// A candidate association: one source feature paired with its matched target
/// point (previous-scan feature or map centroid). A vertex of the
/// compatibility graph.
struct Correspondence {
  Eigen::Vector3d source = Eigen::Vector3d::Zero();
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  FeatureKind kind = FeatureKind::kEdge;
  int feature_index = 0;   // position within its kind's feature list
  int target_index = -1;   // position within the matched target set, if any
  int subregion_id = 0;    // subgraph partition
  double match_distance = 0.0;
};

/// Voting outcome over one correspondence list.
struct VoteTable {
  std::vector<int> votes;  // per input correspondence
  std::vector<int> order;  // every index, by descending votes (ties by index)
  std::vector<int> kept;   // surviving indices, by descending votes

  int maxVote() const;
};

struct MatchingParams {
  double sigma = 0.2;             // consistency distance scale, meters
  double vote_threshold = 0.9;    // eta: minimum score for a vote
  double filter_fraction = 0.10;  // x: vote floor as fraction of candidates
  double max_match_distance = 5.0;
  int sectors = 6;                // azimuthal subgraph partitions
};

/// S_c = exp(-d^2 / sigma^2) with d = ||target_a - target_b|| - ||source_a - source_b||.
double consistencyScore(const Correspondence& a, const Correspondence& b, double sigma);

/// Votes within one subgraph: o_i counts the partners j with S_c(i,j) >= eta,
/// and an index is kept when o_i > fraction_x * |corrs|. Lists shorter than 2
/// pass through unfiltered with zero votes.
VoteTable voteAndFilter(std::span<const Correspondence> corrs, double eta, double fraction_x,
                        double sigma);

/// Groups correspondences by subregion_id, votes each subgraph independently
/// (optionally in parallel), and merges the results back into one table whose
/// ordering is by descending votes over the union.
VoteTable voteAndFilterPartitioned(std::span<const Correspondence> corrs,
                                   const MatchingParams& params, int threads = 1);

/// KD-trees over a feature set's edge and planar positions, with per-feature
/// channels retained for the residual anchor rules.
struct TargetIndex {
  KdTree edges;
  KdTree planars;
  std::vector<int> edge_channels;
  std::vector<int> planar_channels;

  static TargetIndex build(const FeatureSet& set);
};

struct CorrespondenceSet {
  std::vector<Correspondence> all;
  std::size_t dropped_no_neighbor = 0;
};

/// Stage one: nearest neighbor per source feature (projected by `projection`),
/// multi-to-one allowed. Features without a neighbor within max_match_distance
/// are dropped and counted. Subregion ids are equal-angle azimuth sectors of
/// the source points.
CorrespondenceSet initialCorrespondences(const FeatureSet& features, const TargetIndex& target,
                                         const PoseSE3& projection, double max_match_distance,
                                         int sectors);

/// Equal-count azimuth partition sized to ~target_per_sector entries each;
/// rewrites subregion_id in place (used by the mapping stage).
void assignSectorsByAzimuthRank(std::vector<Correspondence>& corrs, int target_per_sector);

std::string formatVoteDiagnostics(std::size_t initial, const VoteTable& table);

}  // namespace gcloam
