#pragma once

#include "gcloam/matching.hpp"
#include "gcloam/scan.hpp"
#include "gcloam/solver.hpp"

namespace gcloam {

/// Vote-guided weighting: the top `top_fraction` of the kept ordering gets
/// scale * (o_i - o_min) / (o_max - o_min); the rest keep weight 1.
struct WeightSchedule {
  double top_fraction = 0.2;  // lambda
  double scale = 2.0;         // alpha
};

struct OdometryParams {
  MatchingParams matching;  // sigma 0.2 m, 6 sectors, 5 m match gate
  WeightSchedule weights;
  SolverOptions solver;
  // Three re-association rounds: two only converge to ~6 mm from a cold
  // identity start at meter-scale displacement.
  int outer_passes = 3;
  int deskew_refine_cycles = 3;    // re-deskew with the solved motion, re-estimate
  int cross_channel_window = 2;    // max |channel delta| for the cross-channel anchor
  double anchor_search_cap = 10.0; // meters
  bool use_graph_filter = true;
  bool use_weighting = true;
  int threads = 1;

  OdometryParams() { solver.max_iterations = 4; }
};

struct CorrespondenceStats {
  std::size_t initial = 0;
  std::size_t kept = 0;
  std::size_t removed = 0;
  std::size_t dropped_no_neighbor = 0;
  std::size_t dropped_blocks = 0;
};

struct OdometryFrame {
  PoseSE3 relative;  // motion of this sweep expressed in the previous sweep frame
  PoseSE3 global;
  SolveReport report;
  CorrespondenceStats stats;
  VoteTable votes;  // final re-association pass
  bool degraded = false;  // under-constrained; relative fell back to the prediction
  double preprocess_ms = 0.0;  // deskew + feature extraction time within processScan
};

/// Re-expresses every point at the sweep-end frame. `motion` maps sweep-start
/// coordinates to sweep-end coordinates; a point at rel_time s receives the
/// screw-interpolated fraction (1 - s) of it.
Scan deskew(const Scan& scan, const PoseSE3& motion);

/// Moves already-deskewed feature points from the correction implied by
/// old_motion to the one implied by new_motion, using each feature's own
/// rel_time. Exact and selection-stable, unlike re-extracting from a
/// re-deskewed scan.
FeatureSet redeskewFeatures(const FeatureSet& features, const PoseSE3& old_motion,
                            const PoseSE3& new_motion);

/// Weight per kept rank (same order as table.kept).
std::vector<double> voteWeights(const VoteTable& table, const WeightSchedule& schedule,
                                bool use_weighting);

struct ResidualBuildResult {
  std::vector<ResidualBlock> blocks;
  std::size_t dropped = 0;  // anchor search failed or anchors degenerate
};

/// One block per kept correspondence: point-to-line for edges (second anchor
/// from a nearby different channel), point-to-plane for planars (second anchor
/// from the same channel, third from a different channel).
ResidualBuildResult buildResiduals(const std::vector<Correspondence>& corrs,
                                   const VoteTable& votes, const TargetIndex& prev_index,
                                   const PoseSE3& projection, const WeightSchedule& schedule,
                                   const OdometryParams& params);

/// Scan-to-scan pose estimation: repeated match -> vote -> weight -> solve
/// passes starting from T_init. Degrades to the prediction with a flag when
/// fewer than 6 residuals survive.
OdometryFrame estimateRelative(const FeatureSet& curr, const FeatureSet& prev,
                               const PoseSE3& T_init, const OdometryParams& params);

/// Sequential frame-in/frame-out odometry state: previous features, the
/// constant-velocity prediction, and the chained global pose.
class OdometryTracker {
 public:
  explicit OdometryTracker(const OdometryParams& params) : params_(params) {}

  /// Motion prediction for the upcoming sweep (previous relative pose).
  PoseSE3 predictedRelative() const { return last_relative_; }

  OdometryFrame processFrame(const FeatureSet& features);

  /// Full per-sweep step: deskew with the prediction, extract, estimate, then
  /// re-deskew with the solved motion, re-extract, and refine once. Deskewing
  /// with the prediction alone feeds the previous estimation error back
  /// through the distortion correction and destabilizes fast-turning
  /// sequences. The refined features land in *features_out for the mapping
  /// stage.
  OdometryFrame processScan(const Scan& raw_scan, const SelectionParams& selection,
                            int threads, FeatureSet* features_out = nullptr);

  const PoseSE3& globalPose() const { return global_; }

 private:
  OdometryFrame adoptFrame(const FeatureSet& features, OdometryFrame frame);

  OdometryParams params_;
  FeatureSet prev_features_;
  bool has_prev_ = false;
  PoseSE3 global_;
  PoseSE3 last_relative_;
};

}  // namespace gcloam
