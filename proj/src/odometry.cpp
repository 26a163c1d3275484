#include "gcloam/odometry.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

#include "gcloam/features.hpp"

namespace gcloam {

Scan deskew(const Scan& scan, const PoseSE3& motion) {
  Scan out = scan;
  const Eigen::Matrix<double, 6, 1> twist = logSE3(motion);
  for (auto& channel : out.channels) {
    for (auto& pt : channel) {
      const PoseSE3 correction = expSE3((1.0 - pt.rel_time) * twist);
      pt.position = correction.apply(pt.position);
    }
  }
  return out;
}

FeatureSet redeskewFeatures(const FeatureSet& features, const PoseSE3& old_motion,
                            const PoseSE3& new_motion) {
  const Eigen::Matrix<double, 6, 1> old_twist = logSE3(old_motion);
  const Eigen::Matrix<double, 6, 1> new_twist = logSE3(new_motion);
  FeatureSet out = features;
  const auto move = [&](std::vector<FeaturePoint>& list) {
    for (auto& f : list) {
      const double fraction = 1.0 - f.rel_time;
      const PoseSE3 swap =
          compose(expSE3(fraction * new_twist), expSE3(fraction * old_twist).inverse());
      f.position = swap.apply(f.position);
    }
  };
  move(out.edges);
  move(out.planars);
  return out;
}

std::vector<double> voteWeights(const VoteTable& table, const WeightSchedule& schedule,
                                bool use_weighting) {
  const std::size_t n = table.kept.size();
  std::vector<double> weights(n, 1.0);
  if (!use_weighting || n == 0) return weights;

  int o_min = std::numeric_limits<int>::max();
  int o_max = std::numeric_limits<int>::min();
  for (int idx : table.kept) {
    o_min = std::min(o_min, table.votes[idx]);
    o_max = std::max(o_max, table.votes[idx]);
  }

  const double top_cut = schedule.top_fraction * static_cast<double>(n);
  for (std::size_t rank = 0; rank < n; ++rank) {
    if (static_cast<double>(rank) > top_cut) break;  // remaining ranks keep weight 1
    if (o_max == o_min) {
      weights[rank] = schedule.scale;
    } else {
      weights[rank] = schedule.scale *
                      static_cast<double>(table.votes[table.kept[rank]] - o_min) /
                      static_cast<double>(o_max - o_min);
    }
  }
  return weights;
}

namespace {

// Nearest feature satisfying a channel predicate. A bounded knn usually
// contains a qualifying candidate; the linear scan is the exact fallback.
int nearestWithChannel(const KdTree& tree, const std::vector<int>& channels,
                       const Eigen::Vector3d& query, double cap, int exclude_index,
                       const std::function<bool(int)>& channel_ok) {
  const int probe = std::min<int>(16, static_cast<int>(tree.size()));
  if (probe > 0) {
    for (const auto& nb : tree.knn(query, probe)) {
      if (nb.distance > cap) break;
      if (nb.index != exclude_index && channel_ok(channels[nb.index])) return nb.index;
    }
    if (probe == static_cast<int>(tree.size())) return -1;  // already looked at everything
  }

  int best = -1;
  double best_d2 = cap * cap;
  for (int i = 0; i < static_cast<int>(tree.size()); ++i) {
    if (i == exclude_index || !channel_ok(channels[i])) continue;
    const double d2 = (tree.point(i) - query).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

}  // namespace

ResidualBuildResult buildResiduals(const std::vector<Correspondence>& corrs,
                                   const VoteTable& votes, const TargetIndex& prev_index,
                                   const PoseSE3& projection, const WeightSchedule& schedule,
                                   const OdometryParams& params) {
  ResidualBuildResult out;
  out.blocks.reserve(votes.kept.size());
  const std::vector<double> weights =
      voteWeights(votes, schedule, params.use_weighting && params.use_graph_filter);

  for (std::size_t rank = 0; rank < votes.kept.size(); ++rank) {
    const Correspondence& corr = corrs[votes.kept[rank]];
    const Eigen::Vector3d projected = projection.apply(corr.source);
    const double w = weights[rank];

    if (corr.kind == FeatureKind::kEdge) {
      const int ch = prev_index.edge_channels[corr.target_index];
      const int other = nearestWithChannel(
          prev_index.edges, prev_index.edge_channels, projected, params.anchor_search_cap,
          corr.target_index, [&](int c) {
            return c != ch && std::abs(c - ch) <= params.cross_channel_window;
          });
      if (other < 0) {
        ++out.dropped;
        continue;
      }
      ResidualBlock blk =
          ResidualBlock::line(corr.source, corr.target, prev_index.edges.point(other), w);
      if (isDegenerate(blk)) {
        ++out.dropped;
        continue;
      }
      out.blocks.push_back(blk);
    } else {
      const int ch = prev_index.planar_channels[corr.target_index];
      const int same = nearestWithChannel(
          prev_index.planars, prev_index.planar_channels, projected, params.anchor_search_cap,
          corr.target_index, [&](int c) { return c == ch; });
      const int other = nearestWithChannel(
          prev_index.planars, prev_index.planar_channels, projected, params.anchor_search_cap,
          corr.target_index, [&](int c) {
            return c != ch && std::abs(c - ch) <= params.cross_channel_window;
          });
      if (same < 0 || other < 0) {
        ++out.dropped;
        continue;
      }
      ResidualBlock blk = ResidualBlock::plane(corr.source, corr.target,
                                               prev_index.planars.point(same),
                                               prev_index.planars.point(other), w);
      if (isDegenerate(blk)) {
        ++out.dropped;
        continue;
      }
      out.blocks.push_back(blk);
    }
  }
  return out;
}

namespace {

VoteTable passthroughTable(std::size_t n) {
  VoteTable table;
  table.votes.assign(n, 0);
  table.order.resize(n);
  table.kept.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    table.order[i] = static_cast<int>(i);
    table.kept[i] = static_cast<int>(i);
  }
  return table;
}

}  // namespace

OdometryFrame estimateRelative(const FeatureSet& curr, const FeatureSet& prev,
                               const PoseSE3& T_init, const OdometryParams& params) {
  OdometryFrame frame;
  frame.relative = T_init;

  const TargetIndex prev_index = TargetIndex::build(prev);

  for (int pass = 0; pass < params.outer_passes; ++pass) {
    CorrespondenceSet cs =
        initialCorrespondences(curr, prev_index, frame.relative,
                               params.matching.max_match_distance, params.matching.sectors);
    const VoteTable table = params.use_graph_filter
                                ? voteAndFilterPartitioned(cs.all, params.matching, params.threads)
                                : passthroughTable(cs.all.size());

    frame.stats.initial = cs.all.size();
    frame.stats.kept = table.kept.size();
    frame.stats.removed = cs.all.size() - table.kept.size();
    frame.stats.dropped_no_neighbor = cs.dropped_no_neighbor;
    frame.votes = table;

    const ResidualBuildResult built = buildResiduals(cs.all, table, prev_index, frame.relative,
                                                     params.weights, params);
    frame.stats.dropped_blocks = built.dropped;

    if (built.blocks.size() < 6) {
      frame.degraded = true;
      frame.relative = T_init;  // fall back to the prediction
      return frame;
    }

    auto [pose, report] = lmSolve(built.blocks, frame.relative, params.solver);
    frame.relative = pose;
    frame.report = report;
  }
  return frame;
}

OdometryFrame OdometryTracker::adoptFrame(const FeatureSet& features, OdometryFrame frame) {
  global_ = compose(global_, frame.relative);
  frame.global = global_;
  last_relative_ = frame.relative;
  prev_features_ = features;
  return frame;
}

OdometryFrame OdometryTracker::processFrame(const FeatureSet& features) {
  OdometryFrame frame;
  if (!has_prev_) {
    has_prev_ = true;
    prev_features_ = features;
    frame.relative = PoseSE3::Identity();
    frame.global = global_;
    return frame;
  }
  return adoptFrame(features, estimateRelative(features, prev_features_, last_relative_, params_));
}

OdometryFrame OdometryTracker::processScan(const Scan& raw_scan, const SelectionParams& selection,
                                           int threads, FeatureSet* features_out) {
  using Clock = std::chrono::steady_clock;
  double preprocess_ms = 0.0;
  const auto timedExtract = [&](const PoseSE3& motion) {
    const auto start = Clock::now();
    FeatureSet features = selectFeatures(deskew(raw_scan, motion), selection, threads);
    preprocess_ms += std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return features;
  };

  const FeatureSet predicted_features = timedExtract(last_relative_.inverse());

  if (!has_prev_) {
    has_prev_ = true;
    prev_features_ = predicted_features;
    if (features_out != nullptr) *features_out = predicted_features;
    OdometryFrame frame;
    frame.global = global_;
    frame.preprocess_ms = preprocess_ms;
    return frame;
  }

  OdometryFrame estimate =
      estimateRelative(predicted_features, prev_features_, last_relative_, params_);
  if (estimate.degraded) {
    if (features_out != nullptr) *features_out = predicted_features;
    OdometryFrame frame = adoptFrame(predicted_features, estimate);
    frame.preprocess_ms = preprocess_ms;
    return frame;
  }

  // Move the same feature returns to the correction implied by each solved
  // motion until the estimate stops changing. The re-estimates start close,
  // so one re-association pass each is enough.
  OdometryParams refine_params = params_;
  refine_params.outer_passes = 1;
  FeatureSet features = predicted_features;
  PoseSE3 deskew_motion = last_relative_.inverse();
  for (int cycle = 0; cycle < params_.deskew_refine_cycles; ++cycle) {
    const PoseSE3 new_motion = estimate.relative.inverse();
    const FeatureSet refined_features = redeskewFeatures(features, deskew_motion, new_motion);
    const OdometryFrame refined =
        estimateRelative(refined_features, prev_features_, estimate.relative, refine_params);
    if (refined.degraded) break;
    const PoseSE3 delta = compose(refined.relative.inverse(), estimate.relative);
    features = refined_features;
    deskew_motion = new_motion;
    estimate = refined;
    if (delta.translation.norm() < 1e-3 && rotationAngle(delta.rotation) < 1e-4) break;
  }

  if (features_out != nullptr) *features_out = features;
  OdometryFrame frame = adoptFrame(features, estimate);
  frame.preprocess_ms = preprocess_ms;
  return frame;
}

}  // namespace gcloam
