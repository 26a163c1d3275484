#include "gcloam/features.hpp"

#include <algorithm>
#include <cmath>

#include "gcloam/errors.hpp"
#include "gcloam/parallel.hpp"

namespace gcloam {

std::vector<bool> markDisjoint(std::span<const LidarPoint> channel_points,
                               double sigma_disjoint) {
  const int n = static_cast<int>(channel_points.size());
  std::vector<bool> mask(n, false);
  for (int i = 1; i + 1 < n; ++i) {
    const double to_next = (channel_points[i + 1].position - channel_points[i].position).norm();
    const double to_prev = (channel_points[i - 1].position - channel_points[i].position).norm();
    mask[i] = std::abs(to_next - to_prev) > sigma_disjoint;
  }
  return mask;
}

double smoothness(std::span<const LidarPoint> channel_points, int i, int half_window) {
  const int n = static_cast<int>(channel_points.size());
  if (i < half_window || i + half_window >= n) {
    throw InsufficientNeighbors("point " + std::to_string(i) + " lacks a full window of " +
                                std::to_string(half_window) + " neighbors per side");
  }
  const Eigen::Vector3d& center = channel_points[i].position;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int j = i - half_window; j <= i + half_window; ++j) {
    if (j == i) continue;
    sum += center - channel_points[j].position;
  }
  const double set_size = 2.0 * half_window + 1.0;
  return sum.norm() / (set_size * center.norm());
}

SubregionSelection selectInSubregion(std::vector<SmoothnessEntry> entries,
                                     const SelectionParams& params) {
  std::sort(entries.begin(), entries.end(), [](const SmoothnessEntry& a, const SmoothnessEntry& b) {
    if (a.smoothness != b.smoothness) return a.smoothness > b.smoothness;
    return a.point_index < b.point_index;
  });

  const int count = static_cast<int>(entries.size());
  const int k = params.skip_sharpest;
  const int l = params.skip_flattest;

  SubregionSelection out;

  // Edges: ranks k .. k+m-1, clipped so the flattest l ranks stay untouched.
  const int edge_end = std::min(k + params.edges_per_subregion, count - l);
  for (int rank = k; rank < edge_end; ++rank) {
    if (entries[rank].smoothness > params.smoothness_threshold) {
      out.edge_indices.push_back(entries[rank].point_index);
    }
  }

  // Planars: the n ranks just before the last l, clipped so the sharpest k
  // ranks stay untouched.
  const int planar_end = count - l;
  const int planar_begin = std::max(planar_end - params.planars_per_subregion, k);
  for (int rank = planar_begin; rank < planar_end; ++rank) {
    if (rank < 0) continue;
    if (entries[rank].smoothness < params.smoothness_threshold) {
      out.planar_indices.push_back(entries[rank].point_index);
    }
  }

  return out;
}

namespace {

struct ChannelFeatures {
  std::vector<FeaturePoint> edges;
  std::vector<FeaturePoint> planars;
};

ChannelFeatures extractChannel(const std::vector<LidarPoint>& points, int channel,
                               const SelectionParams& params) {
  ChannelFeatures out;
  const int n = static_cast<int>(points.size());
  if (n < 2 * params.half_window + 1) return out;

  const std::vector<bool> disjoint = markDisjoint(points, params.sigma_disjoint);

  // Candidates need a full smoothness window and must not be disjoint; the
  // boundary points still serve as neighbors.
  std::vector<SmoothnessEntry> candidates;
  candidates.reserve(n);
  for (int i = params.half_window; i + params.half_window < n; ++i) {
    if (disjoint[i]) continue;
    candidates.push_back({i, smoothness(points, i, params.half_window)});
  }

  const auto subregionOf = [&](int point_index) {
    return std::min(static_cast<int>(static_cast<long long>(point_index) * params.subregions / n),
                    params.subregions - 1);
  };

  auto emit = [&](const std::vector<int>& indices, int subregion,
                  std::vector<FeaturePoint>& dst, const std::vector<SmoothnessEntry>& pool) {
    for (int idx : indices) {
      const auto it = std::find_if(pool.begin(), pool.end(),
                                   [idx](const SmoothnessEntry& e) { return e.point_index == idx; });
      FeaturePoint fp;
      fp.position = points[idx].position;
      fp.channel = channel;
      fp.subregion = subregion;
      fp.smoothness = it->smoothness;
      fp.rel_time = points[idx].rel_time;
      dst.push_back(fp);
    }
  };

  for (int s = 0; s < params.subregions; ++s) {
    std::vector<SmoothnessEntry> pool;
    for (const auto& entry : candidates) {
      if (subregionOf(entry.point_index) == s) pool.push_back(entry);
    }
    if (pool.empty()) continue;
    const SubregionSelection sel = selectInSubregion(pool, params);
    emit(sel.edge_indices, s, out.edges, pool);
    emit(sel.planar_indices, s, out.planars, pool);
  }
  return out;
}

}  // namespace

FeatureSet selectFeatures(const Scan& scan, const SelectionParams& params, int threads) {
  const int n_channels = static_cast<int>(scan.channels.size());
  std::vector<ChannelFeatures> per_channel(n_channels);
  parallelFor(n_channels, threads, [&](int c) {
    per_channel[c] = extractChannel(scan.channels[c], c, params);
  });

  FeatureSet set;
  for (const auto& ch : per_channel) {
    set.edges.insert(set.edges.end(), ch.edges.begin(), ch.edges.end());
    set.planars.insert(set.planars.end(), ch.planars.begin(), ch.planars.end());
  }
  return set;
}

}  // namespace gcloam
