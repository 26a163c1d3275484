#include "gcloam/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gcloam/parallel.hpp"

namespace gcloam {

int VoteTable::maxVote() const {
  int best = 0;
  for (int v : votes) best = std::max(best, v);
  return best;
}

double consistencyScore(const Correspondence& a, const Correspondence& b, double sigma) {
  const double d = (a.target - b.target).norm() - (a.source - b.source).norm();
  return std::exp(-(d * d) / (sigma * sigma));
}

namespace {

std::vector<int> sortByVotes(const std::vector<int>& votes, std::span<const int> indices) {
  std::vector<int> order(indices.begin(), indices.end());
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (votes[a] != votes[b]) return votes[a] > votes[b];
    return a < b;
  });
  return order;
}

}  // namespace

VoteTable voteAndFilter(std::span<const Correspondence> corrs, double eta, double fraction_x,
                        double sigma) {
  const int n = static_cast<int>(corrs.size());
  VoteTable table;
  table.votes.assign(n, 0);

  if (n < 2) {
    for (int i = 0; i < n; ++i) {
      table.order.push_back(i);
      table.kept.push_back(i);
    }
    return table;
  }

  std::vector<double> xyz(static_cast<std::size_t>(n) * 6);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      xyz[i * 6 + c] = corrs[i].source[c];
      xyz[i * 6 + 3 + c] = corrs[i].target[c];
    }
  }

  // exp(-d^2/s^2) >= eta is equivalent to d^2 <= -s^2 ln(eta); the tiled,
  // branch-free form keeps the per-pair cost flat across subgraph sizes.
  const double d2_gate = -(sigma * sigma) * std::log(eta);
  constexpr int kTile = 64;
  for (int bi = 0; bi < n; bi += kTile) {
    const int bi_end = std::min(bi + kTile, n);
    for (int bj = bi; bj < n; bj += kTile) {
      const int bj_end = std::min(bj + kTile, n);
      for (int i = bi; i < bi_end; ++i) {
        const double* a = &xyz[i * 6];
        for (int j = std::max(i + 1, bj); j < bj_end; ++j) {
          const double* b = &xyz[j * 6];
          const double ds = std::sqrt((a[0] - b[0]) * (a[0] - b[0]) +
                                      (a[1] - b[1]) * (a[1] - b[1]) +
                                      (a[2] - b[2]) * (a[2] - b[2]));
          const double dt = std::sqrt((a[3] - b[3]) * (a[3] - b[3]) +
                                      (a[4] - b[4]) * (a[4] - b[4]) +
                                      (a[5] - b[5]) * (a[5] - b[5]));
          const double d = dt - ds;
          const int vote = d * d <= d2_gate ? 1 : 0;
          table.votes[i] += vote;
          table.votes[j] += vote;
        }
      }
    }
  }

  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  table.order = sortByVotes(table.votes, all);

  const double floor_votes = fraction_x * n;
  for (int idx : table.order) {
    if (table.votes[idx] > floor_votes) table.kept.push_back(idx);
  }
  return table;
}

VoteTable voteAndFilterPartitioned(std::span<const Correspondence> corrs,
                                   const MatchingParams& params, int threads) {
  const int n = static_cast<int>(corrs.size());

  int max_id = 0;
  for (const auto& c : corrs) max_id = std::max(max_id, c.subregion_id);
  std::vector<std::vector<int>> groups(max_id + 1);
  for (int i = 0; i < n; ++i) groups[corrs[i].subregion_id].push_back(i);

  VoteTable merged;
  merged.votes.assign(n, 0);
  std::vector<std::vector<int>> kept_per_group(groups.size());

  parallelFor(static_cast<int>(groups.size()), threads, [&](int g) {
    const auto& members = groups[g];
    if (members.empty()) return;
    std::vector<Correspondence> local;
    local.reserve(members.size());
    for (int idx : members) local.push_back(corrs[idx]);

    const VoteTable sub =
        voteAndFilter(local, params.vote_threshold, params.filter_fraction, params.sigma);
    for (std::size_t i = 0; i < members.size(); ++i) merged.votes[members[i]] = sub.votes[i];
    for (int local_idx : sub.kept) kept_per_group[g].push_back(members[local_idx]);
  });

  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  merged.order = sortByVotes(merged.votes, all);

  std::vector<int> kept_union;
  for (const auto& k : kept_per_group) kept_union.insert(kept_union.end(), k.begin(), k.end());
  merged.kept = sortByVotes(merged.votes, kept_union);
  return merged;
}

TargetIndex TargetIndex::build(const FeatureSet& set) {
  TargetIndex index;
  std::vector<Eigen::Vector3d> edge_pts, planar_pts;
  edge_pts.reserve(set.edges.size());
  planar_pts.reserve(set.planars.size());
  for (const auto& f : set.edges) {
    edge_pts.push_back(f.position);
    index.edge_channels.push_back(f.channel);
  }
  for (const auto& f : set.planars) {
    planar_pts.push_back(f.position);
    index.planar_channels.push_back(f.channel);
  }
  index.edges = KdTree(std::move(edge_pts));
  index.planars = KdTree(std::move(planar_pts));
  return index;
}

namespace {

int azimuthSector(const Eigen::Vector3d& p, int sectors) {
  const double az = std::atan2(p.y(), p.x());  // [-pi, pi]
  int sector = static_cast<int>((az + M_PI) / (2.0 * M_PI) * sectors);
  return std::clamp(sector, 0, sectors - 1);
}

}  // namespace

CorrespondenceSet initialCorrespondences(const FeatureSet& features, const TargetIndex& target,
                                         const PoseSE3& projection, double max_match_distance,
                                         int sectors) {
  CorrespondenceSet out;
  out.all.reserve(features.edges.size() + features.planars.size());

  const auto match = [&](const std::vector<FeaturePoint>& list, const KdTree& tree,
                         FeatureKind kind) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (tree.empty()) {
        ++out.dropped_no_neighbor;
        continue;
      }
      const Eigen::Vector3d projected = projection.apply(list[i].position);
      const KdTree::Neighbor nn = tree.nearest(projected);
      if (nn.distance > max_match_distance) {
        ++out.dropped_no_neighbor;
        continue;
      }
      Correspondence c;
      c.source = list[i].position;
      c.target = tree.point(nn.index);
      c.kind = kind;
      c.feature_index = static_cast<int>(i);
      c.target_index = nn.index;
      c.subregion_id = azimuthSector(list[i].position, sectors);
      c.match_distance = nn.distance;
      out.all.push_back(c);
    }
  };

  match(features.edges, target.edges, FeatureKind::kEdge);
  match(features.planars, target.planars, FeatureKind::kPlanar);
  return out;
}

void assignSectorsByAzimuthRank(std::vector<Correspondence>& corrs, int target_per_sector) {
  const int n = static_cast<int>(corrs.size());
  if (n == 0) return;
  const int sectors = std::max(1, (n + target_per_sector - 1) / target_per_sector);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double aa = std::atan2(corrs[a].source.y(), corrs[a].source.x());
    const double ab = std::atan2(corrs[b].source.y(), corrs[b].source.x());
    if (aa != ab) return aa < ab;
    return a < b;
  });
  for (int rank = 0; rank < n; ++rank) {
    corrs[order[rank]].subregion_id =
        std::min(static_cast<int>(static_cast<long long>(rank) * sectors / n), sectors - 1);
  }
}

std::string formatVoteDiagnostics(std::size_t initial, const VoteTable& table) {
  std::ostringstream os;
  const std::size_t candidates = table.votes.size();
  os << "correspondences initial=" << initial << " voted=" << candidates
     << " kept=" << table.kept.size() << " removed=" << candidates - table.kept.size() << '\n';

  if (!table.votes.empty()) {
    const int max_vote = table.maxVote();
    const int buckets = 8;
    std::vector<int> histogram(buckets, 0);
    for (int v : table.votes) {
      const int b = max_vote == 0 ? 0 : std::min(v * buckets / (max_vote + 1), buckets - 1);
      ++histogram[b];
    }
    os << "vote histogram (0.." << max_vote << "):";
    for (int h : histogram) os << ' ' << h;
    os << '\n';
  }
  return os.str();
}

}  // namespace gcloam
