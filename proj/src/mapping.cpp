#include "gcloam/mapping.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "gcloam/errors.hpp"

namespace gcloam {

namespace {

// 21 bits per axis around a fixed offset keeps keys exact out to ~+-1e6 voxels.
std::uint64_t voxelKey(const Eigen::Vector3d& p, double voxel) {
  constexpr std::int64_t kOffset = 1 << 20;
  const auto quantize = [&](double v) {
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(v / voxel)) + kOffset) &
           0x1FFFFF;
  };
  return (quantize(p.x()) << 42) | (quantize(p.y()) << 21) | quantize(p.z());
}

}  // namespace

bool LocalFeatureMap::Store::insert(const Eigen::Vector3d& p) {
  const std::uint64_t key = voxelKey(p, voxel);
  if (!occupied.insert(key).second) return false;
  points.push_back(p);
  return true;
}

void LocalFeatureMap::Store::evictBeyond(const Eigen::Vector3d& center, double radius) {
  const double r2 = radius * radius;
  std::vector<Eigen::Vector3d> retained;
  retained.reserve(points.size());
  for (const auto& p : points) {
    if ((p - center).squaredNorm() <= r2) retained.push_back(p);
  }
  if (retained.size() == points.size()) return;
  points = std::move(retained);
  occupied.clear();
  for (const auto& p : points) occupied.insert(voxelKey(p, voxel));
}

LocalFeatureMap::LocalFeatureMap(double edge_voxel, double planar_voxel) {
  edges_.voxel = edge_voxel;
  planars_.voxel = planar_voxel;
}

LocalFeatureMap::Store& LocalFeatureMap::store(FeatureKind kind) {
  return kind == FeatureKind::kEdge ? edges_ : planars_;
}

const LocalFeatureMap::Store& LocalFeatureMap::store(FeatureKind kind) const {
  return kind == FeatureKind::kEdge ? edges_ : planars_;
}

const KdTree& LocalFeatureMap::tree(FeatureKind kind) const { return store(kind).tree; }

const std::vector<Eigen::Vector3d>& LocalFeatureMap::points(FeatureKind kind) const {
  return store(kind).points;
}

double LocalFeatureMap::voxelSize(FeatureKind kind) const { return store(kind).voxel; }

void LocalFeatureMap::integrate(const FeatureSet& features, const PoseSE3& pose,
                                double active_radius) {
  for (const auto& f : features.edges) edges_.insert(pose.apply(f.position));
  for (const auto& f : features.planars) planars_.insert(pose.apply(f.position));
  edges_.evictBeyond(pose.translation, active_radius);
  planars_.evictBeyond(pose.translation, active_radius);
  edges_.tree = KdTree(edges_.points);
  planars_.tree = KdTree(planars_.points);
}

void LocalFeatureMap::exportXyz(FeatureKind kind, const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open map export file: " + path);
  char buf[32];
  for (const auto& p : points(kind)) {
    std::string line;
    for (int i = 0; i < 3; ++i) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), p[i]);
      line.append(buf, res.ptr);
      if (i < 2) line += ' ';
    }
    out << line << '\n';
  }
  if (!out) throw IoError("map export write failed: " + path);
}

MapAssociation mapCorrespondences(const FeatureSet& features, const LocalFeatureMap& map,
                                  const PoseSE3& T_guess, const MappingParams& params) {
  MapAssociation out;

  const auto associate = [&](const std::vector<FeaturePoint>& list, FeatureKind kind) {
    const KdTree& tree = map.tree(kind);
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (tree.size() < static_cast<std::size_t>(params.neighborhood_size)) {
        ++out.dropped;
        continue;
      }
      const Eigen::Vector3d projected = T_guess.apply(list[i].position);
      const auto neighbors = tree.knn(projected, params.neighborhood_size);
      if (neighbors.back().distance > params.max_neighbor_distance) {
        ++out.dropped;
        continue;
      }

      MapCorrespondence mc;
      Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
      for (const auto& nb : neighbors) {
        mc.neighborhood.push_back(tree.point(nb.index));
        centroid += tree.point(nb.index);
      }
      centroid /= static_cast<double>(neighbors.size());

      mc.corr.source = list[i].position;
      mc.corr.target = centroid;
      mc.corr.kind = kind;
      mc.corr.feature_index = static_cast<int>(i);
      mc.corr.match_distance = (projected - centroid).norm();
      out.all.push_back(std::move(mc));
    }
  };

  associate(features.edges, FeatureKind::kEdge);
  associate(features.planars, FeatureKind::kPlanar);

  std::vector<Correspondence> plain;
  plain.reserve(out.all.size());
  for (const auto& mc : out.all) plain.push_back(mc.corr);
  assignSectorsByAzimuthRank(plain, params.sector_target);
  for (std::size_t i = 0; i < out.all.size(); ++i) {
    out.all[i].corr.subregion_id = plain[i].subregion_id;
  }
  return out;
}

namespace {

// The two most line-spanning points of the neighborhood.
std::pair<int, int> widestPair(const std::vector<Eigen::Vector3d>& pts) {
  int a = 0, b = 1;
  double best = -1.0;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    for (int j = i + 1; j < static_cast<int>(pts.size()); ++j) {
      const double d = (pts[i] - pts[j]).squaredNorm();
      if (d > best) {
        best = d;
        a = i;
        b = j;
      }
    }
  }
  return {a, b};
}

// The three points spanning the largest triangle.
std::array<int, 3> widestTriangle(const std::vector<Eigen::Vector3d>& pts) {
  std::array<int, 3> out{0, 1, 2};
  double best = -1.0;
  const int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        const double area = (pts[j] - pts[i]).cross(pts[k] - pts[i]).squaredNorm();
        if (area > best) {
          best = area;
          out = {i, j, k};
        }
      }
    }
  }
  return out;
}

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

std::vector<ResidualBlock> mapResidualBlocks(const MapAssociation& assoc, const VoteTable& table,
                                             std::size_t& dropped) {
  std::vector<ResidualBlock> blocks;
  blocks.reserve(table.kept.size());
  for (int idx : table.kept) {
    const MapCorrespondence& mc = assoc.all[idx];
    ResidualBlock blk;
    if (mc.corr.kind == FeatureKind::kEdge) {
      const auto [a, b] = widestPair(mc.neighborhood);
      blk = ResidualBlock::line(mc.corr.source, mc.neighborhood[a], mc.neighborhood[b]);
    } else {
      const auto tri = widestTriangle(mc.neighborhood);
      blk = ResidualBlock::plane(mc.corr.source, mc.neighborhood[tri[0]],
                                 mc.neighborhood[tri[1]], mc.neighborhood[tri[2]]);
    }
    if (isDegenerate(blk)) {
      ++dropped;
      continue;
    }
    blocks.push_back(blk);
  }
  return blocks;
}

MappingResult refinePose(const FeatureSet& features, const LocalFeatureMap& map,
                         const PoseSE3& T_odom, const MappingParams& params) {
  MappingResult result;
  result.pose = T_odom;

  const MapAssociation assoc = mapCorrespondences(features, map, T_odom, params);
  std::vector<Correspondence> plain;
  plain.reserve(assoc.all.size());
  for (const auto& mc : assoc.all) plain.push_back(mc.corr);

  const VoteTable table = params.use_graph_filter
                              ? voteAndFilterPartitioned(plain, params.matching, params.threads)
                              : passthroughTable(plain.size());

  result.stats.initial = plain.size();
  result.stats.kept = table.kept.size();
  result.stats.removed = plain.size() - table.kept.size();
  result.stats.dropped_no_neighbor = assoc.dropped;
  result.votes = table;

  const std::vector<ResidualBlock> blocks =
      mapResidualBlocks(assoc, table, result.stats.dropped_blocks);

  if (blocks.size() < 6) {
    result.under_constrained = true;
    return result;
  }

  auto [pose, report] = lmSolve(blocks, T_odom, params.solver);
  result.pose = pose;
  result.report = report;
  return result;
}

MappingResult MappingStage::processFrame(const FeatureSet& features, const PoseSE3& relative) {
  MappingResult result;
  if (!initialized_) {
    initialized_ = true;
    result.pose = global_;
    map_.integrate(features, global_, params_.active_radius);
    return result;
  }

  const PoseSE3 T_init = compose(global_, relative);
  result = refinePose(features, map_, T_init, params_);
  global_ = result.pose;
  map_.integrate(features, global_, params_.active_radius);
  return result;
}

}  // namespace gcloam
