#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

#include "gcloam/se3.hpp"

namespace gcloam {

/// One LiDAR return with its beam channel and intra-sweep time fraction.
struct LidarPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double intensity = 0.0;
  int channel = 0;
  double rel_time = 0.0;  // fraction of the sweep period, [0, 1)

  double range() const { return position.norm(); }
};

/// Points of one sweep grouped per beam channel, each group in firing order
/// (azimuth-monotone modulo one wrap).
struct Scan {
  std::vector<std::vector<LidarPoint>> channels;
  int scan_index = 0;
  double timestamp = 0.0;

  // ingestion accounting
  std::size_t record_count = 0;
  std::size_t dropped_range = 0;
  std::size_t dropped_unknown_beam = 0;

  std::size_t pointCount() const {
    std::size_t n = 0;
    for (const auto& ch : channels) n += ch.size();
    return n;
  }
};

/// Beam geometry and range gates used to ingest raw scans.
struct SensorConfig {
  std::vector<double> beam_elevations_deg;  // one entry per channel
  double elevation_tolerance_deg = 0.2;
  double min_range = 1.0;
  double max_range = 120.0;

  int channelCount() const { return static_cast<int>(beam_elevations_deg.size()); }

  /// HDL-64E style table: upper 32 beams at 1/3 deg spacing from +2 deg,
  /// lower 32 at 1/2 deg spacing from -8.83 deg.
  static SensorConfig hdl64();

  /// Uniformly spaced elevations from low_deg to high_deg inclusive.
  static SensorConfig uniform(int channels, double low_deg, double high_deg);
};

struct TrajectoryEntry {
  double timestamp = 0.0;
  PoseSE3 pose;
};

/// Time-ordered global poses; timestamps strictly increasing.
struct Trajectory {
  std::vector<TrajectoryEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  void push(double timestamp, const PoseSE3& pose) { entries.push_back({timestamp, pose}); }
};

}  // namespace gcloam
