#pragma once

#include <string>

#include "gcloam/features.hpp"
#include "gcloam/mapping.hpp"
#include "gcloam/odometry.hpp"
#include "gcloam/scan.hpp"

namespace gcloam {

/// Everything the pipeline runner needs; loadable from a flat
/// "key = value" file with [section] headers, every key also reachable
/// through a "section.key=value" override.
struct RunConfig {
  // run
  std::string dataset_dir;
  std::string output_dir = "gcloam_out";
  std::string live_trajectory;  // when set, odometry poses stream here (TUM) as frames finish
  int max_frames = -1;  // -1 = whole sequence
  int threads = 1;
  double frame_period = 0.1;  // seconds per sweep
  bool graph_filter = true;
  bool weighting = true;
  bool conspicuous_features = false;

  // sensor
  std::string sensor_model = "hdl64";  // hdl64 | uniform:<channels>:<low_deg>:<high_deg>
  double elevation_tolerance_deg = 0.2;
  double min_range = 1.0;
  double max_range = 120.0;

  // features
  SelectionParams features;

  // matching
  double eta = 0.9;
  double filter_fraction = 0.10;  // x
  double sigma_odometry = 0.2;
  double sigma_mapping = 0.5;
  double max_match_dist_odometry = 5.0;
  double max_match_dist_mapping = 2.0;
  int odometry_sectors = 6;
  int mapping_sector_target = 350;

  // odometry
  double lambda_frac = 0.2;
  double alpha = 2.0;
  int outer_passes = 3;
  int odometry_lm_iterations = 4;
  int cross_channel_window = 2;
  double anchor_search_cap = 10.0;

  // mapping
  bool mapping_enabled = true;
  double edge_voxel = 0.2;
  double planar_voxel = 0.4;
  double active_radius = 100.0;
  double max_neighbor_dist = 2.0;
  int mapping_lm_iterations = 4;
  int neighborhood_size = 5;

  SensorConfig sensorConfig() const;
  SelectionParams selectionParams() const;
  OdometryParams odometryParams() const;
  MappingParams mappingParams() const;

  /// Throws ConfigError when a fraction leaves [0,1] or a length is not positive.
  void validate() const;
};

/// Parses the config file; unknown keys raise ConfigError.
RunConfig loadConfig(const std::string& path);

/// Applies one "section.key=value" override.
void applyOverride(RunConfig& cfg, const std::string& assignment);

/// Effective config, one "section.key = value" line per parameter.
std::string dumpConfig(const RunConfig& cfg);

}  // namespace gcloam
