#pragma once

#include <string>
#include <vector>

#include "gcloam/config.hpp"
#include "gcloam/mapping.hpp"

namespace gcloam {

struct StageTiming {
  std::vector<double> ms;
  double mean() const;
  double median() const;
  double p95() const;
};

struct PipelineResult {
  Trajectory odometry_trajectory;
  Trajectory mapped_trajectory;  // equals odometry when mapping is disabled
  LocalFeatureMap map;
  StageTiming preprocess_timing;
  StageTiming odometry_timing;
  StageTiming mapping_timing;
  std::vector<std::string> diagnostics;  // one block per frame
  std::size_t frames = 0;
};

/// Sorted *.bin scan paths in the dataset directory.
std::vector<std::string> listScanFiles(const std::string& dir);

/// Full run: ingest -> deskew -> features -> odometry, with the mapping stage
/// consuming frames through a bounded queue on its own thread. Deterministic
/// for a given config and input, independent of the thread count.
PipelineResult runPipeline(const RunConfig& cfg);

std::string formatTimingTable(const PipelineResult& result);
std::string formatTimingCsv(const PipelineResult& result);

/// Writes trajectories (both formats), map exports, timing table + CSV,
/// per-frame diagnostics, and the effective config into cfg.output_dir.
void writePipelineArtifacts(const PipelineResult& result, const RunConfig& cfg);

}  // namespace gcloam
