#include <CLI11.hpp>
#include <iostream>

#include "gcloam/config.hpp"
#include "gcloam/errors.hpp"
#include "gcloam/evaluation.hpp"
#include "gcloam/matching.hpp"
#include "gcloam/pipeline.hpp"
#include "gcloam/scan_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitDataError = 2;
constexpr int kExitRuntimeError = 3;

struct GlobalOptions {
  std::string config_path;
  std::string output_dir;
  int threads = 0;  // 0 = leave config value
  std::vector<std::string> overrides;
  bool no_graph_filter = false;
  bool conspicuous_features = false;
  bool no_weighting = false;
};

gcloam::RunConfig makeConfig(const GlobalOptions& g) {
  gcloam::RunConfig cfg;
  if (!g.config_path.empty()) cfg = gcloam::loadConfig(g.config_path);
  for (const auto& ov : g.overrides) gcloam::applyOverride(cfg, ov);
  if (!g.output_dir.empty()) cfg.output_dir = g.output_dir;
  if (g.threads > 0) cfg.threads = g.threads;
  if (g.no_graph_filter) cfg.graph_filter = false;
  if (g.no_weighting) cfg.weighting = false;
  if (g.conspicuous_features) cfg.conspicuous_features = true;
  return cfg;
}

gcloam::TrajectoryFormat parseFormat(const std::string& name) {
  if (name == "kitti") return gcloam::TrajectoryFormat::kKitti;
  if (name == "tum") return gcloam::TrajectoryFormat::kTum;
  throw gcloam::ConfigError("unknown trajectory format: " + name);
}

int runCommand(const GlobalOptions& g, const std::string& dataset, int max_frames) {
  gcloam::RunConfig cfg = makeConfig(g);
  if (!dataset.empty()) cfg.dataset_dir = dataset;
  if (max_frames >= 0) cfg.max_frames = max_frames;
  if (cfg.dataset_dir.empty()) throw gcloam::ConfigError("no dataset directory given");

  const gcloam::PipelineResult result = gcloam::runPipeline(cfg);
  gcloam::writePipelineArtifacts(result, cfg);

  std::cout << "processed " << result.frames << " frames\n"
            << gcloam::formatTimingTable(result) << "artifacts in " << cfg.output_dir << '\n';
  return kExitOk;
}

int evalCommand(const std::string& estimate_path, const std::string& truth_path,
                const std::string& est_format, const std::string& truth_format,
                const std::string& align, const std::string& assoc) {
  const gcloam::Trajectory estimate =
      gcloam::readTrajectory(estimate_path, parseFormat(est_format));
  const gcloam::Trajectory truth = gcloam::readTrajectory(truth_path, parseFormat(truth_format));

  const gcloam::Association association = assoc == "timestamp"
                                              ? gcloam::Association::kByTimestamp
                                              : gcloam::Association::kByIndex;

  const gcloam::AteReport rigid =
      gcloam::ateRmse(estimate, truth, gcloam::AteAlignment::kRigid, association);
  const gcloam::AteReport unaligned =
      gcloam::ateRmse(estimate, truth, gcloam::AteAlignment::kNone, association);

  std::cout << "matched_poses " << rigid.matched << '\n'
            << "ate_rmse_m_rigid " << rigid.rmse << '\n'
            << "ate_rmse_m_unaligned " << unaligned.rmse << '\n'
            << "ate_rmse_m " << (align == "none" ? unaligned.rmse : rigid.rmse) << '\n';
  return kExitOk;
}

int featuresCommand(const GlobalOptions& g, const std::string& scan_path) {
  const gcloam::RunConfig cfg = makeConfig(g);
  const gcloam::Scan scan = gcloam::readKittiScan(scan_path, cfg.sensorConfig());
  const gcloam::FeatureSet set =
      gcloam::selectFeatures(scan, cfg.selectionParams(), cfg.threads);

  std::cout << "points " << scan.pointCount() << " dropped_range " << scan.dropped_range
            << " dropped_unknown_beam " << scan.dropped_unknown_beam << '\n';
  const auto dump = [](const char* kind, const std::vector<gcloam::FeaturePoint>& list) {
    for (const auto& f : list) {
      std::cout << kind << ' ' << f.channel << ' ' << f.subregion << ' ' << f.position.x() << ' '
                << f.position.y() << ' ' << f.position.z() << ' ' << f.smoothness << '\n';
    }
  };
  dump("edge", set.edges);
  dump("planar", set.planars);
  return kExitOk;
}

int matchCommand(const GlobalOptions& g, const std::string& curr_path,
                 const std::string& prev_path) {
  const gcloam::RunConfig cfg = makeConfig(g);
  const gcloam::SensorConfig sensor = cfg.sensorConfig();
  const gcloam::FeatureSet curr =
      gcloam::selectFeatures(gcloam::readKittiScan(curr_path, sensor), cfg.selectionParams(),
                             cfg.threads);
  const gcloam::FeatureSet prev =
      gcloam::selectFeatures(gcloam::readKittiScan(prev_path, sensor), cfg.selectionParams(),
                             cfg.threads);

  const gcloam::TargetIndex index = gcloam::TargetIndex::build(prev);
  const gcloam::OdometryParams params = cfg.odometryParams();
  const gcloam::CorrespondenceSet cs = gcloam::initialCorrespondences(
      curr, index, gcloam::PoseSE3::Identity(), params.matching.max_match_distance,
      params.matching.sectors);
  const gcloam::VoteTable table =
      gcloam::voteAndFilterPartitioned(cs.all, params.matching, cfg.threads);

  std::cout << gcloam::formatVoteDiagnostics(cs.all.size(), table);
  for (std::size_t i = 0; i < cs.all.size(); ++i) {
    const auto& c = cs.all[i];
    std::cout << (c.kind == gcloam::FeatureKind::kEdge ? "edge" : "planar") << " subregion "
              << c.subregion_id << " votes " << table.votes[i] << " source " << c.source.x() << ' '
              << c.source.y() << ' ' << c.source.z() << " target " << c.target.x() << ' '
              << c.target.y() << ' ' << c.target.z() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR odometry and mapping with consistency-graph correspondence filtering"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Config file (key = value with [section] headers)");
  app.add_option("--output-dir", g.output_dir, "Output directory");
  app.add_option("--threads", g.threads, "Intra-stage worker threads");
  app.add_option("--set", g.overrides, "Override one parameter: section.key=value (repeatable)")
      ->allow_extra_args(false);
  app.add_flag("--no-graph-filter", g.no_graph_filter,
               "Keep every KD-tree correspondence (skip consistency voting)");
  app.add_flag("--conspicuous-features", g.conspicuous_features,
               "Select the extreme sharpest/flattest points instead of skipping them");
  app.add_flag("--no-weighting", g.no_weighting, "Unit residual weights for all correspondences");

  auto* run = app.add_subcommand("run", "Run the full pipeline over a scan directory");
  std::string dataset;
  int max_frames = -1;
  run->add_option("--dataset", dataset, "Directory of KITTI velodyne .bin scans");
  run->add_option("--max-frames", max_frames, "Limit the number of frames");

  auto* eval = app.add_subcommand("eval", "Absolute trajectory error between two files");
  std::string estimate_path, truth_path;
  std::string est_format = "kitti", truth_format = "kitti";
  std::string align = "rigid", assoc = "index";
  eval->add_option("--estimate", estimate_path)->required();
  eval->add_option("--truth", truth_path)->required();
  eval->add_option("--estimate-format", est_format, "kitti|tum");
  eval->add_option("--truth-format", truth_format, "kitti|tum");
  eval->add_option("--align", align, "rigid|none");
  eval->add_option("--assoc", assoc, "index|timestamp");

  auto* features = app.add_subcommand("features", "Dump selected features for one scan");
  std::string scan_path;
  features->add_option("--scan", scan_path)->required();

  auto* match = app.add_subcommand("match", "Dump correspondences and votes for a frame pair");
  std::string curr_path, prev_path;
  match->add_option("--curr", curr_path)->required();
  match->add_option("--prev", prev_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return runCommand(g, dataset, max_frames);
    if (eval->parsed()) return evalCommand(estimate_path, truth_path, est_format, truth_format,
                                           align, assoc);
    if (features->parsed()) return featuresCommand(g, scan_path);
    if (match->parsed()) return matchCommand(g, curr_path, prev_path);
  } catch (const gcloam::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const gcloam::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const gcloam::MalformedFile& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const gcloam::IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitOk;
}
