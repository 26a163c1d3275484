#include "gcloam/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "gcloam/errors.hpp"
#include "gcloam/scan_io.hpp"

namespace gcloam {

namespace fs = std::filesystem;

double StageTiming::mean() const {
  if (ms.empty()) return 0.0;
  double sum = 0.0;
  for (double v : ms) sum += v;
  return sum / static_cast<double>(ms.size());
}

double StageTiming::median() const {
  if (ms.empty()) return 0.0;
  std::vector<double> sorted = ms;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  return sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
}

double StageTiming::p95() const {
  if (ms.empty()) return 0.0;
  std::vector<double> sorted = ms;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t idx =
      std::min(sorted.size() - 1, static_cast<std::size_t>(0.95 * sorted.size()));
  return sorted[idx];
}

std::vector<std::string> listScanFiles(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

namespace {

class StopWatch {
 public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsedMs() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct MapJob {
  std::size_t frame = 0;
  FeatureSet features;
  PoseSE3 relative;
};

// Mapping consumes odometry frames through this; capacity keeps the two
// stages a few frames apart at most.
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(MapJob job) {
    std::unique_lock lock(mutex_);
    cv_pop_.wait(lock, [&] { return queue_.size() < capacity_ || draining_; });
    if (draining_) return;  // consumer died; its error surfaces after join
    queue_.push_back(std::move(job));
    cv_push_.notify_one();
  }

  std::optional<MapJob> pop() {
    std::unique_lock lock(mutex_);
    cv_push_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    MapJob job = std::move(queue_.front());
    queue_.pop_front();
    cv_pop_.notify_one();
    return job;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    cv_push_.notify_all();
  }

  /// Unblocks producers and discards anything still queued.
  void drain() {
    std::lock_guard lock(mutex_);
    draining_ = true;
    queue_.clear();
    cv_pop_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::deque<MapJob> queue_;
  std::mutex mutex_;
  std::condition_variable cv_push_;
  std::condition_variable cv_pop_;
  bool closed_ = false;
  bool draining_ = false;
};

std::string statsLine(const char* stage, std::size_t frame, const CorrespondenceStats& s,
                      bool flagged) {
  std::ostringstream os;
  os << "frame " << frame << ' ' << stage << " initial=" << s.initial << " kept=" << s.kept
     << " removed=" << s.removed << " dropped_no_neighbor=" << s.dropped_no_neighbor
     << " dropped_blocks=" << s.dropped_blocks;
  if (flagged) os << " flagged=degraded";
  os << '\n';
  return os.str();
}

}  // namespace

PipelineResult runPipeline(const RunConfig& cfg) {
  cfg.validate();

  const SensorConfig sensor = cfg.sensorConfig();
  const SelectionParams selection = cfg.selectionParams();
  const OdometryParams odo_params = cfg.odometryParams();
  const MappingParams map_params = cfg.mappingParams();

  std::vector<std::string> files = listScanFiles(cfg.dataset_dir);
  if (files.empty()) throw IoError("no .bin scans in " + cfg.dataset_dir);
  if (cfg.max_frames >= 0 && files.size() > static_cast<std::size_t>(cfg.max_frames)) {
    files.resize(cfg.max_frames);
  }

  PipelineResult result;
  result.frames = files.size();
  result.map = LocalFeatureMap(cfg.edge_voxel, cfg.planar_voxel);

  OdometryTracker tracker(odo_params);
  MappingStage mapping_stage(map_params);

  std::vector<PoseSE3> mapped_poses(files.size());
  std::vector<std::string> odo_diags(files.size());
  std::vector<std::string> map_diags(files.size());
  std::vector<double> mapping_ms(files.size(), 0.0);

  BoundedQueue queue(4);
  std::exception_ptr mapping_error;
  std::thread mapping_thread;
  if (cfg.mapping_enabled) {
    mapping_thread = std::thread([&] {
      try {
        while (auto job = queue.pop()) {
          StopWatch watch;
          const MappingResult res = mapping_stage.processFrame(job->features, job->relative);
          mapping_ms[job->frame] = watch.elapsedMs();
          mapped_poses[job->frame] = res.pose;
          map_diags[job->frame] =
              statsLine("mapping", job->frame, res.stats, res.under_constrained) +
              formatVoteDiagnostics(res.stats.initial, res.votes);
        }
      } catch (...) {
        mapping_error = std::current_exception();
        queue.drain();
      }
    });
  }

  const auto stopMapping = [&] {
    if (!mapping_thread.joinable()) return;
    queue.close();
    mapping_thread.join();
  };

  try {
    std::ofstream live_trajectory;
    if (!cfg.live_trajectory.empty()) {
      live_trajectory.open(cfg.live_trajectory);
      if (!live_trajectory) throw IoError("cannot open live trajectory: " + cfg.live_trajectory);
    }

    for (std::size_t i = 0; i < files.size(); ++i) {
      StopWatch pre_watch;
      const Scan raw = readKittiScan(files[i], sensor);
      const double read_ms = pre_watch.elapsedMs();

      StopWatch odo_watch;
      FeatureSet features;
      const OdometryFrame frame = tracker.processScan(raw, selection, cfg.threads, &features);
      result.preprocess_timing.ms.push_back(read_ms + frame.preprocess_ms);
      result.odometry_timing.ms.push_back(odo_watch.elapsedMs() - frame.preprocess_ms);

      const double timestamp = cfg.frame_period * static_cast<double>(i);
      result.odometry_trajectory.push(timestamp, frame.global);
      odo_diags[i] = statsLine("odometry", i, frame.stats, frame.degraded) +
                     formatVoteDiagnostics(frame.stats.initial, frame.votes);

      if (live_trajectory.is_open()) {
        live_trajectory << formatTrajectoryLine({timestamp, frame.global}, TrajectoryFormat::kTum)
                        << '\n'
                        << std::flush;
      }

      if (cfg.mapping_enabled) {
        queue.push(MapJob{i, features, frame.relative});
      }
    }
  } catch (...) {
    stopMapping();
    throw;
  }

  stopMapping();
  if (mapping_error) std::rethrow_exception(mapping_error);

  if (cfg.mapping_enabled) {
    for (std::size_t i = 0; i < files.size(); ++i) {
      result.mapped_trajectory.push(cfg.frame_period * static_cast<double>(i), mapped_poses[i]);
      result.mapping_timing.ms.push_back(mapping_ms[i]);
    }
    result.map = mapping_stage.map();
  } else {
    result.mapped_trajectory = result.odometry_trajectory;
  }

  for (std::size_t i = 0; i < files.size(); ++i) {
    result.diagnostics.push_back(odo_diags[i] + map_diags[i]);
  }
  return result;
}

namespace {

std::string formatRow(const std::string& stage, const StageTiming& t, bool csv) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  if (csv) {
    os << stage << ',' << t.mean() << ',' << t.median() << ',' << t.p95() << '\n';
  } else {
    os.width(14);
    os << std::left << stage << std::right;
    for (double v : {t.mean(), t.median(), t.p95()}) {
      os.width(12);
      os << v;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace

std::string formatTimingTable(const PipelineResult& result) {
  std::ostringstream os;
  os << "stage             mean_ms   median_ms      p95_ms\n";
  os << formatRow("pre-processing", result.preprocess_timing, false);
  os << formatRow("odometry", result.odometry_timing, false);
  os << formatRow("mapping", result.mapping_timing, false);
  return os.str();
}

std::string formatTimingCsv(const PipelineResult& result) {
  std::string out = "stage,mean_ms,median_ms,p95_ms\n";
  out += formatRow("pre-processing", result.preprocess_timing, true);
  out += formatRow("odometry", result.odometry_timing, true);
  out += formatRow("mapping", result.mapping_timing, true);
  return out;
}

void writePipelineArtifacts(const PipelineResult& result, const RunConfig& cfg) {
  const fs::path out_dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output dir: " + cfg.output_dir);

  writeTrajectory(result.odometry_trajectory, TrajectoryFormat::kKitti,
                  (out_dir / "trajectory_odometry_kitti.txt").string());
  writeTrajectory(result.odometry_trajectory, TrajectoryFormat::kTum,
                  (out_dir / "trajectory_odometry_tum.txt").string());
  writeTrajectory(result.mapped_trajectory, TrajectoryFormat::kKitti,
                  (out_dir / "trajectory_mapping_kitti.txt").string());
  writeTrajectory(result.mapped_trajectory, TrajectoryFormat::kTum,
                  (out_dir / "trajectory_mapping_tum.txt").string());

  result.map.exportXyz(FeatureKind::kEdge, (out_dir / "map_edges.xyz").string());
  result.map.exportXyz(FeatureKind::kPlanar, (out_dir / "map_planars.xyz").string());

  const auto writeText = [&](const char* name, const std::string& content) {
    std::ofstream out(out_dir / name);
    if (!out) throw IoError(std::string("cannot write ") + name);
    out << content;
  };
  writeText("timing.txt", formatTimingTable(result));
  writeText("timing.csv", formatTimingCsv(result));
  writeText("effective_config.txt", dumpConfig(cfg));

  std::string diag;
  for (const auto& block : result.diagnostics) diag += block;
  writeText("diagnostics.txt", diag);
}

}  // namespace gcloam
