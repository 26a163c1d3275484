#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gcloam/config.hpp"
#include "gcloam/evaluation.hpp"
#include "gcloam/matching.hpp"
#include "gcloam/odometry.hpp"
#include "gcloam/pipeline.hpp"
#include "gcloam/scan_io.hpp"

namespace py = pybind11;
using namespace gcloam;

namespace {

FeatureSet makeFeatureSet(const std::vector<Eigen::Vector3d>& edges,
                          const std::vector<int>& edge_channels,
                          const std::vector<Eigen::Vector3d>& planars,
                          const std::vector<int>& planar_channels) {
  if (edges.size() != edge_channels.size() || planars.size() != planar_channels.size()) {
    throw Error("positions and channels must have matching lengths");
  }
  FeatureSet set;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    FeaturePoint f;
    f.position = edges[i];
    f.channel = edge_channels[i];
    set.edges.push_back(f);
  }
  for (std::size_t i = 0; i < planars.size(); ++i) {
    FeaturePoint f;
    f.position = planars[i];
    f.channel = planar_channels[i];
    set.planars.push_back(f);
  }
  return set;
}

std::vector<Eigen::Vector3d> featurePositions(const std::vector<FeaturePoint>& list) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(list.size());
  for (const auto& f : list) out.push_back(f.position);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LiDAR odometry and mapping with consistency-graph correspondence filtering";

  py::register_exception<Error>(m, "GcloamError");

  py::class_<PoseSE3>(m, "PoseSE3")
      .def(py::init<>())
      .def(py::init([](const Eigen::Vector4d& qxyzw, const Eigen::Vector3d& t) {
             return PoseSE3(Eigen::Quaterniond(qxyzw[3], qxyzw[0], qxyzw[1], qxyzw[2]), t);
           }),
           py::arg("quaternion_xyzw"), py::arg("translation"))
      .def_static("from_matrix", &PoseSE3::fromMatrix)
      .def_property_readonly("translation",
                             [](const PoseSE3& p) { return p.translation; })
      .def_property_readonly("quaternion_xyzw",
                             [](const PoseSE3& p) {
                               return Eigen::Vector4d(p.rotation.x(), p.rotation.y(),
                                                      p.rotation.z(), p.rotation.w());
                             })
      .def("matrix", &PoseSE3::matrix)
      .def("inverse", &PoseSE3::inverse)
      .def("apply", &PoseSE3::apply, py::arg("point"))
      .def("__repr__", [](const PoseSE3& p) {
        std::ostringstream os;
        os << "PoseSE3(t=[" << p.translation.transpose() << "])";
        return os.str();
      });
  m.def("compose", &compose, py::arg("a"), py::arg("b"));

  py::class_<KdTree>(m, "KdTree")
      .def(py::init<std::vector<Eigen::Vector3d>>(), py::arg("points"))
      .def("knn",
           [](const KdTree& tree, const Eigen::Vector3d& query, int k) {
             std::vector<std::pair<int, double>> out;
             for (const auto& nb : tree.knn(query, k)) out.emplace_back(nb.index, nb.distance);
             return out;
           },
           py::arg("query"), py::arg("k"))
      .def("__len__", &KdTree::size);

  py::enum_<FeatureKind>(m, "FeatureKind")
      .value("EDGE", FeatureKind::kEdge)
      .value("PLANAR", FeatureKind::kPlanar);

  py::class_<Correspondence>(m, "Correspondence")
      .def(py::init([](const Eigen::Vector3d& source, const Eigen::Vector3d& target) {
             Correspondence c;
             c.source = source;
             c.target = target;
             return c;
           }),
           py::arg("source"), py::arg("target"))
      .def_readwrite("source", &Correspondence::source)
      .def_readwrite("target", &Correspondence::target)
      .def_readwrite("kind", &Correspondence::kind)
      .def_readwrite("subregion_id", &Correspondence::subregion_id);

  py::class_<VoteTable>(m, "VoteTable")
      .def_readonly("votes", &VoteTable::votes)
      .def_readonly("order", &VoteTable::order)
      .def_readonly("kept", &VoteTable::kept);

  m.def("consistency_score", &consistencyScore, py::arg("a"), py::arg("b"), py::arg("sigma"));
  m.def(
      "vote_and_filter",
      [](const std::vector<Correspondence>& corrs, double eta, double x, double sigma) {
        return voteAndFilter(corrs, eta, x, sigma);
      },
      py::arg("correspondences"), py::arg("eta") = 0.9, py::arg("x") = 0.10,
      py::arg("sigma") = 0.2);

  py::class_<SensorConfig>(m, "SensorConfig")
      .def(py::init<>())
      .def_static("hdl64", &SensorConfig::hdl64)
      .def_static("uniform", &SensorConfig::uniform, py::arg("channels"), py::arg("low_deg"),
                  py::arg("high_deg"))
      .def_readwrite("beam_elevations_deg", &SensorConfig::beam_elevations_deg)
      .def_readwrite("elevation_tolerance_deg", &SensorConfig::elevation_tolerance_deg)
      .def_readwrite("min_range", &SensorConfig::min_range)
      .def_readwrite("max_range", &SensorConfig::max_range);

  py::class_<Scan>(m, "Scan")
      .def_property_readonly("point_count", &Scan::pointCount)
      .def_readonly("dropped_range", &Scan::dropped_range)
      .def_readonly("dropped_unknown_beam", &Scan::dropped_unknown_beam)
      .def("channel_points",
           [](const Scan& scan, int channel) {
             std::vector<Eigen::Vector3d> pts;
             for (const auto& p : scan.channels.at(channel)) pts.push_back(p.position);
             return pts;
           },
           py::arg("channel"))
      .def_property_readonly("channel_count",
                             [](const Scan& s) { return s.channels.size(); });

  m.def("read_kitti_scan", &readKittiScan, py::arg("path"), py::arg("sensor"));
  m.def(
      "decode_kitti_scan",
      [](py::bytes data, const SensorConfig& sensor) {
        const std::string_view view = data;
        return decodeKittiScan(view.data(), view.size(), sensor);
      },
      py::arg("data"), py::arg("sensor"));

  py::class_<SelectionParams>(m, "SelectionParams")
      .def(py::init<>())
      .def_readwrite("sigma_disjoint", &SelectionParams::sigma_disjoint)
      .def_readwrite("half_window", &SelectionParams::half_window)
      .def_readwrite("smoothness_threshold", &SelectionParams::smoothness_threshold)
      .def_readwrite("subregions", &SelectionParams::subregions)
      .def_readwrite("edges_per_subregion", &SelectionParams::edges_per_subregion)
      .def_readwrite("planars_per_subregion", &SelectionParams::planars_per_subregion)
      .def_readwrite("skip_sharpest", &SelectionParams::skip_sharpest)
      .def_readwrite("skip_flattest", &SelectionParams::skip_flattest);

  py::class_<FeatureSet>(m, "FeatureSet")
      .def(py::init(&makeFeatureSet), py::arg("edges"), py::arg("edge_channels"),
           py::arg("planars"), py::arg("planar_channels"))
      .def_property_readonly("edges",
                             [](const FeatureSet& s) { return featurePositions(s.edges); })
      .def_property_readonly("planars",
                             [](const FeatureSet& s) { return featurePositions(s.planars); });

  m.def("select_features", &selectFeatures, py::arg("scan"), py::arg("params") = SelectionParams{},
        py::arg("threads") = 1);

  py::class_<OdometryFrame>(m, "OdometryFrame")
      .def_readonly("relative", &OdometryFrame::relative)
      .def_readonly("degraded", &OdometryFrame::degraded)
      .def_property_readonly("kept", [](const OdometryFrame& f) { return f.stats.kept; })
      .def_property_readonly("initial", [](const OdometryFrame& f) { return f.stats.initial; });

  m.def(
      "estimate_relative",
      [](const FeatureSet& curr, const FeatureSet& prev, const PoseSE3& T_init, bool graph_filter,
         bool weighting) {
        OdometryParams params;
        params.use_graph_filter = graph_filter;
        params.use_weighting = weighting;
        return estimateRelative(curr, prev, T_init, params);
      },
      py::arg("curr"), py::arg("prev"), py::arg("T_init") = PoseSE3(),
      py::arg("graph_filter") = true, py::arg("weighting") = true);

  py::enum_<TrajectoryFormat>(m, "TrajectoryFormat")
      .value("KITTI", TrajectoryFormat::kKitti)
      .value("TUM", TrajectoryFormat::kTum);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init<>())
      .def("push", &Trajectory::push, py::arg("timestamp"), py::arg("pose"))
      .def("__len__", &Trajectory::size)
      .def("pose", [](const Trajectory& t, std::size_t i) { return t.entries.at(i).pose; })
      .def("timestamp",
           [](const Trajectory& t, std::size_t i) { return t.entries.at(i).timestamp; });

  m.def("write_trajectory", &writeTrajectory, py::arg("trajectory"), py::arg("format"),
        py::arg("path"));
  m.def("read_trajectory", &readTrajectory, py::arg("path"), py::arg("format"));

  py::enum_<AteAlignment>(m, "AteAlignment")
      .value("NONE", AteAlignment::kNone)
      .value("RIGID", AteAlignment::kRigid);

  py::class_<AteReport>(m, "AteReport")
      .def_readonly("rmse", &AteReport::rmse)
      .def_readonly("per_pose_errors", &AteReport::per_pose_errors)
      .def_readonly("matched", &AteReport::matched);

  m.def("ate_rmse",
        [](const Trajectory& estimate, const Trajectory& truth, AteAlignment align) {
          return ateRmse(estimate, truth, align);
        },
        py::arg("estimate"), py::arg("truth"), py::arg("align") = AteAlignment::kRigid);

  m.def(
      "run_pipeline",
      [](const std::string& dataset_dir, const std::string& output_dir,
         const std::vector<std::string>& overrides) {
        RunConfig cfg;
        cfg.dataset_dir = dataset_dir;
        cfg.output_dir = output_dir;
        for (const auto& ov : overrides) applyOverride(cfg, ov);
        const PipelineResult result = runPipeline(cfg);
        writePipelineArtifacts(result, cfg);

        py::dict summary;
        summary["frames"] = result.frames;
        summary["preprocess_mean_ms"] = result.preprocess_timing.mean();
        summary["odometry_mean_ms"] = result.odometry_timing.mean();
        summary["mapping_mean_ms"] = result.mapping_timing.mean();
        summary["trajectory_kitti"] = output_dir + "/trajectory_mapping_kitti.txt";
        summary["trajectory_tum"] = output_dir + "/trajectory_mapping_tum.txt";
        return summary;
      },
      py::arg("dataset_dir"), py::arg("output_dir"),
      py::arg("overrides") = std::vector<std::string>{});
}
