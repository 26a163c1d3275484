#include <doctest.h>

#include <algorithm>
#include <random>

#include "gcloam/odometry.hpp"
#include "support/synthetic.hpp"

using namespace gcloam;
using testsupport::randomPose;
using testsupport::rotationErrorRad;
using testsupport::structuredScene;
using testsupport::transformFeatures;
using testsupport::translationError;

namespace {

Scan miniScan() {
  Scan scan;
  scan.channels.resize(2);
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 8; ++i) {
      LidarPoint p;
      p.position = Eigen::Vector3d(3.0 + 0.2 * i, 1.0 - 0.3 * c, 0.1 * c);
      p.channel = c;
      p.rel_time = i / 8.0;
      scan.channels[c].push_back(p);
    }
  }
  return scan;
}

// Rotation + translation discrepancy against an expected relative pose.
double poseError(const PoseSE3& got, const PoseSE3& expected) {
  return rotationErrorRad(got, expected) + translationError(got, expected);
}

}  // namespace

TEST_CASE("deskew basics") {
  const Scan scan = miniScan();

  SUBCASE("identity motion leaves the scan untouched") {
    const Scan out = deskew(scan, PoseSE3::Identity());
    for (std::size_t c = 0; c < scan.channels.size(); ++c) {
      for (std::size_t i = 0; i < scan.channels[c].size(); ++i) {
        CHECK((out.channels[c][i].position - scan.channels[c][i].position).norm() < 1e-15);
      }
    }
  }

  SUBCASE("pure translation interpolates linearly in rel_time") {
    Scan one_point;
    one_point.channels.resize(1);
    LidarPoint p;
    p.position = Eigen::Vector3d(4.0, -1.0, 0.5);
    p.rel_time = 0.5;
    one_point.channels[0].push_back(p);

    const PoseSE3 motion(Eigen::Quaterniond::Identity(), Eigen::Vector3d(1.0, 0.0, 0.0));
    const Scan out = deskew(one_point, motion);
    CHECK((out.channels[0][0].position - (p.position + Eigen::Vector3d(0.5, 0.0, 0.0))).norm() <
          1e-12);
  }

  SUBCASE("re-skewing with the inverse motion restores the scan") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const PoseSE3 motion = randomPose(rng, 1.5, 0.4);
      const Scan forward = deskew(scan, motion);
      const Scan back = deskew(forward, motion.inverse());
      for (std::size_t c = 0; c < scan.channels.size(); ++c) {
        for (std::size_t i = 0; i < scan.channels[c].size(); ++i) {
          CHECK((back.channels[c][i].position - scan.channels[c][i].position).norm() < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("vote weights follow the rank schedule") {
  WeightSchedule schedule;  // top 0.2, scale 2.0

  VoteTable table;
  table.votes = {10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
  table.kept = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};

  const auto weights = voteWeights(table, schedule, true);
  REQUIRE(weights.size() == 10);

  SUBCASE("top rank with o = o_max gets the full scale") {
    CHECK(weights[0] == doctest::Approx(2.0));
  }

  SUBCASE("ranks beyond the fraction keep weight one") {
    for (std::size_t rank = 3; rank < 10; ++rank) CHECK(weights[rank] == doctest::Approx(1.0));
  }

  SUBCASE("weights are monotone in votes within the top set") {
    // ranks 0..2 are inside [0, 0.2 * 10]
    CHECK(weights[0] >= weights[1]);
    CHECK(weights[1] >= weights[2]);
  }

  SUBCASE("degenerate normalization collapses to the scale") {
    VoteTable flat;
    flat.votes = {4, 4, 4, 4, 4};
    flat.kept = {0, 1, 2, 3, 4};
    const auto w = voteWeights(flat, schedule, true);
    CHECK(w[0] == doctest::Approx(2.0));
    CHECK(w[1] == doctest::Approx(2.0));  // rank 1 is exactly at 0.2 * 5
    CHECK(w[2] == doctest::Approx(1.0));
  }

  SUBCASE("disabled weighting returns all ones") {
    for (double w : voteWeights(table, schedule, false)) CHECK(w == doctest::Approx(1.0));
  }
}

TEST_CASE("self-registration returns the identity") {
  const FeatureSet scene = structuredScene();
  const OdometryParams params;
  const OdometryFrame frame = estimateRelative(scene, scene, PoseSE3::Identity(), params);
  CHECK_FALSE(frame.degraded);
  CHECK(rotationErrorRad(frame.relative, PoseSE3::Identity()) < 1e-6);
  CHECK(translationError(frame.relative, PoseSE3::Identity()) < 1e-6);
}

TEST_CASE("noise-free rigid recovery on the ray-cast scene") {
  std::mt19937 rng(7);
  const FeatureSet prev = testsupport::sceneFeatures();

  for (int trial = 0; trial < 5; ++trial) {
    const PoseSE3 G = randomPose(rng, 1.0, 3.0 * M_PI / 180.0);
    const FeatureSet curr = transformFeatures(prev, G);
    const PoseSE3 expected = G.inverse();  // maps current-frame points back onto prev

    const OdometryParams params;
    const OdometryFrame frame = estimateRelative(curr, prev, PoseSE3::Identity(), params);
    REQUIRE_FALSE(frame.degraded);
    CHECK(translationError(frame.relative, expected) < 1e-3);
    CHECK(rotationErrorRad(frame.relative, expected) < 0.05 * M_PI / 180.0);
    CHECK(frame.report.final_cost <= frame.report.initial_cost);
  }
}

TEST_CASE("noisy clutter-contaminated recovery beats the unfiltered baseline") {
  std::mt19937 rng(11);
  const FeatureSet prev = testsupport::sceneFeatures();

  // A rare correspondence survives the vote floor by pairwise-distance
  // coincidence and inflates a single trial; the accuracy contract is on the
  // mean over trials (the win count is per-trial).
  int filtered_wins = 0;
  double sum_t = 0.0, sum_r = 0.0;
  const int trials = 10;
  for (int trial = 0; trial < trials; ++trial) {
    const PoseSE3 G = randomPose(rng, 0.5, 2.0 * M_PI / 180.0);
    const PoseSE3 expected = G.inverse();

    FeatureSet curr = transformFeatures(prev, G);
    curr = testsupport::addClutterFeatures(curr, rng, 0.30);
    curr = testsupport::addFeatureNoise(curr, rng, 0.02);

    OdometryParams guided;
    const OdometryFrame with_votes = estimateRelative(curr, prev, PoseSE3::Identity(), guided);

    OdometryParams plain;
    plain.use_graph_filter = false;
    plain.use_weighting = false;
    const OdometryFrame baseline = estimateRelative(curr, prev, PoseSE3::Identity(), plain);

    REQUIRE_FALSE(with_votes.degraded);
    sum_t += translationError(with_votes.relative, expected);
    sum_r += rotationErrorRad(with_votes.relative, expected);

    if (poseError(with_votes.relative, expected) < poseError(baseline.relative, expected)) {
      ++filtered_wins;
    }
  }
  CHECK(sum_t / trials < 0.02);
  CHECK(sum_r / trials < 0.2 * M_PI / 180.0);
  CHECK(filtered_wins >= trials - 1);
}

TEST_CASE("under-constrained inputs degrade to the prediction") {
  FeatureSet tiny;
  FeaturePoint f;
  f.position = {5.0, 0.0, 0.0};
  tiny.edges.push_back(f);

  std::mt19937 rng(13);
  const PoseSE3 prediction = randomPose(rng, 0.3, 0.1);
  const OdometryFrame frame = estimateRelative(tiny, tiny, prediction, OdometryParams{});
  CHECK(frame.degraded);
  CHECK((frame.relative.matrix() - prediction.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("results are reproducible and robust to feature order") {
  std::mt19937 rng(17);
  const FeatureSet prev = structuredScene();
  const PoseSE3 G = randomPose(rng, 0.5, 1.5 * M_PI / 180.0);
  const FeatureSet curr = transformFeatures(prev, G);

  const OdometryParams params;
  const OdometryFrame a = estimateRelative(curr, prev, PoseSE3::Identity(), params);
  const OdometryFrame b = estimateRelative(curr, prev, PoseSE3::Identity(), params);
  CHECK((a.relative.matrix() - b.relative.matrix()).cwiseAbs().maxCoeff() == 0.0);

  FeatureSet shuffled = curr;
  std::shuffle(shuffled.edges.begin(), shuffled.edges.end(), rng);
  std::shuffle(shuffled.planars.begin(), shuffled.planars.end(), rng);
  const OdometryFrame c = estimateRelative(shuffled, prev, PoseSE3::Identity(), params);
  CHECK((a.relative.matrix() - c.relative.matrix()).cwiseAbs().maxCoeff() < 2e-6);
}

TEST_CASE("tracker chains global poses exactly") {
  std::mt19937 rng(19);
  const FeatureSet scene = structuredScene();
  OdometryTracker tracker((OdometryParams()));

  PoseSE3 expected_global;
  FeatureSet prev = scene;
  const OdometryFrame first = tracker.processFrame(prev);
  CHECK((first.global.matrix() - PoseSE3::Identity().matrix()).cwiseAbs().maxCoeff() == 0.0);

  for (int k = 0; k < 3; ++k) {
    const PoseSE3 G = randomPose(rng, 0.3, 1.0 * M_PI / 180.0);
    const FeatureSet curr = transformFeatures(prev, G);
    const OdometryFrame frame = tracker.processFrame(curr);
    expected_global = compose(expected_global, frame.relative);
    CHECK((frame.global.matrix() - expected_global.matrix()).cwiseAbs().maxCoeff() == 0.0);
    prev = curr;
  }
}
