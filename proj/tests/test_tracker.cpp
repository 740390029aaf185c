#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <numeric>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "sparsetrack/assignment.hpp"
#include "sparsetrack/tracker.hpp"
#include "support.hpp"

using namespace sparsetrack;
using namespace sparsetrack::fixtures;

namespace {

TrackerConfig iou_config() {
  TrackerConfig c;
  c.scoring = EdgeScoring::Iou;
  c.tau = 0.3;
  return c;
}

const MpnModel& untrained() {
  static const MpnModel m = MpnModel::init(MpnDims{}, 1);
  return m;
}

std::vector<Detection> frame_of(int frame, std::vector<BoundingBox> boxes, double conf = 0.9) {
  std::vector<Detection> out;
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    out.push_back(make_detection(frame, boxes[k], unit_vector(32, static_cast<int>(k % 32)), std::nullopt, conf));
  }
  return out;
}

void expect_one_to_one(const std::vector<TrackRow>& rows) {
  std::map<int, std::set<int>> ids;
  std::set<std::tuple<int, double, double, double, double>> used;
  for (const auto& r : rows) {
    EXPECT_TRUE(ids[r.frame].insert(r.id).second) << "frame " << r.frame << " id " << r.id;
    if (r.confidence > 0) {
      EXPECT_TRUE(used.insert({r.frame, r.box.x, r.box.y, r.box.w, r.box.h}).second) << "frame " << r.frame;
    }
  }
}

}  // namespace

TEST(GreedyMatch, ReferenceCases) {
  const std::vector<ScoredEdge> one{{0, 0, 0.9}};
  EXPECT_EQ(greedy_match(one, 1, 1, 0.5).matches, (std::vector<std::pair<int, int>>{{0, 0}}));

  const std::vector<ScoredEdge> three{{0, 0, 0.9}, {0, 1, 0.8}, {1, 1, 0.7}};
  EXPECT_EQ(greedy_match(three, 2, 2, 0.5).matches, (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}));

  const std::vector<ScoredEdge> low{{0, 0, 0.3}, {1, 1, 0.2}};
  const auto none = greedy_match(low, 2, 3, 0.5);
  EXPECT_TRUE(none.matches.empty());
  EXPECT_EQ(none.unmatched_tracks, (std::vector<int>{0, 1}));
  EXPECT_EQ(none.unmatched_detections, (std::vector<int>{0, 1, 2}));
}

TEST(GreedyMatch, GreedyIsNotOptimal) {
  // greedy takes (0,0) first and strands track 1; the optimal assignment does not
  const std::vector<ScoredEdge> edges{{0, 0, 0.9}, {0, 1, 0.85}, {1, 0, 0.8}};
  EXPECT_EQ(greedy_match(edges, 2, 2, 0.5).matches.size(), 1u);
  EXPECT_EQ(optimal_match(edges, 2, 2, 0.5).matches,
            (std::vector<std::pair<int, int>>{{0, 1}, {1, 0}}));
}

TEST(GreedyMatch, TiesPreferLowerTrackThenLowerDetection) {
  const std::vector<ScoredEdge> edges{{1, 0, 0.7}, {0, 1, 0.7}, {0, 0, 0.7}};
  const auto m = greedy_match(edges, 2, 2, 0.5).matches;
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0], std::make_pair(0, 0));
}

TEST(SolveAssignment, SmallReferenceMatrices) {
  Eigen::MatrixXd c(3, 3);
  c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  EXPECT_EQ(solve_assignment(c), (std::vector<int>{1, 0, 2}));
  Eigen::MatrixXd wide(2, 3);
  wide << 5, 1, 9, 1, 5, 9;
  EXPECT_EQ(solve_assignment(wide), (std::vector<int>{1, 0}));
  Eigen::MatrixXd tall(3, 2);
  tall << 5, 1, 1, 5, 0, 0;
  const auto r = solve_assignment(tall);
  EXPECT_EQ(std::count(r.begin(), r.end(), -1), 1);
}

TEST(SolveAssignment, MatchesBruteForceOnRandomSquares) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) c(i, j) = u(rng);
    }
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
      double s = 0;
      for (int i = 0; i < n; ++i) s += c(i, perm[i]);
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto a = solve_assignment(c);
    double got = 0;
    for (int i = 0; i < n; ++i) got += c(i, a[i]);
    EXPECT_NEAR(got, best, 1e-12);
  }
}

TEST(Tracker, FirstFrameSpawnsFreshIds) {
  Tracker t(untrained(), iou_config(), {});
  const auto rows = t.step(1, frame_of(1, {{0, 0, 10, 20}, {100, 0, 10, 20}, {200, 0, 10, 20}}));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].id, 1);
  EXPECT_EQ(rows[1].id, 2);
  EXPECT_EQ(rows[2].id, 3);
  EXPECT_EQ(t.state().next_id, 4);
}

TEST(Tracker, EmptyFrameSendsEveryoneToLost) {
  TrackerConfig cfg = iou_config();
  cfg.forecast = false;
  Tracker t(untrained(), cfg, {});
  t.step(1, frame_of(1, {{100, 100, 10, 20}, {300, 100, 10, 20}}));
  const auto rows = t.step(2, {});
  EXPECT_TRUE(rows.empty());
  EXPECT_EQ(t.last_step().matches, 0u);
  for (const auto& tr : t.state().trajectories) {
    EXPECT_EQ(tr.status, TrackStatus::Lost);
    EXPECT_EQ(tr.frames_lost, 1);
  }
}

TEST(Tracker, OutOfOrderFramesThrow) {
  Tracker t(untrained(), iou_config(), {});
  t.step(3, {});
  EXPECT_THROW(t.step(3, {}), std::invalid_argument);
  EXPECT_THROW(t.step(2, {}), std::invalid_argument);
  EXPECT_THROW(t.step(5, frame_of(4, {{0, 0, 5, 5}})), std::invalid_argument);
}

TEST(Tracker, LowConfidenceDetectionsDoNotSpawn) {
  Tracker t(untrained(), iou_config(), {});
  EXPECT_TRUE(t.step(1, frame_of(1, {{0, 0, 10, 10}}, 0.2)).empty());
  EXPECT_TRUE(t.state().trajectories.empty());
}

TEST(RunSequence, EmptySequenceGivesNoRows) {
  const Sequence seq = make_sequence("empty", {}, {}, 30.0);
  EXPECT_TRUE(run_sequence(seq, untrained(), iou_config()).empty());
}

TEST(RunSequence, StationaryDetectionIsOneTrajectory) {
  std::vector<Detection> dets;
  for (int f = 1; f <= 40; ++f) dets.push_back(make_detection(f, {300, 200, 40, 100}, unit_vector(32, 0)));
  const auto rows = run_sequence(make_sequence("still", dets, {}, 30.0), untrained(), iou_config());
  ASSERT_EQ(rows.size(), 40u);
  for (const auto& r : rows) EXPECT_EQ(r.id, 1);
}

TEST(RunSequence, PrunedTrajectoriesNeverComeBack) {
  std::vector<Detection> dets;
  for (int f = 1; f <= 5; ++f) dets.push_back(make_detection(f, {300 + f, 200, 40, 100}, unit_vector(32, 0)));
  dets.push_back(make_detection(40, {900, 600, 40, 100}, unit_vector(32, 1)));
  TrackerConfig cfg = iou_config();
  cfg.lost_frame_limit = 10;
  cfg.forecasting.verifier = VerifierKind::AlwaysKeep;
  const auto rows = run_sequence(make_sequence("gone", dets, {1920, 1080}, 30.0), untrained(), cfg);
  int last_frame_of_1 = 0;
  for (const auto& r : rows) {
    if (r.id == 1) last_frame_of_1 = std::max(last_frame_of_1, r.frame);
  }
  EXPECT_LE(last_frame_of_1, 5 + 10);
  EXPECT_GT(last_frame_of_1, 5);  // forecasts were emitted while within the limit
}

TEST(RunSequence, NoForecastFlagSuppressesForecastRows) {
  std::vector<Detection> dets;
  for (int f = 1; f <= 5; ++f) dets.push_back(make_detection(f, {300 + 2 * f, 200, 40, 100}, unit_vector(32, 0)));
  TrackerConfig cfg = iou_config();
  cfg.forecasting.verifier = VerifierKind::AlwaysKeep;
  const Sequence seq = make_sequence("s", dets, {1920, 1080}, 30.0, 12);
  const auto with = run_sequence(seq, untrained(), cfg);
  cfg.forecast = false;
  const auto without = run_sequence(seq, untrained(), cfg);
  EXPECT_EQ(without.size(), 5u);
  EXPECT_GT(with.size(), without.size());
  for (const auto& r : with) {
    if (r.frame > 5) EXPECT_EQ(r.confidence, 0.0);
  }
}

TEST(RunSequence, CrowdedSceneIsFastOneToOneWithMonotoneIds) {
  const Sequence seq = preset_sequence("crowded", 2);
  const auto start = std::chrono::steady_clock::now();
  const auto rows = run_sequence(seq, untrained(), TrackerConfig{});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 10.0);
  expect_one_to_one(rows);
  // ids appear for the first time in increasing order
  int highest = 0;
  std::set<int> seen;
  for (const auto& r : rows) {
    if (seen.insert(r.id).second) {
      EXPECT_GT(r.id, highest);
      highest = r.id;
    }
  }
}

TEST(RunSequence, IsDeterministic) {
  const Sequence seq = preset_sequence("crossing", 4);
  EXPECT_EQ(run_sequence(seq, untrained(), TrackerConfig{}), run_sequence(seq, untrained(), TrackerConfig{}));
}

TEST(RunSequence, TrainedModelKeepsTwoCrossingIdentitiesApart) {
  auto pair_scene = [](std::uint64_t seed) {
    SceneConfig c = scenario("crossing", seed);
    c.crossing_pairs = 1;
    c.targets = 0;
    return c;
  };
  std::vector<Sequence> train;
  for (std::uint64_t s = 100; s < 104; ++s) train.push_back(generate(pair_scene(s)).sequence());
  TrackerConfig cfg;
  TrainConfig tc;
  tc.epochs = 8;
  const Checkpoint ckpt = train_on(train, tc, cfg, MpnDims{}, 5);
  const SceneOutput scene = generate(pair_scene(7));
  const auto rows = run_sequence(scene.sequence(), ckpt.model, cfg);
  const auto clear = clear_mot(scene.gt, rows);
  EXPECT_EQ(clear.ids, 0);
  // each gt identity is covered by exactly one output id
  std::map<int, std::set<int>> hyp_ids;
  for (const auto& f : scene.gt) {
    const TrackRow* best = nullptr;
    for (const auto& r : rows) {
      if (r.frame == f.frame && iou(r.box, f.box) >= 0.5 && (!best || iou(r.box, f.box) > iou(best->box, f.box))) {
        best = &r;
      }
    }
    if (best) hyp_ids[f.id].insert(best->id);
  }
  ASSERT_EQ(hyp_ids.size(), 2u);
  for (const auto& [gt, ids] : hyp_ids) EXPECT_EQ(ids.size(), 1u) << "gt " << gt;
}

TEST(TrackerConfig, Validation) {
  TrackerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.tau = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrackerConfig{};
  c.graph.ratio = {RatioKind::Iou, 0.0};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrackerConfig{};
  EXPECT_EQ(c.lost_frame_limit, 80);
  EXPECT_EQ(c.graph.k_neighbors, 20);
  EXPECT_DOUBLE_EQ(c.tau, 0.5);
}
