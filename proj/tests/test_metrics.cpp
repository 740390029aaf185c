#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "sparsetrack/metrics.hpp"
#include "sparsetrack/replay.hpp"
#include "support.hpp"

using namespace sparsetrack;
using namespace sparsetrack::fixtures;

namespace {

TrackRow row(int f, int id, double x) { return {f, id, {x, 0, 10, 20}, 1.0}; }

std::vector<TrackRow> two_targets(int frames) {
  std::vector<TrackRow> gt;
  for (int f = 1; f <= frames; ++f) {
    gt.push_back(row(f, 1, 0));
    gt.push_back(row(f, 2, 100));
  }
  return gt;
}

}  // namespace

TEST(ClearMot, PerfectHypothesis) {
  const auto gt = two_targets(5);
  const auto c = clear_mot(gt, gt);
  EXPECT_EQ(c.mota, 1.0);
  EXPECT_EQ(c.fp, 0);
  EXPECT_EQ(c.fn, 0);
  EXPECT_EQ(c.ids, 0);
  EXPECT_EQ(c.matches, 10);
  EXPECT_DOUBLE_EQ(c.motp, 1.0);
}

TEST(ClearMot, EmptyHypothesis) {
  const auto gt = two_targets(5);
  const auto c = clear_mot(gt, {});
  EXPECT_EQ(c.mota, 0.0);
  EXPECT_EQ(c.fn, 10);
}

TEST(ClearMot, MidSequenceSwapCostsTwoSwitches) {
  const auto gt = two_targets(4);
  std::vector<TrackRow> hyp;
  for (int f = 1; f <= 4; ++f) {
    hyp.push_back(row(f, f >= 3 ? 20 : 10, 0));
    hyp.push_back(row(f, f >= 3 ? 10 : 20, 100));
  }
  const auto c = clear_mot(gt, hyp);
  EXPECT_EQ(c.ids, 2);
  EXPECT_EQ(c.mota, 0.75);
  EXPECT_EQ(c.frames[2].ids, 2);
}

TEST(ClearMot, PreviousCorrespondenceSurvivesABetterNewcomer) {
  // hyp 7 tracks gt 1 with IoU 0.6; hyp 8 appears on top of gt 1 exactly
  std::vector<TrackRow> gt{row(1, 1, 0), row(2, 1, 0)};
  std::vector<TrackRow> hyp{{1, 7, {2.5, 0, 10, 20}, 1}, {2, 7, {2.5, 0, 10, 20}, 1}, row(2, 8, 0)};
  const auto c = clear_mot(gt, hyp);
  EXPECT_EQ(c.ids, 0);
  EXPECT_EQ(c.fp, 1);
}

TEST(ClearMot, FalsePositivesAndMisses) {
  const auto gt = two_targets(2);
  std::vector<TrackRow> hyp{row(1, 5, 0), row(1, 6, 500), row(2, 5, 0)};
  const auto c = clear_mot(gt, hyp);
  EXPECT_EQ(c.fp, 1);
  EXPECT_EQ(c.fn, 2);
  EXPECT_DOUBLE_EQ(c.mota, 1.0 - 3.0 / 4.0);
}

TEST(ClearMot, DuplicateIdInAFrameThrows) {
  std::vector<TrackRow> gt{row(1, 1, 0), row(1, 1, 50)};
  EXPECT_THROW(clear_mot(gt, {}), std::invalid_argument);
}

TEST(IdMetrics, SplitTrackHalves) {
  std::vector<TrackRow> gt, hyp;
  for (int f = 1; f <= 10; ++f) {
    gt.push_back(row(f, 1, 0));
    hyp.push_back(row(f, f <= 5 ? 7 : 8, 0));
  }
  const auto m = id_metrics(gt, hyp);
  EXPECT_EQ(m.idtp, 5);
  EXPECT_EQ(m.idfp, 5);
  EXPECT_EQ(m.idfn, 5);
  EXPECT_EQ(m.idf1, 0.5);
}

TEST(IdMetrics, PerfectAndEmpty) {
  const auto gt = two_targets(6);
  EXPECT_EQ(idf1(gt, gt), 1.0);
  EXPECT_EQ(idf1(gt, {}), 0.0);
}

TEST(IdMetrics, SwapKeepsTheLongerHalf) {
  const auto gt = two_targets(4);
  std::vector<TrackRow> hyp;
  for (int f = 1; f <= 4; ++f) {
    hyp.push_back(row(f, f >= 4 ? 20 : 10, 0));
    hyp.push_back(row(f, f >= 4 ? 10 : 20, 100));
  }
  const auto m = id_metrics(gt, hyp);
  EXPECT_EQ(m.idtp, 6);
  EXPECT_DOUBLE_EQ(m.idf1, 0.75);
}

TEST(Metrics, InvariantToRowOrderWithinFrames) {
  const SceneOutput scene = generate(scenario("crossing", 2));
  const Sequence seq = scene.sequence();
  TrackerConfig cfg;
  cfg.scoring = EdgeScoring::Iou;
  cfg.tau = 0.3;
  const auto hyp = run_sequence(seq, MpnModel::init(MpnDims{}, 1), cfg);
  auto shuffled_gt = scene.gt;
  auto shuffled_hyp = hyp;
  std::mt19937_64 rng(3);
  std::shuffle(shuffled_gt.begin(), shuffled_gt.end(), rng);
  std::shuffle(shuffled_hyp.begin(), shuffled_hyp.end(), rng);
  std::stable_sort(shuffled_gt.begin(), shuffled_gt.end(), [](auto& a, auto& b) { return a.frame < b.frame; });
  std::stable_sort(shuffled_hyp.begin(), shuffled_hyp.end(), [](auto& a, auto& b) { return a.frame < b.frame; });
  const auto a = clear_mot(scene.gt, hyp), b = clear_mot(shuffled_gt, shuffled_hyp);
  EXPECT_EQ(a.mota, b.mota);
  EXPECT_EQ(a.ids, b.ids);
  EXPECT_EQ(id_metrics(scene.gt, hyp).idf1, id_metrics(shuffled_gt, shuffled_hyp).idf1);
}

TEST(Metrics, GroundTruthAgainstItselfIsPerfectOnGeneratedScenes) {
  for (const auto& cfg : standard_scenarios()) {
    const auto scene = generate(cfg);
    const auto c = clear_mot(scene.gt, scene.gt);
    EXPECT_EQ(c.mota, 1.0) << cfg.name;
    EXPECT_EQ(idf1(scene.gt, scene.gt), 1.0) << cfg.name;
  }
}

TEST(Metrics, ReportsCarryTheSameNumbers) {
  const auto gt = two_targets(3);
  std::vector<SequenceScore> scores{{"a", clear_mot(gt, gt), id_metrics(gt, gt)},
                                    {"b", clear_mot(gt, {}), id_metrics(gt, {})}};
  const auto total = aggregate_scores(scores);
  EXPECT_EQ(total.name, "OVERALL");
  EXPECT_EQ(total.clear.fn, 6);
  EXPECT_DOUBLE_EQ(total.clear.mota, 0.5);
  const std::string tsv = format_metrics_tsv(scores);
  const std::string table = format_metrics_table(scores);
  EXPECT_NE(tsv.find("OVERALL"), std::string::npos);
  EXPECT_NE(table.find("OVERALL"), std::string::npos);
  EXPECT_NE(tsv.find("0.5"), std::string::npos);
}

TEST(RatioAnalysis, OrthogonalNoiselessFeaturesNeverPickWrong) {
  std::vector<Detection> dets;
  for (int f = 1; f <= 30; ++f) {
    for (int id = 1; id <= 6; ++id) {
      dets.push_back(make_detection(f, {40.0 * id + f, 100, 30, 80}, unit_vector(8, id), id));
    }
  }
  const std::vector<Sequence> seqs{make_sequence("ortho", dets, {}, 30.0)};
  const auto r = ratio_analysis(seqs, RatioKind::Appearance, {0.05, 0.3, 0.9}, AnalysisConfig{});
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.false_matches, 0);
    EXPECT_EQ(row.true_matches + row.inconclusive, r.rows[0].true_matches + r.rows[0].inconclusive);
  }
  EXPECT_GT(r.rows[0].true_matches, 0);
}

TEST(RatioAnalysis, SingleCandidateTracksAreExcluded) {
  std::vector<Detection> dets;
  for (int f = 1; f <= 10; ++f) dets.push_back(make_detection(f, {100.0 + f, 100, 30, 80}, unit_vector(4, 0), 1));
  const std::vector<Sequence> seqs{make_sequence("one", dets, {}, 30.0)};
  const auto r = ratio_analysis(seqs, RatioKind::Iou, {0.3}, AnalysisConfig{});
  EXPECT_EQ(r.rows[0].true_matches + r.rows[0].false_matches + r.rows[0].inconclusive, 0);
  EXPECT_EQ(r.single_candidate, 9);
}

TEST(RatioAnalysis, CountsAreMonotoneInAlphaAndSumToTheTestedTracks) {
  const std::vector<Sequence> seqs{preset_sequence("crowded", 4)};
  const std::vector<double> alphas{0.2, 0.3, 0.4, 0.5, 0.6};
  for (auto kind : {RatioKind::Iou, RatioKind::Appearance}) {
    const auto r = ratio_analysis(seqs, kind, alphas, AnalysisConfig{});
    ASSERT_EQ(r.rows.size(), alphas.size());
    const long total = r.rows[0].true_matches + r.rows[0].false_matches + r.rows[0].inconclusive;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      EXPECT_EQ(r.rows[k].true_matches + r.rows[k].false_matches + r.rows[k].inconclusive, total);
      if (k > 0) {
        EXPECT_GE(r.rows[k].true_matches, r.rows[k - 1].true_matches);
        EXPECT_LE(r.rows[k].inconclusive, r.rows[k - 1].inconclusive);
      }
    }
  }
  EXPECT_THROW(ratio_analysis(seqs, RatioKind::None, alphas, AnalysisConfig{}), std::invalid_argument);
}

TEST(RatioAnalysis, TableCarriesTheSchema) {
  RatioAnalysisReport r{RatioKind::Appearance, {{0.2, 10, 1, 5}, {0.3, 12, 1, 3}}, 4};
  const std::string table = format_ratio_table({r});
  EXPECT_NE(table.find("M >= 2"), std::string::npos);
  for (const char* label : {"T", "F", "I"}) EXPECT_NE(table.find(label), std::string::npos);
  const std::string tsv = format_ratio_tsv({r});
  EXPECT_NE(tsv.find("0.3"), std::string::npos);
  EXPECT_NE(tsv.find("12"), std::string::npos);
}

TEST(Sparsity, FilteredGraphsAreSmaller) {
  const std::vector<Sequence> seqs{preset_sequence("crowded", 5)};
  const auto rows = measure_sparsity(seqs, {{"dense", {RatioKind::None, 0.3}}, {"app", {RatioKind::Appearance, 0.3}}},
                                     MpnModel::init(MpnDims{}, 1), AnalysisConfig{}, 0.5, 1);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].candidate_edges, rows[0].kept_edges);
  EXPECT_EQ(rows[0].candidate_edges, rows[1].candidate_edges);
  EXPECT_LT(rows[1].kept_edges, rows[1].candidate_edges);
  EXPECT_GT(rows[0].steps, 0u);
  EXPECT_NE(format_sparsity_table(rows).find("app"), std::string::npos);
  EXPECT_NE(format_sparsity_tsv(rows).find("dense"), std::string::npos);
}
