#include <gtest/gtest.h>

#include <cmath>

#include "sparsetrack/training.hpp"
#include "support.hpp"

using namespace sparsetrack;
using namespace sparsetrack::fixtures;

namespace {

ReplayConfig plain_replay() { return ReplayConfig{}; }

}  // namespace

TEST(TrainConfig, LearningRateDropsTenfoldEverySevenEpochs) {
  TrainConfig c;
  EXPECT_DOUBLE_EQ(c.lr_at(0), 1e-3);
  EXPECT_DOUBLE_EQ(c.lr_at(6), 1e-3);
  EXPECT_NEAR(c.lr_at(7), 1e-4, 1e-18);
  EXPECT_NEAR(c.lr_at(14), 1e-5, 1e-18);
  EXPECT_NEAR(c.lr_at(24), 1e-6, 1e-18);
}

TEST(TrainConfig, DefaultsAndValidation) {
  TrainConfig c;
  EXPECT_EQ(c.batch_graphs, 8);
  EXPECT_EQ(c.frames_per_graph, 15);
  EXPECT_EQ(c.epochs, 25);
  EXPECT_NO_THROW(c.validate());
  c.batch_graphs = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.learning_rate = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SamplingStride, ResamplesToTheTargetRate) {
  EXPECT_EQ(sampling_stride(30, 6), 5);
  EXPECT_EQ(sampling_stride(30, 9), 3);
  EXPECT_EQ(sampling_stride(5, 6), 1);
  EXPECT_THROW(sampling_stride(0, 6), std::invalid_argument);
}

TEST(TrainingGraph, LabelsFollowGroundTruthIdentity) {
  const Sequence seq = preset_sequence("crossing", 2);
  int checked = 0;
  for (int t = 20; t <= seq.length(); t += 13) {
    auto tg = make_training_graph(seq, t, 5, 15, GraphConfig{}, plain_replay());
    if (!tg) continue;
    ASSERT_EQ(tg->labels.size(), tg->graph.edges.size());
    ASSERT_EQ(tg->track_inputs.size(), tg->graph.tracks.size());
    for (std::size_t e = 0; e < tg->labels.size(); ++e) {
      const auto& edge = tg->graph.edges[e];
      const bool same = tg->graph.tracks[edge.track].gt_id == tg->graph.detections[edge.det].gt_id;
      EXPECT_EQ(tg->labels[e], same ? 1 : 0);
      EXPECT_LT(tg->graph.tracks[edge.track].frame, t);
    }
    for (const auto& inputs : tg->track_inputs) EXPECT_FALSE(inputs.empty());
    ++checked;
  }
  EXPECT_GT(checked, 5);
}

TEST(Train, UnlabeledSequencesAreRejected) {
  Sequence seq = preset_sequence("easy", 1);
  for (auto& frame : seq.frames) {
    for (auto& d : frame) d.gt_id.reset();
  }
  Checkpoint ckpt;
  ckpt.model = MpnModel::init(MpnDims{}, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  const std::vector<Sequence> seqs{seq};
  EXPECT_THROW(train_model(seqs, cfg, TrackerConfig{}, ckpt), std::invalid_argument);
}

TEST(Train, ZeroEpochsLeavesTheModelUntouched) {
  const std::vector<Sequence> seqs{preset_sequence("easy", 1)};
  Checkpoint ckpt;
  ckpt.model = MpnModel::init(MpnDims{}, 3);
  const MpnModel before = ckpt.model;
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_TRUE(train_model(seqs, cfg, TrackerConfig{}, ckpt).empty());
  EXPECT_EQ(ckpt.step, 0);
  EXPECT_EQ(ckpt.model.classifier.layers()[0].weight, before.classifier.layers()[0].weight);
}

TEST(Train, SeparableScenesAreLearnedAndResumeContinuesCounters) {
  // clean identities on the easy preset: appearance alone separates the edges
  std::vector<Sequence> seqs;
  for (std::uint64_t seed : {11, 12}) {
    SceneConfig cfg = scenario("easy", seed);
    cfg.feature_noise = 0.02;
    seqs.push_back(generate(cfg).sequence());
  }
  TrackerConfig tracker;
  tracker.graph.ratio.kind = RatioKind::None;
  TrainConfig cfg;
  cfg.seed = 4;
  cfg.epochs = 20;
  Checkpoint ckpt;
  ckpt.model = MpnModel::init(MpnDims{}, 4);
  const auto first = train_model(seqs, cfg, tracker, ckpt);
  ASSERT_EQ(first.size(), 20u);
  EXPECT_LT(first.back().loss, first.front().loss);
  const auto steps = ckpt.step;
  EXPECT_GT(steps, 0);

  cfg.epochs = 5;
  const auto second = train_model(seqs, cfg, tracker, ckpt);
  EXPECT_EQ(second.front().epoch, 21);
  EXPECT_EQ(ckpt.epoch, 25);
  EXPECT_GT(ckpt.step, steps);
  EXPECT_LT(second.back().loss, 0.1);

  // held-out frame: true edges outscore false ones on average
  SceneConfig held = scenario("easy", 99);
  held.feature_noise = 0.02;
  const Sequence test = generate(held).sequence();
  double pos = 0, neg = 0;
  int np = 0, nn_ = 0;
  for (int t = 30; t <= test.length(); t += 10) {
    auto tg = make_training_graph(test, t, 5, 15, tracker.graph, ReplayConfig{});
    if (!tg) continue;
    const Vec p = score_edges(tg->graph, ckpt.model);
    for (std::size_t e = 0; e < tg->labels.size(); ++e) {
      (tg->labels[e] ? pos : neg) += p[static_cast<Eigen::Index>(e)];
      (tg->labels[e] ? np : nn_) += 1;
    }
  }
  ASSERT_GT(np, 0);
  ASSERT_GT(nn_, 0);
  EXPECT_GT(pos / np, neg / nn_);
}

TEST(Train, EpochTableHasAHeaderAndOneRowPerEpoch) {
  std::vector<EpochStats> stats{{1, 1e-3, 0.5, 0.8, 10, 200}, {2, 1e-3, 0.4, 0.85, 10, 200}};
  const std::string table = format_epoch_table(stats);
  EXPECT_EQ(table.rfind("epoch\tlr\tloss\taccuracy\tgraphs\tedges\n", 0), 0u);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
  EXPECT_EQ(format_epoch_table({}), "epoch\tlr\tloss\taccuracy\tgraphs\tedges\n");
}
