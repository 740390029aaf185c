#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sparsetrack/checkpoint.hpp"
#include "sparsetrack/replay.hpp"
#include "sparsetrack/sequence.hpp"
#include "sparsetrack/tracker.hpp"

namespace sparsetrack {

struct AugmentConfig {
  double node_dropout = 0.1;  // probability of removing a detection from a training window
  double box_jitter = 0.05;   // std of box shifts, as a fraction of box width / height
};

struct TrainConfig {
  int batch_graphs = 8;
  int frames_per_graph = 15;
  double sampling_fps_static = 6.0;
  double sampling_fps_moving = 9.0;
  int epochs = 25;
  double learning_rate = 1e-3;
  int lr_decay_every = 7;
  double lr_decay = 0.1;
  std::optional<double> positive_weight;  // unset: negatives / positives per batch
  int max_graphs_per_epoch = 0;           // 0 = every available target frame
  AugmentConfig augment;
  std::uint64_t seed = 0;

  void validate() const;
  double lr_at(int epoch) const;
};

// Frame step that resamples a scene_fps video at sampling_fps (at least 1).
int sampling_stride(double scene_fps, double sampling_fps);

// One supervised graph: trajectories replayed from ground truth over the
// window preceding `target_frame`, detections from `target_frame`.
struct TrainingGraph {
  AssocGraph graph;
  std::vector<int> labels;  // per edge: 1 iff track and detection share a gt id
  std::vector<std::vector<Feature>> track_inputs;  // per track, features folded in so far
};

std::optional<TrainingGraph> make_training_graph(const Sequence& sequence, int target_frame,
                                                 int stride, int frames_per_graph,
                                                 const GraphConfig& graph,
                                                 const ReplayConfig& replay,
                                                 const AugmentConfig* augment = nullptr,
                                                 std::mt19937_64* rng = nullptr);

struct BatchLoss {
  double loss = 0.0;      // mean weighted BCE over the batch's edges
  double accuracy = 0.0;  // fraction of edges on the right side of 0.5
  std::size_t edges = 0;
  double positive_weight = 1.0;
};

// Mean loss over all edges of the batch. With `grads`, accumulates its
// gradient; in LSTM mode the trajectory features are recomputed from
// `track_inputs` and differentiated through time.
BatchLoss batch_loss(std::span<const TrainingGraph> batch, const MpnModel& model,
                     IntegrationMode mode, std::optional<double> positive_weight,
                     MpnModel* grads = nullptr);

struct EpochStats {
  int epoch = 0;  // 1-based, absolute across resumptions
  double lr = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;
  std::size_t graphs = 0;
  std::size_t edges = 0;
};

// Runs config.epochs further epochs on top of `ckpt` (model, optimizer and
// counters are updated in place). Sequences need gt ids on their detections.
std::vector<EpochStats> train_model(std::span<const Sequence> sequences, const TrainConfig& config,
                              const TrackerConfig& tracker, Checkpoint& ckpt,
                              const std::function<void(const EpochStats&)>& on_epoch = {});

std::string format_epoch_table(const std::vector<EpochStats>& stats);

}  // namespace sparsetrack
