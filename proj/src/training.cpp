#include "sparsetrack/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sparsetrack {

void TrainConfig::validate() const {
  if (batch_graphs < 1) throw std::invalid_argument("batch_graphs must be >= 1");
  if (frames_per_graph < 2) throw std::invalid_argument("frames_per_graph must be >= 2");
  if (!(sampling_fps_static > 0.0) || !(sampling_fps_moving > 0.0)) {
    throw std::invalid_argument("sampling rates must be positive");
  }
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (lr_decay_every < 1 || !(lr_decay > 0.0)) throw std::invalid_argument("bad learning rate schedule");
  if (positive_weight && !(*positive_weight > 0.0)) {
    throw std::invalid_argument("positive weight must be positive");
  }
  if (max_graphs_per_epoch < 0) throw std::invalid_argument("max_graphs_per_epoch must be >= 0");
  if (!(augment.node_dropout >= 0.0 && augment.node_dropout < 1.0) || !(augment.box_jitter >= 0.0)) {
    throw std::invalid_argument("augmentation: dropout must lie in [0, 1), jitter must be >= 0");
  }
}

double TrainConfig::lr_at(int epoch) const {
  return learning_rate * std::pow(lr_decay, static_cast<double>(epoch / lr_decay_every));
}

int sampling_stride(double scene_fps, double sampling_fps) {
  if (!(scene_fps > 0.0) || !(sampling_fps > 0.0)) throw std::invalid_argument("frame rates must be positive");
  return std::max(1, static_cast<int>(std::lround(scene_fps / sampling_fps)));
}

namespace {

std::vector<Detection> augmented(std::span<const Detection> dets, const AugmentConfig* augment,
                                 std::mt19937_64* rng) {
  std::vector<Detection> out;
  out.reserve(dets.size());
  if (!augment || !rng) {
    out.assign(dets.begin(), dets.end());
    return out;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const auto& d : dets) {
    if (unit(*rng) < augment->node_dropout) continue;
    Detection copy = d;
    copy.box.x += augment->box_jitter * d.box.w * gauss(*rng);
    copy.box.y += augment->box_jitter * d.box.h * gauss(*rng);
    out.push_back(std::move(copy));
  }
  return out;
}

struct LstmTrace {
  std::vector<nn::LstmCache> steps;
  Vec h;
  double norm = 0.0;  // |h|; 0 when the fallback feature was used
};

}  // namespace

std::optional<TrainingGraph> make_training_graph(const Sequence& sequence, int target_frame,
                                                 int stride, int frames_per_graph,
                                                 const GraphConfig& graph,
                                                 const ReplayConfig& replay,
                                                 const AugmentConfig* augment,
                                                 std::mt19937_64* rng) {
  if (target_frame < 1 || target_frame > sequence.length()) return std::nullopt;
  TeacherForcedReplay history(replay);
  for (int k = frames_per_graph - 1; k >= 1; --k) {
    const int frame = target_frame - k * stride;
    if (frame < 1) continue;
    const auto dets = augmented(sequence.at(frame), augment, rng);
    history.nodes_for(frame);
    history.observe(frame, dets);
  }
  auto dets = augmented(sequence.at(target_frame), augment, rng);
  auto built = build_graph(history.nodes_for(target_frame), std::move(dets), graph);
  if (!built || built->edges.empty()) return std::nullopt;

  TrainingGraph out;
  out.graph = std::move(*built);
  out.labels.reserve(out.graph.edges.size());
  for (const auto& e : out.graph.edges) {
    const auto& t = out.graph.tracks[static_cast<std::size_t>(e.track)].gt_id;
    const auto& d = out.graph.detections[static_cast<std::size_t>(e.det)].gt_id;
    out.labels.push_back(t && d && *t == *d ? 1 : 0);
  }
  for (const auto& node : out.graph.tracks) out.track_inputs.push_back(history.inputs(node.id));
  return out;
}

BatchLoss batch_loss(std::span<const TrainingGraph> batch, const MpnModel& model,
                     IntegrationMode mode, std::optional<double> positive_weight, MpnModel* grads) {
  const bool lstm = mode == IntegrationMode::Lstm;
  std::vector<MpnTrace> traces(batch.size());
  std::vector<Vec> logits(batch.size());
  std::vector<std::vector<LstmTrace>> lstm_traces(batch.size());
  std::size_t positives = 0, total = 0;

  for (std::size_t g = 0; g < batch.size(); ++g) {
    const auto& tg = batch[g];
    if (tg.labels.size() != tg.graph.edges.size()) throw std::invalid_argument("labels do not match edges");
    std::optional<Mat> features;
    if (lstm) {
      const int d = model.dims.feature_dim;
      features = Mat(static_cast<Eigen::Index>(tg.graph.tracks.size()), d);
      for (std::size_t i = 0; i < tg.graph.tracks.size(); ++i) {
        const auto& inputs = tg.track_inputs.at(i);
        if (inputs.empty()) throw std::invalid_argument("trajectory without recorded inputs");
        LstmTrace tr;
        nn::LstmState state = nn::LstmState::zeros(model.lstm.hidden_dim());
        for (const auto& x : inputs) {
          tr.steps.emplace_back();
          state = nn::lstm_step(model.lstm, state, x, &tr.steps.back());
        }
        tr.h = state.h;
        const double n = state.h.norm();
        Feature f;
        if (n > 1e-12) {
          tr.norm = n;
          f = state.h / static_cast<Scalar>(n);
        } else {
          f = inputs.back();
        }
        features->row(static_cast<Eigen::Index>(i)) = f.transpose();
        lstm_traces[g].push_back(std::move(tr));
      }
    }
    logits[g] = mpn_forward(tg.graph, model, &traces[g], features ? &*features : nullptr);
    for (int y : tg.labels) positives += static_cast<std::size_t>(y);
    total += tg.labels.size();
  }

  BatchLoss out;
  out.edges = total;
  if (total == 0) return out;
  const std::size_t negatives = total - positives;
  out.positive_weight = positive_weight ? *positive_weight
                        : (positives > 0 && negatives > 0)
                            ? static_cast<double>(negatives) / static_cast<double>(positives)
                            : 1.0;
  const double inv = 1.0 / static_cast<double>(total);
  std::size_t correct = 0;
  std::vector<Vec> logit_grads(batch.size());
  for (std::size_t g = 0; g < batch.size(); ++g) {
    logit_grads[g] = Vec::Zero(logits[g].size());
    for (Eigen::Index e = 0; e < logits[g].size(); ++e) {
      const int y = batch[g].labels[static_cast<std::size_t>(e)];
      const auto l = nn::weighted_bce_logit(logits[g][e], y, out.positive_weight);
      out.loss += l.loss * inv;
      logit_grads[g][e] = static_cast<Scalar>(l.logit_grad * inv);
      if ((l.probability >= 0.5) == (y == 1)) ++correct;
    }
  }
  out.accuracy = static_cast<double>(correct) * inv;

  if (grads) {
    for (std::size_t g = 0; g < batch.size(); ++g) {
      Mat feature_grad;
      mpn_backward(batch[g].graph, model, traces[g], logit_grads[g], *grads,
                   lstm ? &feature_grad : nullptr);
      if (!lstm) continue;
      for (std::size_t i = 0; i < lstm_traces[g].size(); ++i) {
        const auto& tr = lstm_traces[g][i];
        if (tr.norm == 0.0) continue;  // fallback feature does not depend on the cell
        const Vec gf = feature_grad.row(static_cast<Eigen::Index>(i)).transpose();
        const Vec f = tr.h / static_cast<Scalar>(tr.norm);
        Vec h_grad = (gf - f * f.dot(gf)) / static_cast<Scalar>(tr.norm);
        Vec c_grad = Vec::Zero(h_grad.size());
        for (auto it = tr.steps.rbegin(); it != tr.steps.rend(); ++it) {
          const auto step = nn::lstm_step_backward(model.lstm, *it, h_grad, c_grad, grads->lstm);
          h_grad = step.h_prev;
          c_grad = step.c_prev;
        }
      }
    }
  }
  return out;
}

std::vector<EpochStats> train_model(std::span<const Sequence> sequences, const TrainConfig& config,
                              const TrackerConfig& tracker, Checkpoint& ckpt,
                              const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  tracker.validate();
  struct Sample {
    std::size_t sequence;
    int frame;
    int stride;
  };
  std::vector<Sample> samples;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    bool labeled = false;
    for (const auto& frame : seq.frames) {
      for (const auto& d : frame) labeled = labeled || d.gt_id.has_value();
    }
    if (!labeled) throw std::invalid_argument("training sequence '" + seq.name + "' has no gt labels");
    const int stride = sampling_stride(
        seq.fps, seq.moving_camera ? config.sampling_fps_moving : config.sampling_fps_static);
    for (int t = 1 + stride; t <= seq.length(); ++t) samples.push_back({s, t, stride});
  }
  if (config.epochs > 0 && samples.empty()) throw std::invalid_argument("no training samples");

  if (!ckpt.adam) ckpt.adam.emplace();
  ckpt.integration = to_string(tracker.integration);
  const ReplayConfig replay{{tracker.integration, &ckpt.model.lstm}, tracker.kalman,
                            tracker.lost_frame_limit};
  std::vector<EpochStats> history;
  for (int i = 0; i < config.epochs; ++i) {
    const int epoch = ckpt.epoch;  // 0-based index of the epoch being run
    std::mt19937_64 rng(config.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(epoch));
    std::vector<Sample> order = samples;
    std::shuffle(order.begin(), order.end(), rng);
    if (config.max_graphs_per_epoch > 0 &&
        order.size() > static_cast<std::size_t>(config.max_graphs_per_epoch)) {
      order.resize(static_cast<std::size_t>(config.max_graphs_per_epoch));
    }
    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.lr = config.lr_at(epoch);
    double loss_sum = 0.0, correct_sum = 0.0;
    std::vector<TrainingGraph> batch;
    auto flush = [&] {
      if (batch.empty()) return;
      MpnModel grads = ckpt.model.zeros_like();
      const auto bl = batch_loss(batch, ckpt.model, tracker.integration, config.positive_weight, &grads);
      nn::adam_update(ckpt.model.parameters(), grads.parameters(), *ckpt.adam, stats.lr);
      ++ckpt.step;
      loss_sum += bl.loss * static_cast<double>(bl.edges);
      correct_sum += bl.accuracy * static_cast<double>(bl.edges);
      stats.edges += bl.edges;
      stats.graphs += batch.size();
      batch.clear();
    };
    for (const auto& s : order) {
      auto g = make_training_graph(sequences[s.sequence], s.frame, s.stride, config.frames_per_graph,
                                   tracker.graph, replay, &config.augment, &rng);
      if (!g) continue;
      batch.push_back(std::move(*g));
      if (batch.size() == static_cast<std::size_t>(config.batch_graphs)) flush();
    }
    flush();
    if (stats.edges > 0) {
      stats.loss = loss_sum / static_cast<double>(stats.edges);
      stats.accuracy = correct_sum / static_cast<double>(stats.edges);
    }
    ++ckpt.epoch;
    history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return history;
}

std::string format_epoch_table(const std::vector<EpochStats>& stats) {
  std::ostringstream out;
  out << "epoch\tlr\tloss\taccuracy\tgraphs\tedges\n";
  char buf[160];
  for (const auto& s : stats) {
    std::snprintf(buf, sizeof buf, "%d\t%.6g\t%.6f\t%.4f\t%zu\t%zu\n", s.epoch, s.lr, s.loss,
                  s.accuracy, s.graphs, s.edges);
    out << buf;
  }
  return out.str();
}

}  // namespace sparsetrack
