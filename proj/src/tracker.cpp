#include "sparsetrack/tracker.hpp"

#include <algorithm>
#include <stdexcept>

namespace sparsetrack {

std::string to_string(AssignmentMode mode) {
  return mode == AssignmentMode::Greedy ? "greedy" : "optimal";
}

AssignmentMode parse_assignment_mode(const std::string& text) {
  if (text == "greedy") return AssignmentMode::Greedy;
  if (text == "optimal") return AssignmentMode::Optimal;
  throw std::invalid_argument("unknown assignment mode '" + text + "' (greedy|optimal)");
}

std::string to_string(EdgeScoring scoring) { return scoring == EdgeScoring::Mpn ? "mpn" : "iou"; }

EdgeScoring parse_edge_scoring(const std::string& text) {
  if (text == "mpn") return EdgeScoring::Mpn;
  if (text == "iou") return EdgeScoring::Iou;
  throw std::invalid_argument("unknown edge scoring '" + text + "' (mpn|iou)");
}

void TrackerConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  if (graph.k_neighbors < 1) throw std::invalid_argument("k_neighbors must be >= 1");
  if (graph.ratio.kind != RatioKind::None && !(graph.ratio.alpha > 0.0 && graph.ratio.alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (!(graph.fps > 0.0)) throw std::invalid_argument("fps must be positive");
  if (lost_frame_limit < 0) throw std::invalid_argument("lost_frame_limit must be >= 0");
}

Tracker::Tracker(const MpnModel& model, TrackerConfig config, ImageSize image,
                 const AppearanceSource* appearance)
    : model_(model),
      config_(std::move(config)),
      image_(image),
      appearance_(appearance),
      verifier_(make_verifier(config_.forecasting.verifier)) {
  config_.validate();
}

std::vector<TrackRow> Tracker::step(int frame, std::vector<Detection> detections) {
  if (frame <= state_.frame) {
    throw std::invalid_argument("frame " + std::to_string(frame) + " arrived after frame " +
                                std::to_string(state_.frame));
  }
  for (const auto& d : detections) {
    if (d.frame != frame) throw std::invalid_argument("detection frame does not match step frame");
    require_valid(d.box);
  }
  state_.frame = frame;
  last_ = {};
  const Integrator integrator{config_.integration, &model_.lstm};
  auto& trajs = state_.trajectories;

  std::vector<TrackNode> nodes;
  nodes.reserve(trajs.size());
  for (auto& t : trajs) {
    predict_to(t, frame, config_.kalman);
    nodes.push_back(track_node(t));
  }

  MatchResult result;
  if (!trajs.empty() && !detections.empty()) {
    AssocGraph graph;
    graph.tracks = std::move(nodes);
    graph.detections = detections;
    graph.edges = candidate_edges(graph.tracks, graph.detections, config_.graph.k_neighbors);
    last_.candidate_edges = graph.edges.size();
    graph = ratio_test_filter(std::move(graph), config_.graph.ratio);
    init_edge_features(graph, config_.graph.fps);
    last_.kept_edges = graph.edges.size();
    std::vector<ScoredEdge> scored;
    scored.reserve(graph.edges.size());
    if (config_.scoring == EdgeScoring::Mpn) {
      const Vec scores = score_edges(graph, model_);
      for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        scored.push_back({graph.edges[e].track, graph.edges[e].det,
                          static_cast<double>(scores[static_cast<Eigen::Index>(e)])});
      }
    } else {
      for (const auto& e : graph.edges) {
        scored.push_back({e.track, e.det, iou(graph.tracks[e.track].box, graph.detections[e.det].box)});
      }
    }
    result = config_.assignment == AssignmentMode::Greedy
                 ? greedy_match(scored, trajs.size(), detections.size(), config_.tau)
                 : optimal_match(scored, trajs.size(), detections.size(), config_.tau);
  } else {
    for (std::size_t t = 0; t < trajs.size(); ++t) result.unmatched_tracks.push_back(static_cast<int>(t));
    for (std::size_t d = 0; d < detections.size(); ++d) {
      result.unmatched_detections.push_back(static_cast<int>(d));
    }
  }
  last_.matches = result.matches.size();

  std::vector<TrackRow> rows;
  for (auto [t, d] : result.matches) {
    apply_match(trajs[t], detections, static_cast<std::size_t>(d), integrator, config_.kalman);
    rows.push_back({frame, trajs[t].id, detections[d].box, detections[d].confidence});
  }

  std::vector<Trajectory> survivors;
  survivors.reserve(trajs.size() + result.unmatched_detections.size());
  std::vector<char> matched(trajs.size(), 0);
  for (auto [t, d] : result.matches) matched[t] = 1;
  for (std::size_t t = 0; t < trajs.size(); ++t) {
    Trajectory& traj = trajs[t];
    if (!matched[t]) {
      traj.status = TrackStatus::Lost;
      traj.frames_lost = frame - traj.last_seen_frame;
      if (traj.frames_lost > config_.lost_frame_limit) continue;  // pruned
      if (config_.forecast && !traj.forecasting_stopped && traj.hits >= config_.forecast_min_hits) {
        const ForecastContext ctx{frame, image_, traj.last_box, appearance_};
        const ForecastOutcome outcome =
            forecast_lost(traj, ctx, config_.forecasting, verifier_, config_.kalman);
        if (config_.forecasting.constrained && !outcome.appearance_checked && !outcome.stop) {
          ++last_.appearance_gate_skipped;
        }
        if (outcome.continues()) {
          rows.push_back({frame, traj.id, *outcome.box, 0.0});
          ++last_.forecasts;
        } else {
          traj.forecasting_stopped = true;
        }
      }
    }
    survivors.push_back(std::move(traj));
  }
  for (int d : result.unmatched_detections) {
    if (detections[d].confidence < config_.spawn_confidence) continue;
    survivors.push_back(spawn_trajectory(state_.next_id++, detections, static_cast<std::size_t>(d),
                                         integrator, config_.kalman));
    rows.push_back({frame, survivors.back().id, detections[d].box, detections[d].confidence});
  }
  trajs = std::move(survivors);
  gate_skipped_ += last_.appearance_gate_skipped;

  std::sort(rows.begin(), rows.end(),
            [](const TrackRow& a, const TrackRow& b) { return a.id < b.id; });
  return rows;
}

std::vector<TrackRow> run_sequence(const Sequence& sequence, const MpnModel& model,
                                   const TrackerConfig& config,
                                   const AppearanceSource* appearance) {
  Tracker tracker(model, config, sequence.image, appearance);
  std::vector<TrackRow> out;
  for (int t = 1; t <= sequence.length(); ++t) {
    const auto span = sequence.at(t);
    auto rows = tracker.step(t, std::vector<Detection>(span.begin(), span.end()));
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

}  // namespace sparsetrack
