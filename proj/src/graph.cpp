#include "sparsetrack/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sparsetrack {

std::string to_string(RatioKind kind) {
  switch (kind) {
    case RatioKind::None: return "none";
    case RatioKind::Iou: return "iou";
    case RatioKind::Appearance: return "app";
  }
  return "?";
}

RatioKind parse_ratio_kind(const std::string& text) {
  if (text == "none") return RatioKind::None;
  if (text == "iou") return RatioKind::Iou;
  if (text == "app") return RatioKind::Appearance;
  throw std::invalid_argument("unknown ratio variant '" + text + "' (none|iou|app)");
}

void AssocGraph::reindex() {
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.track != b.track ? a.track < b.track : a.det < b.det;
  });
  track_edges.assign(tracks.size(), {});
  det_edges.assign(detections.size(), {});
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    if (edge.track < 0 || edge.track >= static_cast<int>(tracks.size()) || edge.det < 0 ||
        edge.det >= static_cast<int>(detections.size())) {
      throw std::out_of_range("edge endpoint out of range");
    }
    if (e > 0 && edges[e - 1].track == edge.track && edges[e - 1].det == edge.det) {
      throw std::invalid_argument("duplicate edge in association graph");
    }
    track_edges[edge.track].push_back(static_cast<int>(e));
    det_edges[edge.det].push_back(static_cast<int>(e));
  }
}

std::vector<Edge> candidate_edges(std::span<const TrackNode> tracks,
                                  std::span<const Detection> detections, int k) {
  if (k < 1) throw std::invalid_argument("k_neighbors must be >= 1");
  std::vector<Edge> edges;
  std::vector<int> order(tracks.size());
  std::vector<double> dist(tracks.size());
  for (std::size_t j = 0; j < detections.size(); ++j) {
    const auto& d = detections[j].box;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      dist[i] = std::hypot(tracks[i].box.cx() - d.cx(), tracks[i].box.cy() - d.cy());
    }
    std::iota(order.begin(), order.end(), 0);
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), tracks.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](int a, int b) {
                        if (dist[a] != dist[b]) return dist[a] < dist[b];
                        return tracks[a].id < tracks[b].id;
                      });
    for (std::size_t n = 0; n < take; ++n) {
      edges.push_back({order[n], static_cast<int>(j), 0.0, {}});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.track != b.track ? a.track < b.track : a.det < b.det;
  });
  return edges;
}

double edge_distance(RatioKind kind, const TrackNode& track, const Detection& det) {
  switch (kind) {
    case RatioKind::Iou: return 1.0 - iou(track.box, det.box);
    case RatioKind::Appearance: return feature_distance(track.feature, det.feature);
    case RatioKind::None: return 0.0;
  }
  return 0.0;
}

std::optional<std::size_t> ratio_test(std::span<const double> distances, double alpha) {
  if (distances.size() < 2) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t k = 1; k < distances.size(); ++k) {
    if (distances[k] < distances[best]) best = k;
  }
  double second = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < distances.size(); ++k) {
    if (k != best) second = std::min(second, distances[k]);
  }
  if (distances[best] < alpha * second) return best;
  return std::nullopt;
}

std::vector<RatioDecision> ratio_decisions(AssocGraph& graph, const RatioVariant& variant) {
  if (variant.kind != RatioKind::None && !(variant.alpha > 0.0 && variant.alpha < 1.0)) {
    throw std::invalid_argument("ratio alpha must lie in (0, 1)");
  }
  graph.reindex();
  for (auto& e : graph.edges) {
    e.distance = edge_distance(variant.kind, graph.tracks[e.track], graph.detections[e.det]);
  }
  std::vector<RatioDecision> decisions(graph.tracks.size());
  std::vector<double> dists;
  for (std::size_t i = 0; i < graph.tracks.size(); ++i) {
    const auto& incident = graph.track_edges[i];
    if (incident.size() < 2) {
      decisions[i] = {RatioOutcome::SingleCandidate, incident.empty() ? -1 : incident.front()};
      continue;
    }
    if (variant.kind == RatioKind::None) {
      decisions[i] = {RatioOutcome::Inconclusive, -1};
      continue;
    }
    dists.clear();
    for (int e : incident) dists.push_back(graph.edges[e].distance);
    if (auto keep = ratio_test(dists, variant.alpha)) {
      decisions[i] = {RatioOutcome::Conclusive, incident[*keep]};
    } else {
      decisions[i] = {RatioOutcome::Inconclusive, -1};
    }
  }
  return decisions;
}

AssocGraph ratio_test_filter(AssocGraph graph, const RatioVariant& variant) {
  const auto decisions = ratio_decisions(graph, variant);
  std::vector<Edge> kept;
  kept.reserve(graph.edges.size());
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& d = decisions[graph.edges[e].track];
    if (d.outcome == RatioOutcome::Conclusive && d.kept_edge != static_cast<int>(e)) continue;
    kept.push_back(graph.edges[e]);
  }
  graph.edges = std::move(kept);
  graph.reindex();
  return graph;
}

EdgeFeature edge_feature(const TrackNode& track, const Detection& det, double fps) {
  if (!(fps > 0.0)) throw std::invalid_argument("fps must be positive");
  if (det.frame <= track.frame) {
    throw std::invalid_argument("edge time gap must be at least one frame");
  }
  const BoundingBox& t = track.box;
  const BoundingBox& d = det.box;
  const double mean_h = t.h + d.h;
  return {2.0 * (d.cx() - t.cx()) / mean_h,
          2.0 * (d.cy() - t.cy()) / mean_h,
          std::log(d.h / t.h),
          std::log(d.w / t.w),
          static_cast<double>(det.frame - track.frame) / fps,
          feature_distance(track.feature, det.feature)};
}

void init_edge_features(AssocGraph& graph, double fps) {
  for (auto& e : graph.edges) {
    e.feature = edge_feature(graph.tracks[e.track], graph.detections[e.det], fps);
  }
}

std::optional<AssocGraph> build_graph(std::vector<TrackNode> tracks,
                                      std::vector<Detection> detections,
                                      const GraphConfig& config) {
  if (tracks.empty() || detections.empty()) return std::nullopt;
  AssocGraph graph;
  graph.tracks = std::move(tracks);
  graph.detections = std::move(detections);
  graph.edges = candidate_edges(graph.tracks, graph.detections, config.k_neighbors);
  graph = ratio_test_filter(std::move(graph), config.ratio);
  init_edge_features(graph, config.fps);
  return graph;
}

}  // namespace sparsetrack
