#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsetrack/geometry.hpp"

namespace sparsetrack {

// Trajectory side of the association graph. `box` is the trajectory's
// position estimate for the detection frame; `frame` is its last observation.
struct TrackNode {
  int id = 0;
  BoundingBox box;
  int frame = 0;
  Feature feature;
  std::optional<int> gt_id;
};

// (dx, dy) center offset over mean height, log(h_d/h_t), log(w_d/w_t),
// time gap in seconds, appearance distance.
using EdgeFeature = std::array<double, 6>;
inline constexpr int kEdgeFeatureDim = 6;

struct Edge {
  int track = 0;  // index into AssocGraph::tracks
  int det = 0;    // index into AssocGraph::detections
  double distance = 0.0;  // ratio-test distance under the last applied variant
  EdgeFeature feature{};
};

enum class RatioKind { None, Iou, Appearance };

std::string to_string(RatioKind kind);
// Accepts none | iou | app.
RatioKind parse_ratio_kind(const std::string& text);

struct RatioVariant {
  RatioKind kind = RatioKind::Appearance;
  double alpha = 0.3;

  static double default_alpha(RatioKind kind) { return kind == RatioKind::Iou ? 0.1 : 0.3; }
};

struct GraphConfig {
  int k_neighbors = 20;
  RatioVariant ratio;
  double fps = 30.0;
};

// Directed bipartite graph: every edge runs trajectory -> detection.
struct AssocGraph {
  std::vector<TrackNode> tracks;
  std::vector<Detection> detections;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> track_edges;  // N_i as edge indices
  std::vector<std::vector<int>> det_edges;    // N_j as edge indices

  // Sorts edges by (track, det), rebuilds the neighbor sets and validates.
  void reindex();
};

// For each detection, edges to its k nearest tracks by center distance
// (lower track id wins ties). Sorted by (track, det).
std::vector<Edge> candidate_edges(std::span<const TrackNode> tracks,
                                  std::span<const Detection> detections, int k);

// 1 - IoU for RatioKind::Iou, feature distance for RatioKind::Appearance.
double edge_distance(RatioKind kind, const TrackNode& track, const Detection& det);

// Index of the single edge to keep when min < alpha * second_min; nullopt when
// the test is inconclusive or fewer than two distances are given.
std::optional<std::size_t> ratio_test(std::span<const double> distances, double alpha);

enum class RatioOutcome { SingleCandidate, Conclusive, Inconclusive };

struct RatioDecision {
  RatioOutcome outcome = RatioOutcome::SingleCandidate;
  int kept_edge = -1;  // edge index for Conclusive
};

// Per-track outcome of the ratio test; also writes edge distances.
std::vector<RatioDecision> ratio_decisions(AssocGraph& graph, const RatioVariant& variant);

AssocGraph ratio_test_filter(AssocGraph graph, const RatioVariant& variant);

EdgeFeature edge_feature(const TrackNode& track, const Detection& det, double fps);
void init_edge_features(AssocGraph& graph, double fps);

// candidate_edges -> ratio_test_filter -> init_edge_features, or nullopt when
// either side is empty.
std::optional<AssocGraph> build_graph(std::vector<TrackNode> tracks,
                                      std::vector<Detection> detections,
                                      const GraphConfig& config);

}  // namespace sparsetrack
