#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sparsetrack/types.hpp"

namespace sparsetrack {

// Minimum-cost rectangular assignment (Hungarian method with potentials).
// Returns, for each row, the assigned column or -1 when rows > cols.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

struct ScoredEdge {
  int track = 0;  // trajectory index; indices follow trajectory id order
  int det = 0;
  double score = 0.0;
};

struct MatchResult {
  std::vector<std::pair<int, int>> matches;  // (track, det), sorted by track
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

// Drops edges below tau, ranks the rest by score (ties: lower track, then lower
// detection) and accepts an edge whenever both endpoints are still free.
MatchResult greedy_match(std::span<const ScoredEdge> edges, std::size_t num_tracks,
                         std::size_t num_detections, double tau);

// Maximum total score one-to-one assignment restricted to edges >= tau.
MatchResult optimal_match(std::span<const ScoredEdge> edges, std::size_t num_tracks,
                          std::size_t num_detections, double tau);

}  // namespace sparsetrack
