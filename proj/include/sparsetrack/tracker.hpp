#pragma once

#include <string>
#include <vector>

#include "sparsetrack/assignment.hpp"
#include "sparsetrack/forecast.hpp"
#include "sparsetrack/graph.hpp"
#include "sparsetrack/integration.hpp"
#include "sparsetrack/kalman.hpp"
#include "sparsetrack/mpn.hpp"
#include "sparsetrack/sequence.hpp"
#include "sparsetrack/trajectory.hpp"

namespace sparsetrack {

enum class AssignmentMode { Greedy, Optimal };
std::string to_string(AssignmentMode mode);
AssignmentMode parse_assignment_mode(const std::string& text);

// Mpn scores edges with the network; Iou uses IoU(predicted box, detection) as
// the score (motion-only baseline, no model needed).
enum class EdgeScoring { Mpn, Iou };
std::string to_string(EdgeScoring scoring);
EdgeScoring parse_edge_scoring(const std::string& text);

struct TrackerConfig {
  double tau = 0.5;
  GraphConfig graph;
  IntegrationMode integration = IntegrationMode::IouGuided;
  AssignmentMode assignment = AssignmentMode::Greedy;
  EdgeScoring scoring = EdgeScoring::Mpn;
  int lost_frame_limit = 80;
  double spawn_confidence = 0.4;
  bool forecast = true;        // emit boxes for lost trajectories
  int forecast_min_hits = 2;   // observations needed before a trajectory is forecast
  ForecastConfig forecasting;
  KalmanConfig kalman;

  void validate() const;
};

struct TrackState {
  std::vector<Trajectory> trajectories;  // ordered by id
  int next_id = 1;
  int frame = 0;
};

struct StepStats {
  std::size_t candidate_edges = 0;
  std::size_t kept_edges = 0;
  std::size_t matches = 0;
  std::size_t forecasts = 0;
  std::size_t appearance_gate_skipped = 0;
};

// Online association loop: one call per frame, frames strictly increasing.
class Tracker {
 public:
  Tracker(const MpnModel& model, TrackerConfig config, ImageSize image,
          const AppearanceSource* appearance = nullptr);

  // Returns output rows for this frame: matched, newly spawned and forecast boxes.
  std::vector<TrackRow> step(int frame, std::vector<Detection> detections);

  const TrackState& state() const { return state_; }
  const StepStats& last_step() const { return last_; }
  std::size_t appearance_gate_skipped() const { return gate_skipped_; }

 private:
  const MpnModel& model_;
  TrackerConfig config_;
  ImageSize image_;
  const AppearanceSource* appearance_;
  ForecastVerifier verifier_;
  TrackState state_;
  StepStats last_;
  std::size_t gate_skipped_ = 0;
};

std::vector<TrackRow> run_sequence(const Sequence& sequence, const MpnModel& model,
                                   const TrackerConfig& config,
                                   const AppearanceSource* appearance = nullptr);

}  // namespace sparsetrack
