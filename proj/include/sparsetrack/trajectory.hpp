#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sparsetrack/geometry.hpp"
#include "sparsetrack/graph.hpp"
#include "sparsetrack/kalman.hpp"
#include "sparsetrack/nn.hpp"

namespace sparsetrack {

struct Integrator;

enum class TrackStatus { Active, Lost };

struct Trajectory {
  int id = 0;
  Feature integrated_feature;
  BoundingBox last_box;
  int last_seen_frame = 0;
  TrackStatus status = TrackStatus::Active;
  int frames_lost = 0;
  KalmanState motion;
  int motion_frame = 0;  // frame the Kalman mean is predicted to
  std::vector<std::pair<int, BoundingBox>> history;
  std::optional<nn::LstmState> lstm;
  int hits = 0;
  bool forecasting_stopped = false;
  std::optional<int> gt_id;  // teacher-forced replays only
};

// Advances the motion state to `frame` (no-op if already there).
void predict_to(Trajectory& traj, int frame, const KalmanConfig& config);

// New trajectory seeded from frame_detections[index].
Trajectory spawn_trajectory(int id, std::span<const Detection> frame_detections, std::size_t index,
                            const Integrator& integrator, const KalmanConfig& kalman);

// Assigns frame_detections[index] to traj: motion update, feature integration,
// history, and reset to Active.
void apply_match(Trajectory& traj, std::span<const Detection> frame_detections, std::size_t index,
                 const Integrator& integrator, const KalmanConfig& kalman);

// Graph node for the trajectory at its current motion frame.
TrackNode track_node(const Trajectory& traj);

}  // namespace sparsetrack
