#include "sparsetrack/trajectory.hpp"

#include <stdexcept>

#include "sparsetrack/integration.hpp"

namespace sparsetrack {

void predict_to(Trajectory& traj, int frame, const KalmanConfig& config) {
  while (traj.motion_frame < frame) {
    traj.motion = kf_predict(traj.motion, config);
    ++traj.motion_frame;
  }
}

Trajectory spawn_trajectory(int id, std::span<const Detection> frame_detections, std::size_t index,
                            const Integrator& integrator, const KalmanConfig& kalman) {
  const Detection& det = frame_detections[index];
  Trajectory traj;
  traj.id = id;
  traj.last_box = det.box;
  traj.last_seen_frame = det.frame;
  traj.motion = kf_init(det.box, kalman);
  traj.motion_frame = det.frame;
  traj.history.emplace_back(det.frame, det.box);
  traj.hits = 1;
  traj.gt_id = det.gt_id;
  init_trajectory_feature(traj, det, integrator);
  return traj;
}

void apply_match(Trajectory& traj, std::span<const Detection> frame_detections, std::size_t index,
                 const Integrator& integrator, const KalmanConfig& kalman) {
  const Detection& det = frame_detections[index];
  if (det.frame <= traj.last_seen_frame) {
    throw std::logic_error("trajectory matched to a detection that is not newer than its history");
  }
  predict_to(traj, det.frame, kalman);
  traj.motion = kf_update(traj.motion, det.box, kalman);
  traj.last_box = det.box;
  traj.last_seen_frame = det.frame;
  traj.status = TrackStatus::Active;
  traj.frames_lost = 0;
  traj.forecasting_stopped = false;
  ++traj.hits;
  traj.history.emplace_back(det.frame, det.box);
  update_trajectory_feature(traj, frame_detections, index, integrator);
}

TrackNode track_node(const Trajectory& traj) {
  return {traj.id, traj.motion.box(), traj.last_seen_frame, traj.integrated_feature, traj.gt_id};
}

}  // namespace sparsetrack
