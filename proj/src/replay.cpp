#include "sparsetrack/replay.hpp"

#include <set>

namespace sparsetrack {

std::vector<TrackNode> TeacherForcedReplay::nodes_for(int frame) {
  std::vector<TrackNode> out;
  out.reserve(trajs_.size());
  for (auto& [id, traj] : trajs_) {
    predict_to(traj, frame, config_.kalman);
    out.push_back(track_node(traj));
  }
  return out;
}

void TeacherForcedReplay::observe(int frame, std::span<const Detection> detections) {
  std::set<int> seen;
  for (std::size_t j = 0; j < detections.size(); ++j) {
    const auto& det = detections[j];
    if (!det.gt_id || !seen.insert(*det.gt_id).second) continue;
    const int id = *det.gt_id;
    auto it = trajs_.find(id);
    if (it == trajs_.end()) {
      trajs_.emplace(id, spawn_trajectory(id, detections, j, config_.integrator, config_.kalman));
      inputs_[id] = {det.feature};
    } else {
      apply_match(it->second, detections, j, config_.integrator, config_.kalman);
      inputs_[id].push_back(det.feature);
    }
  }
  for (auto it = trajs_.begin(); it != trajs_.end();) {
    Trajectory& t = it->second;
    if (t.last_seen_frame < frame) {
      t.status = TrackStatus::Lost;
      t.frames_lost = frame - t.last_seen_frame;
    }
    if (t.frames_lost > config_.lost_frame_limit) {
      inputs_.erase(it->first);
      it = trajs_.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace sparsetrack
