#pragma once

#include <map>
#include <span>
#include <vector>

#include "sparsetrack/graph.hpp"
#include "sparsetrack/integration.hpp"
#include "sparsetrack/kalman.hpp"
#include "sparsetrack/trajectory.hpp"

namespace sparsetrack {

struct ReplayConfig {
  Integrator integrator;
  KalmanConfig kalman;
  int lost_frame_limit = 80;
};

// Trajectories driven by ground-truth identities instead of the tracker's own
// decisions. Trajectory ids are the gt ids; unlabeled detections are ignored.
class TeacherForcedReplay {
 public:
  explicit TeacherForcedReplay(ReplayConfig config) : config_(config) {}

  // Graph nodes for every live trajectory, motion predicted to `frame`.
  std::vector<TrackNode> nodes_for(int frame);

  // Folds the labeled detections of `frame` into their trajectories, spawning
  // new ones, then prunes trajectories lost for too long.
  void observe(int frame, std::span<const Detection> detections);

  const std::map<int, Trajectory>& trajectories() const { return trajs_; }
  // Detection features folded into trajectory `id`, oldest first.
  const std::vector<Feature>& inputs(int id) const { return inputs_.at(id); }

 private:
  ReplayConfig config_;
  std::map<int, Trajectory> trajs_;
  std::map<int, std::vector<Feature>> inputs_;
};

}  // namespace sparsetrack
