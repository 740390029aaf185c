#pragma once

#include <span>
#include <string>
#include <utility>

#include "sparsetrack/geometry.hpp"
#include "sparsetrack/nn.hpp"
#include "sparsetrack/trajectory.hpp"

namespace sparsetrack {

// How a trajectory's appearance is folded forward when it receives a detection.
enum class IntegrationMode { None, Lstm, Average, IouGuided };

std::string to_string(IntegrationMode mode);
// Accepts none | lstm | average | iou.
IntegrationMode parse_integration_mode(const std::string& text);

// 0.5 * (prev + next), renormalized; antipodal inputs fall back to `next`.
Feature integrate_average(const Feature& prev, const Feature& next);

// 0.5 * (prev * (1 + overlap) + next * (1 - overlap)), renormalized.
// overlap = 1 freezes the feature, overlap = 0 is the plain average.
Feature integrate_iou_guided(const Feature& prev, const Feature& next, double overlap);

// One LSTM step; the unit-normalized hidden output is the new feature. A zero
// hidden output falls back to `next`.
std::pair<Feature, nn::LstmState> integrate_lstm(const nn::LstmState& state, const Feature& next,
                                                 const nn::LstmParams& params);

struct Integrator {
  IntegrationMode mode = IntegrationMode::IouGuided;
  const nn::LstmParams* lstm = nullptr;  // required for IntegrationMode::Lstm
};

// Feature of a freshly spawned trajectory.
void init_trajectory_feature(Trajectory& traj, const Detection& first, const Integrator& integrator);

// Folds frame_detections[matched] into traj. The IoU guide is the matched
// detection's max overlap with the other detections of the same frame.
void update_trajectory_feature(Trajectory& traj, std::span<const Detection> frame_detections,
                               std::size_t matched, const Integrator& integrator);

}  // namespace sparsetrack
