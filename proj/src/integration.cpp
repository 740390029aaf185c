#include "sparsetrack/integration.hpp"

#include <cmath>
#include <stdexcept>

namespace sparsetrack {

namespace {

constexpr double kUnitTolerance = 1e-12;

// Rescales v to unit length unless it already is; a zero vector yields the fallback.
Feature unit_or(const Feature& v, const Feature& fallback) {
  const double n = v.norm();
  if (!(n > 1e-12)) return fallback;
  if (std::abs(n - 1.0) <= kUnitTolerance) return v;
  return v / static_cast<Scalar>(n);
}

void require_same_dim(const Feature& a, const Feature& b) {
  if (a.size() != b.size()) throw std::invalid_argument("feature dimension mismatch");
}

}  // namespace

std::string to_string(IntegrationMode mode) {
  switch (mode) {
    case IntegrationMode::None: return "none";
    case IntegrationMode::Lstm: return "lstm";
    case IntegrationMode::Average: return "average";
    case IntegrationMode::IouGuided: return "iou";
  }
  return "?";
}

IntegrationMode parse_integration_mode(const std::string& text) {
  if (text == "none") return IntegrationMode::None;
  if (text == "lstm") return IntegrationMode::Lstm;
  if (text == "average") return IntegrationMode::Average;
  if (text == "iou") return IntegrationMode::IouGuided;
  throw std::invalid_argument("unknown integration mode '" + text + "' (none|lstm|average|iou)");
}

Feature integrate_average(const Feature& prev, const Feature& next) {
  require_same_dim(prev, next);
  const Feature mix = Scalar(0.5) * (prev + next);
  return unit_or(mix, next);
}

Feature integrate_iou_guided(const Feature& prev, const Feature& next, double overlap) {
  require_same_dim(prev, next);
  if (!(overlap >= 0.0 && overlap <= 1.0)) {
    throw std::invalid_argument("IoU guide must lie in [0, 1]");
  }
  const auto I = static_cast<Scalar>(overlap);
  const Feature mix = Scalar(0.5) * (prev * (Scalar(1) + I) + next * (Scalar(1) - I));
  return unit_or(mix, next);
}

std::pair<Feature, nn::LstmState> integrate_lstm(const nn::LstmState& state, const Feature& next,
                                                 const nn::LstmParams& params) {
  nn::LstmState out = nn::lstm_step(params, state, next);
  Feature f = unit_or(out.h, next);
  return {std::move(f), std::move(out)};
}

void init_trajectory_feature(Trajectory& traj, const Detection& first, const Integrator& integrator) {
  if (integrator.mode == IntegrationMode::Lstm) {
    if (!integrator.lstm) throw std::invalid_argument("LSTM integration needs LSTM parameters");
    auto [f, state] =
        integrate_lstm(nn::LstmState::zeros(integrator.lstm->hidden_dim()), first.feature,
                       *integrator.lstm);
    traj.integrated_feature = std::move(f);
    traj.lstm = std::move(state);
    return;
  }
  traj.integrated_feature = first.feature;
}

void update_trajectory_feature(Trajectory& traj, std::span<const Detection> frame_detections,
                               std::size_t matched, const Integrator& integrator) {
  if (matched >= frame_detections.size()) throw std::out_of_range("matched detection index");
  const Detection& det = frame_detections[matched];
  switch (integrator.mode) {
    case IntegrationMode::None:
      traj.integrated_feature = det.feature;
      break;
    case IntegrationMode::Average:
      traj.integrated_feature = integrate_average(traj.integrated_feature, det.feature);
      break;
    case IntegrationMode::IouGuided:
      traj.integrated_feature = integrate_iou_guided(
          traj.integrated_feature, det.feature, max_overlap_in_frame(frame_detections, matched));
      break;
    case IntegrationMode::Lstm: {
      if (!integrator.lstm) throw std::invalid_argument("LSTM integration needs LSTM parameters");
      const nn::LstmState state =
          traj.lstm ? *traj.lstm : nn::LstmState::zeros(integrator.lstm->hidden_dim());
      auto [f, next] = integrate_lstm(state, det.feature, *integrator.lstm);
      traj.integrated_feature = std::move(f);
      traj.lstm = std::move(next);
      break;
    }
  }
}

}  // namespace sparsetrack
