#pragma once

#include <Eigen/Dense>

#include "sparsetrack/geometry.hpp"

namespace sparsetrack {

// Noise standard deviations are expressed as fractions of the box size, so a
// tall box gets proportionally looser gates.
struct KalmanConfig {
  double position_weight = 1.0 / 20.0;   // measurement / process std of cx, cy, w, h
  double velocity_weight = 1.0 / 160.0;  // process std of the velocity components
  double init_velocity_weight = 10.0 / 160.0;

  static KalmanConfig noiseless() { return {0.0, 0.0, 10.0 / 160.0}; }
};

// Constant-velocity state (cx, cy, w, h, vcx, vcy, vw, vh); velocities in pixels/frame.
struct KalmanState {
  Eigen::Matrix<double, 8, 1> mean = Eigen::Matrix<double, 8, 1>::Zero();
  Eigen::Matrix<double, 8, 8> covariance = Eigen::Matrix<double, 8, 8>::Zero();

  BoundingBox box() const;
};

KalmanState kf_init(const BoundingBox& box, const KalmanConfig& config = {});
KalmanState kf_predict(const KalmanState& state, const KalmanConfig& config = {});
// Throws std::runtime_error when the innovation covariance is not positive definite.
KalmanState kf_update(const KalmanState& state, const BoundingBox& box,
                      const KalmanConfig& config = {});

}  // namespace sparsetrack
