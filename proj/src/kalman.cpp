#include "sparsetrack/kalman.hpp"

#include <algorithm>
#include <stdexcept>

namespace sparsetrack {

namespace {

constexpr double kMinSide = 1.0;

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat48 = Eigen::Matrix<double, 4, 8>;

Mat8 transition() {
  Mat8 F = Mat8::Identity();
  for (int k = 0; k < 4; ++k) F(k, k + 4) = 1.0;
  return F;
}

Mat48 observation() {
  Mat48 H = Mat48::Zero();
  for (int k = 0; k < 4; ++k) H(k, k) = 1.0;
  return H;
}

Eigen::Vector4d measurement_std(const Vec8& mean, double weight) {
  return {weight * mean(3), weight * mean(3), weight * mean(2), weight * mean(3)};
}

void clamp_size(Vec8& mean) {
  mean(2) = std::max(mean(2), kMinSide);
  mean(3) = std::max(mean(3), kMinSide);
}

}  // namespace

BoundingBox KalmanState::box() const {
  return BoundingBox::from_center(mean(0), mean(1), mean(2), mean(3));
}

KalmanState kf_init(const BoundingBox& box, const KalmanConfig& config) {
  require_valid(box);
  KalmanState s;
  s.mean << box.cx(), box.cy(), box.w, box.h, 0, 0, 0, 0;
  Vec8 std;
  std << config.position_weight * box.h, config.position_weight * box.h,
      config.position_weight * box.w, config.position_weight * box.h,
      config.init_velocity_weight * box.h, config.init_velocity_weight * box.h,
      config.init_velocity_weight * box.w, config.init_velocity_weight * box.h;
  s.covariance = std.cwiseProduct(std).asDiagonal();
  return s;
}

KalmanState kf_predict(const KalmanState& state, const KalmanConfig& config) {
  static const Mat8 F = transition();
  const double h = state.mean(3);
  const double w = state.mean(2);
  Vec8 std;
  std << config.position_weight * h, config.position_weight * h, config.position_weight * w,
      config.position_weight * h, config.velocity_weight * h, config.velocity_weight * h,
      config.velocity_weight * w, config.velocity_weight * h;
  KalmanState out;
  out.mean = F * state.mean;
  clamp_size(out.mean);
  out.covariance = F * state.covariance * F.transpose();
  out.covariance.diagonal() += std.cwiseProduct(std);
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

KalmanState kf_update(const KalmanState& state, const BoundingBox& box, const KalmanConfig& config) {
  require_valid(box);
  static const Mat48 H = observation();
  const Eigen::Vector4d r = measurement_std(state.mean, config.position_weight);
  Mat4 S = H * state.covariance * H.transpose();
  S.diagonal() += r.cwiseProduct(r);
  Eigen::LLT<Mat4> llt(S);
  if (llt.info() != Eigen::Success || S.diagonal().minCoeff() <= 0.0) {
    throw std::runtime_error("Kalman update: innovation covariance is not positive definite");
  }
  const Eigen::Vector4d z(box.cx(), box.cy(), box.w, box.h);
  const Eigen::Vector4d innovation = z - H * state.mean;
  // K = P H^T S^-1
  const Eigen::Matrix<double, 8, 4> gain =
      llt.solve(H * state.covariance.transpose()).transpose();
  KalmanState out;
  out.mean = state.mean + gain * innovation;
  clamp_size(out.mean);
  out.covariance = state.covariance - gain * S * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

}  // namespace sparsetrack
