#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sparsetrack/forecast.hpp"
#include "sparsetrack/integration.hpp"
#include "sparsetrack/kalman.hpp"
#include "support.hpp"

using namespace sparsetrack;
using namespace sparsetrack::fixtures;

namespace {

// One axis of the constant-velocity filter with the same noise model (box
// height held fixed), written out with scalars.
struct AxisFilter {
  double p, v, P00, P01, P11;
  double pos_std, vel_std;
  AxisFilter(double x0, double h, const KalmanConfig& c)
      : p(x0), v(0), P00(std::pow(c.position_weight * h, 2)), P01(0),
        P11(std::pow(c.init_velocity_weight * h, 2)), pos_std(c.position_weight * h),
        vel_std(c.velocity_weight * h) {}
  void predict() {
    p += v;
    const double a = P00 + 2 * P01 + P11, b = P01 + P11;
    P00 = a + pos_std * pos_std;
    P01 = b;
    P11 += vel_std * vel_std;
  }
  void update(double z) {
    const double s = P00 + pos_std * pos_std;
    const double k0 = P00 / s, k1 = P01 / s;
    const double r = z - p;
    p += k0 * r;
    v += k1 * r;
    const double n00 = (1 - k0) * P00, n01 = (1 - k0) * P01, n11 = P11 - k1 * P01;
    P00 = n00;
    P01 = n01;
    P11 = n11;
  }
};

Trajectory lost_at(const BoundingBox& box, int frame, const KalmanConfig& k) {
  const std::vector<Detection> dets{make_detection(frame, box, unit_vector(4, 0))};
  Trajectory t = spawn_trajectory(1, dets, 0, {IntegrationMode::None, nullptr}, k);
  t.status = TrackStatus::Lost;
  t.frames_lost = 1;
  return t;
}

class FixedAppearance : public AppearanceSource {
 public:
  explicit FixedAppearance(Appearance a) : a_(std::move(a)) {}
  Appearance appearance_at(int, const BoundingBox&) const override { return a_; }

 private:
  Appearance a_;
};

const ImageSize kImage{640, 480};

}  // namespace

TEST(Kalman, NoiselessConstantVelocityIsExactAfterTwoUpdates) {
  const KalmanConfig k = KalmanConfig::noiseless();
  auto truth = [](int t) { return BoundingBox::from_center(100 + 4.0 * t, 200 - 2.5 * t, 30 + 0.5 * t, 80 + 1.0 * t); };
  KalmanState s = kf_init(truth(0), k);
  s = kf_update(kf_predict(s, k), truth(1), k);
  for (int t = 2; t < 20; ++t) {
    s = kf_predict(s, k);
    EXPECT_NEAR(s.mean(0), truth(t).cx(), 1e-9);
    EXPECT_NEAR(s.mean(1), truth(t).cy(), 1e-9);
    EXPECT_NEAR(s.mean(2), truth(t).w, 1e-9);
    EXPECT_NEAR(s.mean(3), truth(t).h, 1e-9);
  }
}

TEST(Kalman, PredictOnlyAdvancesByVelocity) {
  KalmanState s = kf_init({0, 0, 10, 20});
  s.mean.tail<4>() << 2.0, -1.0, 0.0, 0.0;
  const double cx = s.mean(0), cy = s.mean(1);
  for (int k = 1; k <= 7; ++k) {
    s = kf_predict(s);
    EXPECT_DOUBLE_EQ(s.mean(0), cx + 2.0 * k);
    EXPECT_DOUBLE_EQ(s.mean(1), cy - 1.0 * k);
  }
}

TEST(Kalman, NoisyTrackMatchesScalarReferenceAndStaysAccurate) {
  const KalmanConfig k;
  double err = 0;
  int n = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto truth_cx = [](int t) { return 50.0 + 3.0 * t; };
    const double h = 90, w = 36;
    auto obs = [&](int t) { return BoundingBox::from_center(truth_cx(t) + noise(rng), 300, w, h); };
    BoundingBox first = obs(0);
    KalmanState s = kf_init(first, k);
    AxisFilter ref(first.cx(), h, k);
    for (int t = 1; t < 50; ++t) {
      s = kf_predict(s, k);
      ref.predict();
      EXPECT_NEAR(s.mean(0), ref.p, 1e-8);
      if (t > 10) {
        err += std::abs(s.mean(0) - truth_cx(t));
        ++n;
      }
      const BoundingBox z = obs(t);
      s = kf_update(s, z, k);
      ref.update(z.cx());
      EXPECT_NEAR(s.mean(4), ref.v, 1e-8);
    }
  }
  EXPECT_LT(err / n, 2.0);
}

TEST(Kalman, CovarianceStaysSymmetricPsd) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 3.0);
  KalmanState s = kf_init({100, 100, 40, 100});
  for (int k = 0; k < 1000; ++k) {
    s = kf_predict(s);
    if (k % 3 != 0) {
      const BoundingBox b = s.box();
      s = kf_update(s, {b.x + noise(rng), b.y + noise(rng), std::max(5.0, b.w + noise(rng)), std::max(5.0, b.h + noise(rng))});
    }
    EXPECT_LT((s.covariance - s.covariance.transpose()).cwiseAbs().maxCoeff(), 1e-9);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> eig(s.covariance);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9);
    EXPECT_GT(s.mean(2), 0);
    EXPECT_GT(s.mean(3), 0);
  }
}

TEST(Kalman, SingularInnovationThrows) {
  KalmanConfig zero{0.0, 0.0, 0.0};
  const KalmanState s = kf_init({0, 0, 10, 10}, zero);
  EXPECT_THROW(kf_update(s, {1, 1, 10, 10}, zero), std::runtime_error);
}

TEST(Forecast, MostlyOutsideTheImageStops) {
  const KalmanConfig k = KalmanConfig::noiseless();
  Trajectory t = lost_at({-24, 100, 40, 100}, 1, k);  // 60% left of the image
  const auto out = forecast_lost(t, {2, kImage, t.last_box, nullptr}, {}, make_verifier(VerifierKind::AlwaysKeep), k);
  ASSERT_TRUE(out.stop.has_value());
  EXPECT_EQ(*out.stop, StopReason::OutOfView);
  EXPECT_FALSE(out.continues());
}

TEST(Forecast, RejectingVerifierStopsOnTheFirstLostFrame) {
  const KalmanConfig k = KalmanConfig::noiseless();
  Trajectory t = lost_at({200, 100, 40, 100}, 1, k);
  const auto out = forecast_lost(t, {2, kImage, t.last_box, nullptr}, {}, make_verifier(VerifierKind::AlwaysStop), k);
  EXPECT_EQ(out.stop, StopReason::VerifierReject);
}

TEST(Forecast, GatesRunInOrder) {
  const KalmanConfig k = KalmanConfig::noiseless();
  FixedAppearance empty({Appearance::Kind::Empty, {}});
  Trajectory outside = lost_at({-30, 100, 40, 100}, 1, k);
  EXPECT_EQ(forecast_lost(outside, {2, kImage, outside.last_box, &empty}, {},
                          make_verifier(VerifierKind::AlwaysStop), k)
                .stop,
            StopReason::OutOfView);
  Trajectory inside = lost_at({200, 100, 40, 100}, 1, k);
  EXPECT_EQ(forecast_lost(inside, {2, kImage, inside.last_box, &empty}, {},
                          make_verifier(VerifierKind::AlwaysStop), k)
                .stop,
            StopReason::VerifierReject);
  Trajectory again = lost_at({200, 100, 40, 100}, 1, k);
  EXPECT_EQ(forecast_lost(again, {2, kImage, again.last_box, &empty}, {},
                          make_verifier(VerifierKind::AlwaysKeep), k)
                .stop,
            StopReason::AppearanceDrift);
}

TEST(Forecast, AppearanceGate) {
  const KalmanConfig k = KalmanConfig::noiseless();
  const ForecastVerifier keep = make_verifier(VerifierKind::AlwaysKeep);
  Trajectory t = lost_at({200, 100, 40, 100}, 1, k);
  FixedAppearance same({Appearance::Kind::Observed, unit_vector(4, 0)});
  FixedAppearance other({Appearance::Kind::Observed, unit_vector(4, 1)});
  FixedAppearance none({Appearance::Kind::Unavailable, {}});
  auto a = forecast_lost(t, {2, kImage, t.last_box, &same}, {}, keep, k);
  EXPECT_TRUE(a.continues());
  EXPECT_TRUE(a.appearance_checked);
  auto b = forecast_lost(t, {3, kImage, t.last_box, &none}, {}, keep, k);
  EXPECT_TRUE(b.continues());
  EXPECT_FALSE(b.appearance_checked);
  auto c = forecast_lost(t, {4, kImage, t.last_box, &other}, {}, keep, k);
  EXPECT_EQ(c.stop, StopReason::AppearanceDrift);
}

TEST(Forecast, UnconstrainedModeSkipsEveryGate) {
  const KalmanConfig k = KalmanConfig::noiseless();
  Trajectory t = lost_at({-39, 100, 40, 100}, 1, k);
  ForecastConfig cfg;
  cfg.constrained = false;
  const auto out = forecast_lost(t, {2, kImage, t.last_box, nullptr}, cfg, make_verifier(VerifierKind::AlwaysStop), k);
  EXPECT_TRUE(out.continues());
}

TEST(Forecast, ActiveTrajectoryIsRejected) {
  Trajectory t = lost_at({200, 100, 40, 100}, 1, {});
  t.status = TrackStatus::Active;
  EXPECT_THROW(forecast_lost(t, {2, kImage, t.last_box, nullptr}, {}, default_verifier(), {}), std::logic_error);
}

TEST(Forecast, StopReasonsAreReproducible) {
  for (int rep = 0; rep < 3; ++rep) {
    Trajectory t = lost_at({600, 100, 40, 100}, 1, {});
    const auto out = forecast_lost(t, {2, kImage, t.last_box, nullptr}, {}, default_verifier(), {});
    EXPECT_EQ(out.stop, StopReason::VerifierReject);  // inside the border band
  }
}

TEST(DefaultVerifier, BorderBandAndAreaChange) {
  const auto v = default_verifier();
  const ForecastContext ctx{1, kImage, {100, 100, 40, 100}, nullptr};
  EXPECT_TRUE(v({100, 100, 40, 100}, ctx));
  EXPECT_FALSE(v({1, 100, 40, 100}, ctx));
  EXPECT_FALSE(v({100, 100, 80, 100}, ctx));
  EXPECT_TRUE(v({100, 100, 50, 100}, ctx));
}

TEST(Forecast, OccludedTargetReemergesCloseToItsTrack) {
  const KalmanConfig k;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.5);
  auto truth = [](int t) { return BoundingBox::from_center(100 + 2.5 * t, 240 + 0.5 * t, 36, 90); };
  std::vector<Detection> first{make_detection(1, truth(1), unit_vector(4, 0))};
  Trajectory tr = spawn_trajectory(1, first, 0, {IntegrationMode::None, nullptr}, k);
  for (int t = 2; t <= 30; ++t) {
    BoundingBox b = truth(t);
    b.x += noise(rng);
    b.y += noise(rng);
    std::vector<Detection> d{make_detection(t, b, unit_vector(4, 0))};
    apply_match(tr, d, 0, {IntegrationMode::None, nullptr}, k);
  }
  tr.status = TrackStatus::Lost;
  FixedAppearance same({Appearance::Kind::Observed, unit_vector(4, 0)});
  BoundingBox last;
  for (int t = 31; t <= 40; ++t) {
    const auto out = forecast_lost(tr, {t, kImage, tr.last_box, &same}, {}, default_verifier(), k);
    ASSERT_TRUE(out.continues()) << "frame " << t;
    last = *out.box;
  }
  EXPECT_LT(std::hypot(last.cx() - truth(40).cx(), last.cy() - truth(40).cy()), 5.0);
}

TEST(RegionAppearance, LooksUpTheBestOverlappingRegion) {
  const std::vector<AppearanceRegion> regions{{5, 1, {0, 0, 10, 10}, unit_vector(3, 0)},
                                              {5, 2, {4, 0, 10, 10}, unit_vector(3, 1)},
                                              {7, 1, {0, 0, 10, 10}, unit_vector(3, 2)}};
  const RegionAppearanceSource src(regions);
  const auto hit = src.appearance_at(5, {3.5, 0, 10, 10});
  EXPECT_EQ(hit.kind, Appearance::Kind::Observed);
  EXPECT_EQ(hit.feature, unit_vector(3, 1));
  EXPECT_EQ(src.appearance_at(6, {0, 0, 10, 10}).kind, Appearance::Kind::Empty);
  EXPECT_EQ(src.appearance_at(5, {300, 0, 10, 10}).kind, Appearance::Kind::Empty);
  EXPECT_EQ(src.appearance_at(9, {0, 0, 10, 10}).kind, Appearance::Kind::Unavailable);
}

TEST(VisibleFraction, PartialOverlapWithTheImage) {
  EXPECT_DOUBLE_EQ(visible_fraction({-20, 0, 40, 10}, kImage), 0.5);
  EXPECT_DOUBLE_EQ(visible_fraction({10, 10, 40, 10}, kImage), 1.0);
  EXPECT_DOUBLE_EQ(visible_fraction({700, 10, 40, 10}, kImage), 0.0);
}
