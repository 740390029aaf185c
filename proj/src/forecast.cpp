#include "sparsetrack/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sparsetrack {

RegionAppearanceSource::RegionAppearanceSource(const std::vector<AppearanceRegion>& regions,
                                               double min_iou)
    : min_iou_(min_iou) {
  for (const auto& r : regions) {
    by_frame_[r.frame].push_back(r);
    if (last_ < first_) {
      first_ = last_ = r.frame;
    } else {
      first_ = std::min(first_, r.frame);
      last_ = std::max(last_, r.frame);
    }
  }
}

Appearance RegionAppearanceSource::appearance_at(int frame, const BoundingBox& box) const {
  if (frame < first_ || frame > last_) return {};
  auto it = by_frame_.find(frame);
  if (it == by_frame_.end()) return {Appearance::Kind::Empty, {}};
  const AppearanceRegion* best = nullptr;
  double best_iou = min_iou_;
  for (const auto& r : it->second) {
    const double v = iou(r.box, box);
    if (v >= best_iou) {
      best_iou = v;
      best = &r;
    }
  }
  if (!best) return {Appearance::Kind::Empty, {}};
  return {Appearance::Kind::Observed, best->feature};
}

std::string to_string(VerifierKind kind) {
  switch (kind) {
    case VerifierKind::Default: return "default";
    case VerifierKind::AlwaysKeep: return "always_keep";
    case VerifierKind::AlwaysStop: return "always_stop";
  }
  return "?";
}

VerifierKind parse_verifier_kind(const std::string& text) {
  if (text == "default") return VerifierKind::Default;
  if (text == "always_keep") return VerifierKind::AlwaysKeep;
  if (text == "always_stop") return VerifierKind::AlwaysStop;
  throw std::invalid_argument("unknown verifier '" + text + "' (default|always_keep|always_stop)");
}

ForecastVerifier default_verifier(double border_band_fraction, double max_area_change) {
  return [=](const BoundingBox& box, const ForecastContext& ctx) {
    const double band_x = border_band_fraction * ctx.image.width;
    const double band_y = border_band_fraction * ctx.image.height;
    if (box.x < band_x || box.y < band_y || box.x + box.w > ctx.image.width - band_x ||
        box.y + box.h > ctx.image.height - band_y) {
      return false;
    }
    const double ratio = box.area() / ctx.last_observed.area();
    return std::abs(ratio - 1.0) <= max_area_change;
  };
}

ForecastVerifier make_verifier(VerifierKind kind) {
  switch (kind) {
    case VerifierKind::Default: return default_verifier();
    case VerifierKind::AlwaysKeep: return [](const BoundingBox&, const ForecastContext&) { return true; };
    case VerifierKind::AlwaysStop: return [](const BoundingBox&, const ForecastContext&) { return false; };
  }
  return default_verifier();
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::OutOfView: return "out_of_view";
    case StopReason::VerifierReject: return "verifier_reject";
    case StopReason::AppearanceDrift: return "appearance_drift";
  }
  return "?";
}

double visible_fraction(const BoundingBox& box, const ImageSize& image) {
  const BoundingBox frame{0.0, 0.0, image.width, image.height};
  return intersection_area(box, frame) / box.area();
}

ForecastOutcome forecast_lost(Trajectory& traj, const ForecastContext& ctx,
                              const ForecastConfig& config, const ForecastVerifier& verifier,
                              const KalmanConfig& kalman) {
  if (traj.status != TrackStatus::Lost) {
    throw std::logic_error("forecast_lost called on an active trajectory");
  }
  predict_to(traj, ctx.frame, kalman);
  const BoundingBox box = traj.motion.box();
  ForecastOutcome out;
  if (!config.constrained) {
    out.box = box;
    return out;
  }
  if (visible_fraction(box, ctx.image) < config.min_visible_fraction) {
    out.stop = StopReason::OutOfView;
    return out;
  }
  if (!verifier(box, ctx)) {
    out.stop = StopReason::VerifierReject;
    return out;
  }
  if (ctx.appearance) {
    const Appearance seen = ctx.appearance->appearance_at(ctx.frame, box);
    if (seen.kind != Appearance::Kind::Unavailable) {
      out.appearance_checked = true;
      if (seen.kind == Appearance::Kind::Empty ||
          feature_distance(traj.integrated_feature, seen.feature) > config.theta_app) {
        out.stop = StopReason::AppearanceDrift;
        return out;
      }
    }
  }
  out.box = box;
  return out;
}

}  // namespace sparsetrack
