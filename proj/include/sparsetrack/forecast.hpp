#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sparsetrack/geometry.hpp"
#include "sparsetrack/kalman.hpp"
#include "sparsetrack/trajectory.hpp"

namespace sparsetrack {

// What a re-identification model would report for an image region.
struct Appearance {
  enum class Kind { Unavailable, Empty, Observed };
  Kind kind = Kind::Unavailable;
  Feature feature;
};

class AppearanceSource {
 public:
  virtual ~AppearanceSource() = default;
  virtual Appearance appearance_at(int frame, const BoundingBox& box) const = 0;
};

struct AppearanceRegion {
  int frame = 0;
  int id = -1;
  BoundingBox box;
  Feature feature;
};

// Looks up the region with the best IoU (>= min_iou) in the queried frame.
// Frames with no regions at all report Unavailable; a miss reports Empty.
class RegionAppearanceSource : public AppearanceSource {
 public:
  explicit RegionAppearanceSource(const std::vector<AppearanceRegion>& regions,
                                  double min_iou = 0.5);
  Appearance appearance_at(int frame, const BoundingBox& box) const override;
  // Frames covered by the source, [first, last].
  void set_coverage(int first, int last) { first_ = first; last_ = last; }

 private:
  std::map<int, std::vector<AppearanceRegion>> by_frame_;
  double min_iou_;
  int first_ = 0;
  int last_ = -1;
};

struct ForecastContext {
  int frame = 0;
  ImageSize image;
  BoundingBox last_observed;
  const AppearanceSource* appearance = nullptr;
};

// true = keep forecasting.
using ForecastVerifier = std::function<bool(const BoundingBox& predicted, const ForecastContext&)>;

enum class VerifierKind { Default, AlwaysKeep, AlwaysStop };
std::string to_string(VerifierKind kind);
VerifierKind parse_verifier_kind(const std::string& text);

// Geometric stand-in for a learned box verifier: rejects boxes inside the
// image border band or whose area drifted too far from the last observation.
ForecastVerifier default_verifier(double border_band_fraction = 0.01, double max_area_change = 0.5);
ForecastVerifier make_verifier(VerifierKind kind);

enum class StopReason { OutOfView, VerifierReject, AppearanceDrift };
std::string to_string(StopReason reason);

struct ForecastOutcome {
  std::optional<BoundingBox> box;  // set on Continue
  std::optional<StopReason> stop;  // set on Stop
  bool appearance_checked = false;
  bool continues() const { return box.has_value(); }
};

struct ForecastConfig {
  bool constrained = true;
  double min_visible_fraction = 0.5;
  double theta_app = 0.6;
  VerifierKind verifier = VerifierKind::Default;
};

double visible_fraction(const BoundingBox& box, const ImageSize& image);

// Predicts the lost trajectory to ctx.frame and runs the gates in order:
// field of view, verifier, appearance. Unconstrained mode skips all gates.
ForecastOutcome forecast_lost(Trajectory& traj, const ForecastContext& ctx,
                              const ForecastConfig& config, const ForecastVerifier& verifier,
                              const KalmanConfig& kalman);

}  // namespace sparsetrack
