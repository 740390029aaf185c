#include "sparsetrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sparsetrack {

bool BoundingBox::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0.0 &&
         h > 0.0;
}

void require_valid(const BoundingBox& box) {
  if (!box.valid()) {
    throw std::invalid_argument("invalid bounding box (" + std::to_string(box.x) + ", " +
                                std::to_string(box.y) + ", " + std::to_string(box.w) + ", " +
                                std::to_string(box.h) + ")");
  }
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double feature_distance(const Feature& a, const Feature& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("feature dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
  return static_cast<double>((a - b).norm());
}

std::optional<Feature> normalized(const Feature& v) {
  const Scalar n = v.norm();
  if (!(n > Scalar(1e-12))) return std::nullopt;
  return Feature(v / n);
}

double max_overlap(const Detection& target, std::span<const Detection> others) {
  double best = 0.0;
  for (const auto& o : others) best = std::max(best, iou(target.box, o.box));
  return best;
}

double max_overlap_in_frame(std::span<const Detection> frame_detections, std::size_t index) {
  double best = 0.0;
  for (std::size_t k = 0; k < frame_detections.size(); ++k) {
    if (k == index) continue;
    best = std::max(best, iou(frame_detections[index].box, frame_detections[k].box));
  }
  return best;
}

}  // namespace sparsetrack
