#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sparsetrack/types.hpp"

namespace sparsetrack {

// Axis-aligned box in MOTChallenge layout: left, top, width, height (pixels).
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }
  double area() const { return w * h; }
  bool valid() const;

  static BoundingBox from_center(double cx, double cy, double w, double h) {
    return {cx - 0.5 * w, cy - 0.5 * h, w, h};
  }

  bool operator==(const BoundingBox&) const = default;
};

// Throws std::invalid_argument unless w > 0, h > 0 and all fields are finite.
void require_valid(const BoundingBox& box);

double intersection_area(const BoundingBox& a, const BoundingBox& b);
double iou(const BoundingBox& a, const BoundingBox& b);

// Euclidean distance between two feature vectors; throws on dimension mismatch.
double feature_distance(const Feature& a, const Feature& b);

// Returns v / |v|, or std::nullopt when |v| is (numerically) zero.
std::optional<Feature> normalized(const Feature& v);

struct ImageSize {
  double width = 1920.0;
  double height = 1080.0;
};

struct Detection {
  int frame = 1;
  BoundingBox box;
  double confidence = 1.0;
  Feature feature;
  std::optional<int> gt_id;
};

// Largest IoU between `target` and any box in `others`; 0 for an empty list.
double max_overlap(const Detection& target, std::span<const Detection> others);

// IoU guide for detection `index`: its max overlap with every other detection of the frame.
double max_overlap_in_frame(std::span<const Detection> frame_detections, std::size_t index);

}  // namespace sparsetrack
