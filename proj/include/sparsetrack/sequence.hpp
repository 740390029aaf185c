#pragma once

#include <span>
#include <string>
#include <vector>

#include "sparsetrack/geometry.hpp"

namespace sparsetrack {

// One row of a MOTChallenge track file (ground truth or hypothesis).
struct TrackRow {
  int frame = 1;
  int id = -1;
  BoundingBox box;
  double confidence = 1.0;

  bool operator==(const TrackRow&) const = default;
};

// Detections of one video, grouped by frame (frames are 1-based).
struct Sequence {
  std::string name;
  ImageSize image;
  double fps = 30.0;
  bool moving_camera = false;
  std::vector<std::vector<Detection>> frames;  // frames[t - 1] holds frame t

  int length() const { return static_cast<int>(frames.size()); }
  std::span<const Detection> at(int frame) const;
  std::size_t detection_count() const;
};

// Groups detections by frame; the sequence spans frames 1..max(length, last frame).
Sequence make_sequence(std::string name, std::vector<Detection> detections, ImageSize image,
                       double fps, int length = 0);

}  // namespace sparsetrack
