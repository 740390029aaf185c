#include "sparsetrack/sequence.hpp"

#include <algorithm>
#include <stdexcept>

namespace sparsetrack {

std::span<const Detection> Sequence::at(int frame) const {
  if (frame < 1 || frame > length()) return {};
  return frames[static_cast<std::size_t>(frame - 1)];
}

std::size_t Sequence::detection_count() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.size();
  return n;
}

Sequence make_sequence(std::string name, std::vector<Detection> detections, ImageSize image,
                       double fps, int length) {
  Sequence seq;
  seq.name = std::move(name);
  seq.image = image;
  seq.fps = fps;
  int last = length;
  for (const auto& d : detections) {
    if (d.frame < 1) throw std::invalid_argument("detection frame must be >= 1");
    last = std::max(last, d.frame);
  }
  seq.frames.resize(static_cast<std::size_t>(last));
  for (auto& d : detections) seq.frames[static_cast<std::size_t>(d.frame - 1)].push_back(std::move(d));
  return seq;
}

}  // namespace sparsetrack
