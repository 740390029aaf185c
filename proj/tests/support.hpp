#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sparsetrack/checkpoint.hpp"
#include "sparsetrack/metrics.hpp"
#include "sparsetrack/synth.hpp"
#include "sparsetrack/tracker.hpp"
#include "sparsetrack/training.hpp"

namespace sparsetrack::fixtures {

inline Sequence preset_sequence(const std::string& name, std::uint64_t seed) {
  return generate(scenario(name, seed)).sequence();
}

inline std::vector<Sequence> preset_sequences(const std::string& name, std::uint64_t first,
                                              int count) {
  std::vector<Sequence> out;
  for (int k = 0; k < count; ++k) out.push_back(preset_sequence(name, first + k));
  return out;
}

inline Feature unit_vector(int d, int axis) {
  Feature f = Feature::Zero(d);
  f[axis] = 1;
  return f;
}

inline Feature random_unit(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Feature f(d);
  for (int i = 0; i < d; ++i) f[i] = static_cast<Scalar>(n(rng));
  return f / f.norm();
}

inline Detection make_detection(int frame, BoundingBox box, Feature feature,
                                std::optional<int> gt = std::nullopt, double conf = 0.9) {
  return {frame, box, conf, std::move(feature), gt};
}

// Checkpoint trained on `sequences` with the given tracker settings.
inline Checkpoint train_on(const std::vector<Sequence>& sequences, const TrainConfig& train,
                           const TrackerConfig& tracker, const MpnDims& dims, std::uint64_t seed) {
  Checkpoint ckpt;
  ckpt.model = MpnModel::init(dims, seed);
  TrainConfig cfg = train;
  cfg.seed = seed;
  train_model(sequences, cfg, tracker, ckpt);
  return ckpt;
}

}  // namespace sparsetrack::fixtures
