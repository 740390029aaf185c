#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sparsetrack/forecast.hpp"
#include "sparsetrack/mot_io.hpp"
#include "sparsetrack/sequence.hpp"

namespace sparsetrack {

struct SceneConfig {
  std::string name = "custom";
  ImageSize image{1280.0, 720.0};
  double fps = 30.0;
  int frames = 150;
  int targets = 5;  // free-moving targets, on top of crossing pairs

  // motion (pixels / frame)
  double speed_min = 1.0;
  double speed_max = 3.0;
  double turn_probability = 0.0;  // per frame chance of a new random heading
  double height_min = 90.0;
  double height_max = 130.0;
  double aspect = 0.4;  // width / height
  bool lanes = false;   // each target (or pair) keeps to its own horizontal lane
  double margin = 10.0; // boxes stay this far inside the image unless they exit

  // occlusion script
  int crossing_pairs = 0;
  int occlusion_min = 2;  // frames the rear target of a pair stays undetected
  int occlusion_max = 10;
  std::optional<int> crossing_frame;  // fixed first-crossing frame; random when unset
  double bounce_probability = 0.0;    // pair reverses direction when it meets
  int exits = 0;  // free targets scripted to walk out of the image for good

  // detections
  double box_noise = 1.0;    // std of the jitter on x, y, w, h
  double dropout = 0.0;      // probability of missing a detectable target
  double clutter = 0.0;      // false positives per frame, per visible target
  double min_visible = 0.35; // unoccluded fraction needed for a detection

  // appearance
  int feature_dim = 32;
  double feature_noise = 0.05;
  bool occlusion_blend = true;  // occluded features drift toward the occluder (weight = IoU)

  std::uint64_t seed = 1;

  void validate() const;
};

struct SceneOutput {
  SequenceInfo info;
  std::vector<TrackRow> gt;
  std::vector<TrackRow> detections;    // id = -1
  std::vector<FeatureRow> features;    // aligned with detections
  std::vector<AppearanceRegion> regions;  // what a re-id model would see at each gt box
  std::vector<int> detection_gt;       // gt id per detection, -1 for clutter

  // Detections joined with features and gt labels.
  Sequence sequence() const;
};

// Throws std::invalid_argument for invalid configs or an infeasible crossing script.
SceneOutput generate(const SceneConfig& config);

// easy, crossing, crowded, crossing-exits (in that order).
std::vector<SceneConfig> standard_scenarios();
SceneConfig scenario(const std::string& name, std::uint64_t seed);

// gt.txt, det.txt, features.txt, appearance.txt, seqinfo.ini
void write_scene(const std::filesystem::path& dir, const SceneOutput& scene);

}  // namespace sparsetrack
