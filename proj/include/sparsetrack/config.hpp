#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "sparsetrack/mpn.hpp"
#include "sparsetrack/synth.hpp"
#include "sparsetrack/tracker.hpp"
#include "sparsetrack/training.hpp"

namespace sparsetrack {

// Everything a command needs, merged from a JSON file and command-line flags.
// Sections: tracker, train, scene, model; plus a top-level seed.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  TrackerConfig tracker;
  TrainConfig train;
  std::string preset;  // scene preset the scene section starts from ("" = custom)
  SceneConfig scene;
  MpnDims model;

  // Throws unless a seed was given.
  std::uint64_t require_seed(const std::string& command) const;
};

// Unknown sections or keys throw std::invalid_argument naming the key.
RunConfig parse_run_config(const nlohmann::json& j);
// A non-empty `preset` replaces the file's preset key before parsing.
RunConfig load_run_config(const std::filesystem::path& path, const std::string& preset = {});
nlohmann::json to_json(const RunConfig& config);

// Re-applies the scene section on top of a freshly selected preset.
void select_preset(RunConfig& config, const std::string& preset);

}  // namespace sparsetrack
