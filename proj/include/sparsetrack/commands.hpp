#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sparsetrack/checkpoint.hpp"
#include "sparsetrack/config.hpp"
#include "sparsetrack/metrics.hpp"

namespace sparsetrack {

namespace fs = std::filesystem;

// Subcommand bodies behind the sparsetrack binary. Each throws on error and
// writes nothing unless it succeeds; each echoes its effective config.

// Writes the scene files plus effective-config.json into out_dir.
void cmd_synth(const RunConfig& config, const fs::path& out_dir, bool force);

// Trains on the labeled scene directories (gt.txt + det.txt + features.txt).
// Writes the checkpoint, <checkpoint>.loss.tsv and <checkpoint>.config.json.
std::vector<EpochStats> cmd_train(const RunConfig& config, const std::vector<fs::path>& data_dirs,
                                  const fs::path& out_checkpoint,
                                  const std::optional<fs::path>& resume, bool force);

struct TrackSummary {
  std::size_t rows = 0;
  std::size_t appearance_gate_skipped = 0;
};

// Tracks one scene directory; the checkpoint may be omitted with iou scoring.
// Uses appearance.txt for the forecast appearance gate when present.
TrackSummary cmd_track(const RunConfig& config, const fs::path& data_dir,
                       const std::optional<fs::path>& checkpoint, const fs::path& out_file,
                       bool force);

// Scores hypothesis files against gt files (paired by position).
std::vector<SequenceScore> cmd_eval(const std::vector<fs::path>& gt_files,
                                    const std::vector<fs::path>& hyp_files,
                                    const std::optional<fs::path>& out_dir, bool force);

std::vector<RatioAnalysisReport> cmd_ratio(const RunConfig& config,
                                           const std::vector<fs::path>& data_dirs,
                                           const std::vector<RatioKind>& kinds,
                                           const std::vector<double>& alphas,
                                           const std::optional<fs::path>& out_dir, bool force);

// Dense vs R_iou (alpha 0.1) vs R_app (alpha 0.3) unless the config names a
// ratio variant, which then replaces the matching default row.
std::vector<SparsityRow> cmd_sparsity(const RunConfig& config,
                                      const std::vector<fs::path>& data_dirs,
                                      const std::optional<fs::path>& checkpoint,
                                      const std::optional<fs::path>& out_dir, bool force);

// Loads a scene directory; gt labels are attached when gt.txt exists.
Sequence load_scene(const fs::path& dir, const RunConfig& config, bool require_labels);

}  // namespace sparsetrack
