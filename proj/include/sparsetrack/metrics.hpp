#pragma once

#include <span>
#include <string>
#include <vector>

#include "sparsetrack/graph.hpp"
#include "sparsetrack/mpn.hpp"
#include "sparsetrack/replay.hpp"
#include "sparsetrack/sequence.hpp"

namespace sparsetrack {

struct ClearMotFrame {
  int frame = 0;
  int gt = 0;
  int matches = 0;
  int fp = 0;
  int fn = 0;
  int ids = 0;
};

struct ClearMot {
  double mota = 0.0;
  double motp = 0.0;  // mean IoU of matched pairs
  int fp = 0;
  int fn = 0;
  int ids = 0;
  int matches = 0;
  int gt_total = 0;
  int hyp_total = 0;
  std::vector<ClearMotFrame> frames;
};

// Per frame: keep last frame's pairs that still overlap >= threshold, match
// the rest by maximum total IoU, then count FP, FN and identity switches.
ClearMot clear_mot(const std::vector<TrackRow>& gt, const std::vector<TrackRow>& hyp,
                   double iou_threshold = 0.5);

struct IdMetrics {
  double idf1 = 0.0;
  double idp = 0.0;
  double idr = 0.0;
  int idtp = 0;
  int idfp = 0;
  int idfn = 0;
};

// Global one-to-one identity mapping maximizing frames with IoU >= threshold.
IdMetrics id_metrics(const std::vector<TrackRow>& gt, const std::vector<TrackRow>& hyp,
                     double iou_threshold = 0.5);
inline double idf1(const std::vector<TrackRow>& gt, const std::vector<TrackRow>& hyp) {
  return id_metrics(gt, hyp).idf1;
}

struct SequenceScore {
  std::string name;
  ClearMot clear;
  IdMetrics id;
};

// Metric / value report; the last row aggregates counts over all sequences.
std::string format_metrics_table(const std::vector<SequenceScore>& scores);
std::string format_metrics_tsv(const std::vector<SequenceScore>& scores);
SequenceScore aggregate_scores(const std::vector<SequenceScore>& scores);

struct RatioCounts {
  double alpha = 0.0;
  long true_matches = 0;
  long false_matches = 0;
  long inconclusive = 0;
};

// Trajectories with fewer than two candidate edges are excluded from T/F/I
// and counted in `single_candidate`.
struct RatioAnalysisReport {
  RatioKind kind = RatioKind::Appearance;
  std::vector<RatioCounts> rows;
  long single_candidate = 0;
};

struct AnalysisConfig {
  int k_neighbors = 20;
  ReplayConfig replay;
};

// Runs the ratio test on every trajectory node of teacher-forced replays of
// the (gt-labeled) sequences, once per frame step.
RatioAnalysisReport ratio_analysis(std::span<const Sequence> sequences, RatioKind kind,
                                   const std::vector<double>& alphas, const AnalysisConfig& config);

// Columns alpha..., rows T / F / I for each report (one block per variant).
std::string format_ratio_table(const std::vector<RatioAnalysisReport>& reports);
std::string format_ratio_tsv(const std::vector<RatioAnalysisReport>& reports);

struct SparsityRow {
  std::string label;  // "dense", "iou", "app"
  RatioVariant variant;
  double candidate_edges = 0.0;  // mean per association step
  double kept_edges = 0.0;
  double milliseconds = 0.0;     // mean wall time per association step
  std::size_t steps = 0;
};

// Mean edge counts and association time (graph build, scoring, matching) per
// frame over teacher-forced replays, for each variant. Timing takes the
// fastest of `repeats` passes.
std::vector<SparsityRow> measure_sparsity(std::span<const Sequence> sequences,
                                          const std::vector<std::pair<std::string, RatioVariant>>& variants,
                                          const MpnModel& model, const AnalysisConfig& config,
                                          double tau = 0.5, int repeats = 3);
std::string format_sparsity_table(const std::vector<SparsityRow>& rows);
std::string format_sparsity_tsv(const std::vector<SparsityRow>& rows);

}  // namespace sparsetrack
