#include "sparsetrack/commands.hpp"

#include <sstream>
#include <stdexcept>

#include "sparsetrack/mot_io.hpp"
#include "sparsetrack/synth.hpp"

namespace sparsetrack {

namespace {

constexpr const char* kConfigEcho = "effective-config.json";

void refuse_existing(const std::vector<fs::path>& paths, bool force) {
  if (force) return;
  for (const auto& p : paths) {
    if (fs::exists(p)) {
      throw std::runtime_error(p.string() + " already exists (use --force to overwrite)");
    }
  }
}

std::string echo(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

fs::path sibling(const fs::path& file, const std::string& suffix) {
  return fs::path(file.string() + suffix);
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

MpnModel model_for(const RunConfig& config, const std::optional<fs::path>& checkpoint) {
  if (checkpoint) return load_checkpoint(*checkpoint).model;
  MpnDims dims = config.model;
  return MpnModel::init(dims, config.seed.value_or(0));
}

AnalysisConfig analysis_config(const RunConfig& config, const MpnModel* model) {
  AnalysisConfig a;
  a.k_neighbors = config.tracker.graph.k_neighbors;
  a.replay.integrator = {config.tracker.integration, model ? &model->lstm : nullptr};
  a.replay.kalman = config.tracker.kalman;
  a.replay.lost_frame_limit = config.tracker.lost_frame_limit;
  return a;
}

void write_reports(const std::optional<fs::path>& out_dir, bool force, const RunConfig* config,
                   const std::string& text, const std::string& tsv) {
  if (!out_dir) return;
  const auto txt_path = *out_dir / "report.txt";
  const auto tsv_path = *out_dir / "report.tsv";
  const auto cfg_path = *out_dir / kConfigEcho;
  refuse_existing({txt_path, tsv_path}, force);
  fs::create_directories(*out_dir);
  write_file_atomic(txt_path, text);
  write_file_atomic(tsv_path, tsv);
  if (config) write_file_atomic(cfg_path, echo(*config));
}

}  // namespace

Sequence load_scene(const fs::path& dir, const RunConfig& config, bool require_labels) {
  Sequence seq = load_sequence_dir(dir);
  if (!fs::exists(dir / "seqinfo.ini")) seq.fps = config.tracker.graph.fps;
  if (fs::exists(dir / "gt.txt")) {
    label_detections(seq, read_track_file(dir / "gt.txt"));
  } else if (require_labels) {
    throw std::runtime_error(dir.string() + " has no gt.txt; this command needs labeled data");
  }
  return seq;
}

void cmd_synth(const RunConfig& config, const fs::path& out_dir, bool force) {
  SceneConfig scene = config.scene;
  scene.seed = config.require_seed("synth");
  const std::vector<fs::path> outputs = {out_dir / "gt.txt", out_dir / "det.txt",
                                         out_dir / "features.txt", out_dir / "appearance.txt",
                                         out_dir / "seqinfo.ini", out_dir / kConfigEcho};
  refuse_existing(outputs, force);
  const SceneOutput out = generate(scene);
  write_scene(out_dir, out);
  write_file_atomic(out_dir / kConfigEcho, echo(config));
}

std::vector<EpochStats> cmd_train(const RunConfig& config, const std::vector<fs::path>& data_dirs,
                                  const fs::path& out_checkpoint,
                                  const std::optional<fs::path>& resume, bool force) {
  const std::uint64_t seed = config.require_seed("train");
  const auto loss_path = sibling(out_checkpoint, ".loss.tsv");
  const auto cfg_path = sibling(out_checkpoint, ".config.json");
  refuse_existing({out_checkpoint, loss_path, cfg_path}, force);
  if (data_dirs.empty() && config.train.epochs > 0) throw std::invalid_argument("train needs --data");

  std::vector<Sequence> sequences;
  for (const auto& d : data_dirs) sequences.push_back(load_scene(d, config, true));

  Checkpoint ckpt;
  if (resume) {
    ckpt = load_checkpoint(*resume);
  } else {
    ckpt.model = MpnModel::init(config.model, seed);
  }
  for (const auto& s : sequences) {
    for (const auto& f : s.frames) {
      for (const auto& d : f) {
        if (d.feature.size() != ckpt.model.dims.feature_dim) {
          throw std::invalid_argument("feature dimension " + std::to_string(d.feature.size()) +
                                      " in " + s.name + " does not match model.feature_dim " +
                                      std::to_string(ckpt.model.dims.feature_dim));
        }
      }
    }
  }
  TrainConfig train = config.train;
  train.seed = seed;
  const auto stats = train_model(sequences, train, config.tracker, ckpt);
  ensure_parent(out_checkpoint);
  save_checkpoint(out_checkpoint, ckpt);
  write_file_atomic(loss_path, format_epoch_table(stats));
  write_file_atomic(cfg_path, echo(config));
  return stats;
}

TrackSummary cmd_track(const RunConfig& config, const fs::path& data_dir,
                       const std::optional<fs::path>& checkpoint, const fs::path& out_file,
                       bool force) {
  const auto cfg_path = sibling(out_file, ".config.json");
  refuse_existing({out_file, cfg_path}, force);
  if (!checkpoint && config.tracker.scoring == EdgeScoring::Mpn) {
    throw std::invalid_argument("track needs --checkpoint unless scoring is iou");
  }
  const Sequence seq = load_scene(data_dir, config, false);
  const MpnModel model = model_for(config, checkpoint);
  TrackerConfig tc = config.tracker;
  tc.graph.fps = seq.fps;
  std::optional<RegionAppearanceSource> appearance;
  if (fs::exists(data_dir / "appearance.txt")) {
    appearance.emplace(read_appearance_file(data_dir / "appearance.txt"));
  }
  Tracker tracker(model, tc, seq.image, appearance ? &*appearance : nullptr);
  std::vector<TrackRow> rows;
  for (int t = 1; t <= seq.length(); ++t) {
    const auto dets = seq.at(t);
    auto out = tracker.step(t, std::vector<Detection>(dets.begin(), dets.end()));
    rows.insert(rows.end(), out.begin(), out.end());
  }
  ensure_parent(out_file);
  write_file_atomic(out_file, format_track_rows(rows));
  write_file_atomic(cfg_path, echo(config));
  return {rows.size(), tracker.appearance_gate_skipped()};
}

std::vector<SequenceScore> cmd_eval(const std::vector<fs::path>& gt_files,
                                    const std::vector<fs::path>& hyp_files,
                                    const std::optional<fs::path>& out_dir, bool force) {
  if (gt_files.size() != hyp_files.size() || gt_files.empty()) {
    throw std::invalid_argument("eval needs the same number of gt and hypothesis files");
  }
  std::vector<SequenceScore> scores;
  for (std::size_t k = 0; k < gt_files.size(); ++k) {
    const auto gt = read_track_file(gt_files[k]);
    const auto hyp = read_track_file(hyp_files[k]);
    std::string name = hyp_files[k].parent_path().filename().string();
    if (name.empty() || gt_files.size() == 1) name = hyp_files[k].stem().string();
    scores.push_back({name, clear_mot(gt, hyp), id_metrics(gt, hyp)});
  }
  write_reports(out_dir, force, nullptr, format_metrics_table(scores), format_metrics_tsv(scores));
  return scores;
}

std::vector<RatioAnalysisReport> cmd_ratio(const RunConfig& config,
                                           const std::vector<fs::path>& data_dirs,
                                           const std::vector<RatioKind>& kinds,
                                           const std::vector<double>& alphas,
                                           const std::optional<fs::path>& out_dir, bool force) {
  if (data_dirs.empty()) throw std::invalid_argument("ratio needs --data");
  std::vector<Sequence> sequences;
  for (const auto& d : data_dirs) sequences.push_back(load_scene(d, config, true));
  const auto analysis = analysis_config(config, nullptr);
  if (config.tracker.integration == IntegrationMode::Lstm) {
    throw std::invalid_argument("ratio analysis replays trajectories without a model; use none|average|iou");
  }
  std::vector<RatioAnalysisReport> reports;
  for (RatioKind k : kinds) reports.push_back(ratio_analysis(sequences, k, alphas, analysis));
  write_reports(out_dir, force, &config, format_ratio_table(reports), format_ratio_tsv(reports));
  return reports;
}

std::vector<SparsityRow> cmd_sparsity(const RunConfig& config,
                                      const std::vector<fs::path>& data_dirs,
                                      const std::optional<fs::path>& checkpoint,
                                      const std::optional<fs::path>& out_dir, bool force) {
  if (data_dirs.empty()) throw std::invalid_argument("sparsity needs --data");
  std::vector<Sequence> sequences;
  for (const auto& d : data_dirs) sequences.push_back(load_scene(d, config, false));
  const MpnModel model = model_for(config, checkpoint);
  std::vector<std::pair<std::string, RatioVariant>> variants = {
      {"dense", {RatioKind::None, 0.3}},
      {"iou", {RatioKind::Iou, RatioVariant::default_alpha(RatioKind::Iou)}},
      {"app", {RatioKind::Appearance, RatioVariant::default_alpha(RatioKind::Appearance)}}};
  const auto& chosen = config.tracker.graph.ratio;
  if (chosen.kind == RatioKind::Iou) variants[1].second = chosen;
  if (chosen.kind == RatioKind::Appearance) variants[2].second = chosen;
  const auto rows = measure_sparsity(sequences, variants, model, analysis_config(config, &model),
                                     config.tracker.tau);
  write_reports(out_dir, force, &config, format_sparsity_table(rows), format_sparsity_tsv(rows));
  return rows;
}

}  // namespace sparsetrack
