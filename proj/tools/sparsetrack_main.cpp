#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "sparsetrack/commands.hpp"

using namespace sparsetrack;

namespace {

// Flags shared by every subcommand that reads a RunConfig.
struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<double> tau;
  std::optional<int> k;
  std::string ratio;
  std::string integration;
  std::optional<int> layers;
  std::optional<int> epochs;
  std::string preset;
  std::string assignment;
  std::string scoring;
  bool no_forecast = false;
  bool no_constraints = false;
  bool force = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "random seed");
    app->add_option("--alpha", alpha, "ratio test parameter in (0,1)");
    app->add_option("--tau", tau, "edge score threshold in (0,1)");
    app->add_option("--k", k, "candidate trajectories per detection");
    app->add_option("--ratio", ratio, "ratio test variant: none|iou|app");
    app->add_option("--integration", integration, "feature integration: none|lstm|average|iou");
    app->add_option("--layers", layers, "message passing rounds");
    app->add_option("--epochs", epochs, "training epochs");
    app->add_option("--preset", preset, "scene preset: easy|crossing|crowded|crossing-exits");
    app->add_option("--assignment", assignment, "greedy|optimal");
    app->add_option("--scoring", scoring, "edge scores from the network (mpn) or box overlap (iou)");
    app->add_flag("--no-forecast", no_forecast, "do not emit boxes for lost trajectories");
    app->add_flag("--no-constraints", no_constraints, "forecast lost trajectories without gates");
    app->add_flag("--force", force, "overwrite existing outputs");
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : load_run_config(config, preset);
    if (seed) c.seed = seed;
    if (!preset.empty() && config.empty()) select_preset(c, preset);
    if (c.seed) c.scene.seed = *c.seed;
    auto& t = c.tracker;
    if (!ratio.empty()) {
      t.graph.ratio.kind = parse_ratio_kind(ratio);
      t.graph.ratio.alpha = RatioVariant::default_alpha(t.graph.ratio.kind);
    }
    if (alpha) t.graph.ratio.alpha = *alpha;
    if (tau) t.tau = *tau;
    if (k) t.graph.k_neighbors = *k;
    if (!integration.empty()) t.integration = parse_integration_mode(integration);
    if (!assignment.empty()) t.assignment = parse_assignment_mode(assignment);
    if (!scoring.empty()) t.scoring = parse_edge_scoring(scoring);
    if (no_forecast) t.forecast = false;
    if (no_constraints) t.forecasting.constrained = false;
    if (layers) c.model.layers = *layers;
    if (epochs) c.train.epochs = *epochs;
    t.validate();
    c.train.validate();
    return c;
  }
};

std::vector<double> parse_alphas(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw std::invalid_argument("empty alpha list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-graph multi-object tracker: synth, train, track, eval, ratio, sparsity"};
  app.require_subcommand(1);

  CommonFlags synth_flags, train_flags, track_flags, ratio_flags, sparsity_flags;
  std::string out, checkpoint, resume, gt_dir_flag;
  std::vector<std::string> data, gts, hyps;
  std::string alphas = "0.2,0.3,0.4,0.5,0.6";
  std::string variants = "iou,app";

  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  synth_flags.attach(synth);
  synth->add_option("--out", out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train the edge classifier");
  train_flags.attach(train);
  train->add_option("--data", data, "labeled scene directories")->required();
  train->add_option("--out", out, "checkpoint path")->required();
  train->add_option("--resume", resume, "continue from this checkpoint");

  auto* track = app.add_subcommand("track", "track one scene directory");
  track_flags.attach(track);
  track->add_option("--data", data, "scene directory (det.txt, features.txt)")->required()->expected(1);
  track->add_option("--checkpoint", checkpoint, "trained model");
  track->add_option("--out", out, "output track file")->required();

  bool eval_force = false;
  auto* eval = app.add_subcommand("eval", "CLEAR-MOT and IDF1 against ground truth");
  eval->add_option("--gt", gts, "gt files")->required();
  eval->add_option("--hyp", hyps, "hypothesis files, same order as --gt")->required();
  eval->add_option("--out", out, "report directory");
  eval->add_flag("--force", eval_force, "overwrite existing reports");

  auto* ratio = app.add_subcommand("ratio", "true / false / inconclusive ratio-test counts");
  ratio_flags.attach(ratio);
  ratio->add_option("--data", data, "labeled scene directories")->required();
  ratio->add_option("--alphas", alphas, "comma separated alpha grid");
  ratio->add_option("--variants", variants, "comma separated: iou,app");
  ratio->add_option("--out", out, "report directory");

  auto* sparsity = app.add_subcommand("sparsity", "edge counts and association time");
  sparsity_flags.attach(sparsity);
  sparsity->add_option("--data", data, "scene directories")->required();
  sparsity->add_option("--checkpoint", checkpoint, "trained model (default: seeded init)");
  sparsity->add_option("--out", out, "report directory");

  CLI11_PARSE(app, argc, argv);

  auto opt_path = [](const std::string& s) -> std::optional<fs::path> {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
  };
  auto paths = [](const std::vector<std::string>& v) {
    return std::vector<fs::path>(v.begin(), v.end());
  };

  try {
    if (synth->parsed()) {
      const RunConfig c = synth_flags.resolve();
      cmd_synth(c, out, synth_flags.force);
      std::cout << "wrote scene '" << c.scene.name << "' (seed " << *c.seed << ") to " << out << "\n";
    } else if (train->parsed()) {
      const RunConfig c = train_flags.resolve();
      const auto stats = cmd_train(c, paths(data), out, opt_path(resume), train_flags.force);
      std::cout << format_epoch_table(stats) << "wrote " << out << "\n";
    } else if (track->parsed()) {
      const RunConfig c = track_flags.resolve();
      const auto summary = cmd_track(c, data.front(), opt_path(checkpoint), out, track_flags.force);
      if (summary.appearance_gate_skipped > 0) {
        std::cerr << "note: appearance gate skipped " << summary.appearance_gate_skipped
                  << " times (no appearance available at the forecast box)\n";
      }
      std::cout << "wrote " << summary.rows << " rows to " << out << "\n";
    } else if (eval->parsed()) {
      const auto scores = cmd_eval(paths(gts), paths(hyps), opt_path(out), eval_force);
      std::cout << format_metrics_table(scores);
    } else if (ratio->parsed()) {
      const RunConfig c = ratio_flags.resolve();
      std::vector<RatioKind> kinds;
      std::stringstream in(variants);
      std::string item;
      while (std::getline(in, item, ',')) kinds.push_back(parse_ratio_kind(item));
      const auto reports = cmd_ratio(c, paths(data), kinds, parse_alphas(alphas), opt_path(out),
                                     ratio_flags.force);
      std::cout << format_ratio_table(reports);
    } else if (sparsity->parsed()) {
      const RunConfig c = sparsity_flags.resolve();
      const auto rows = cmd_sparsity(c, paths(data), opt_path(checkpoint), opt_path(out),
                                     sparsity_flags.force);
      std::cout << format_sparsity_table(rows);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
