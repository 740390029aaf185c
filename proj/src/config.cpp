#include "sparsetrack/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace sparsetrack {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& section, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw std::invalid_argument("config section '" + section + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw std::invalid_argument("unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument(std::string("config key '") + key + "' has the wrong type");
    }
  }
}

template <typename T, typename Parse>
void read_enum(const json& obj, const char* key, T& out, Parse parse) {
  std::string text;
  read(obj, key, text);
  if (!text.empty()) out = parse(text);
}

void apply_scene(const json& s, SceneConfig& c) {
  check_keys(s, "scene", {"name", "width", "height", "fps", "frames", "targets", "speed_min",
                          "speed_max", "turn_probability", "height_min", "height_max", "aspect",
                          "lanes", "margin", "crossing_pairs", "occlusion_min", "occlusion_max",
                          "crossing_frame", "bounce_probability", "exits", "box_noise", "dropout",
                          "clutter", "min_visible", "feature_dim", "feature_noise",
                          "occlusion_blend"});
  read(s, "name", c.name);
  read(s, "width", c.image.width);
  read(s, "height", c.image.height);
  read(s, "fps", c.fps);
  read(s, "frames", c.frames);
  read(s, "targets", c.targets);
  read(s, "speed_min", c.speed_min);
  read(s, "speed_max", c.speed_max);
  read(s, "turn_probability", c.turn_probability);
  read(s, "height_min", c.height_min);
  read(s, "height_max", c.height_max);
  read(s, "aspect", c.aspect);
  read(s, "lanes", c.lanes);
  read(s, "margin", c.margin);
  read(s, "crossing_pairs", c.crossing_pairs);
  read(s, "occlusion_min", c.occlusion_min);
  read(s, "occlusion_max", c.occlusion_max);
  if (s.contains("crossing_frame")) {
    if (s["crossing_frame"].is_null()) c.crossing_frame.reset();
    else c.crossing_frame = s["crossing_frame"].get<int>();
  }
  read(s, "bounce_probability", c.bounce_probability);
  read(s, "exits", c.exits);
  read(s, "box_noise", c.box_noise);
  read(s, "dropout", c.dropout);
  read(s, "clutter", c.clutter);
  read(s, "min_visible", c.min_visible);
  read(s, "feature_dim", c.feature_dim);
  read(s, "feature_noise", c.feature_noise);
  read(s, "occlusion_blend", c.occlusion_blend);
}

json scene_json(const SceneConfig& c) {
  json s = {{"name", c.name}, {"width", c.image.width}, {"height", c.image.height}, {"fps", c.fps},
            {"frames", c.frames}, {"targets", c.targets}, {"speed_min", c.speed_min},
            {"speed_max", c.speed_max}, {"turn_probability", c.turn_probability},
            {"height_min", c.height_min}, {"height_max", c.height_max}, {"aspect", c.aspect},
            {"lanes", c.lanes}, {"margin", c.margin}, {"crossing_pairs", c.crossing_pairs},
            {"occlusion_min", c.occlusion_min}, {"occlusion_max", c.occlusion_max},
            {"bounce_probability", c.bounce_probability}, {"exits", c.exits},
            {"box_noise", c.box_noise}, {"dropout", c.dropout}, {"clutter", c.clutter},
            {"min_visible", c.min_visible}, {"feature_dim", c.feature_dim},
            {"feature_noise", c.feature_noise}, {"occlusion_blend", c.occlusion_blend}};
  s["crossing_frame"] = c.crossing_frame ? json(*c.crossing_frame) : json(nullptr);
  return s;
}

}  // namespace

std::uint64_t RunConfig::require_seed(const std::string& command) const {
  if (!seed) throw std::invalid_argument(command + " needs a seed (--seed or config key 'seed')");
  return *seed;
}

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  check_keys(j, "", {"seed", "tracker", "train", "scene", "model", "preset"});
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("preset")) select_preset(c, j["preset"].get<std::string>());

  if (j.contains("tracker")) {
    const auto& t = j["tracker"];
    check_keys(t, "tracker", {"tau", "k_neighbors", "ratio_variant", "alpha", "fps", "integration",
                              "assignment", "scoring", "lost_frame_limit", "spawn_confidence",
                              "forecast", "forecast_constraints", "forecast_min_hits", "theta_app",
                              "min_visible_fraction", "verifier"});
    auto& tc = c.tracker;
    read(t, "tau", tc.tau);
    read(t, "k_neighbors", tc.graph.k_neighbors);
    read_enum(t, "ratio_variant", tc.graph.ratio.kind, parse_ratio_kind);
    if (t.contains("ratio_variant") && !t.contains("alpha")) {
      tc.graph.ratio.alpha = RatioVariant::default_alpha(tc.graph.ratio.kind);
    }
    read(t, "alpha", tc.graph.ratio.alpha);
    read(t, "fps", tc.graph.fps);
    read_enum(t, "integration", tc.integration, parse_integration_mode);
    read_enum(t, "assignment", tc.assignment, parse_assignment_mode);
    read_enum(t, "scoring", tc.scoring, parse_edge_scoring);
    read(t, "lost_frame_limit", tc.lost_frame_limit);
    read(t, "spawn_confidence", tc.spawn_confidence);
    read(t, "forecast", tc.forecast);
    read(t, "forecast_constraints", tc.forecasting.constrained);
    read(t, "forecast_min_hits", tc.forecast_min_hits);
    read(t, "theta_app", tc.forecasting.theta_app);
    read(t, "min_visible_fraction", tc.forecasting.min_visible_fraction);
    read_enum(t, "verifier", tc.forecasting.verifier, parse_verifier_kind);
    tc.validate();
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    check_keys(t, "train", {"batch_graphs", "frames_per_graph", "sampling_fps_static",
                            "sampling_fps_moving", "epochs", "learning_rate", "lr_decay_every",
                            "lr_decay", "positive_weight", "max_graphs_per_epoch", "node_dropout",
                            "box_jitter"});
    auto& tc = c.train;
    read(t, "batch_graphs", tc.batch_graphs);
    read(t, "frames_per_graph", tc.frames_per_graph);
    read(t, "sampling_fps_static", tc.sampling_fps_static);
    read(t, "sampling_fps_moving", tc.sampling_fps_moving);
    read(t, "epochs", tc.epochs);
    read(t, "learning_rate", tc.learning_rate);
    read(t, "lr_decay_every", tc.lr_decay_every);
    read(t, "lr_decay", tc.lr_decay);
    if (t.contains("positive_weight")) {
      if (t["positive_weight"].is_null()) tc.positive_weight.reset();
      else tc.positive_weight = t["positive_weight"].get<double>();
    }
    read(t, "max_graphs_per_epoch", tc.max_graphs_per_epoch);
    read(t, "node_dropout", tc.augment.node_dropout);
    read(t, "box_jitter", tc.augment.box_jitter);
    tc.validate();
  }
  if (j.contains("scene")) {
    apply_scene(j["scene"], c.scene);
    c.scene.validate();
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    check_keys(m, "model", {"feature_dim", "node_dim", "edge_dim", "hidden_dim",
                            "classifier_hidden", "layers", "aggregation"});
    read(m, "feature_dim", c.model.feature_dim);
    read(m, "node_dim", c.model.node_dim);
    read(m, "edge_dim", c.model.edge_dim);
    read(m, "hidden_dim", c.model.hidden_dim);
    read(m, "classifier_hidden", c.model.classifier_hidden);
    read(m, "layers", c.model.layers);
    read_enum(m, "aggregation", c.model.aggregation, parse_aggregation);
    if (c.model.layers < 0) throw std::invalid_argument("model.layers must be >= 0");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::string& preset) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  // preset first, so the file's scene section still overrides it
  if (!preset.empty() && j.is_object()) j["preset"] = preset;
  return parse_run_config(j);
}

void select_preset(RunConfig& config, const std::string& preset) {
  config.preset = preset;
  config.scene = scenario(preset, config.seed.value_or(1));
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  if (!c.preset.empty()) j["preset"] = c.preset;
  const auto& t = c.tracker;
  j["tracker"] = {{"tau", t.tau},
                  {"k_neighbors", t.graph.k_neighbors},
                  {"ratio_variant", to_string(t.graph.ratio.kind)},
                  {"alpha", t.graph.ratio.alpha},
                  {"fps", t.graph.fps},
                  {"integration", to_string(t.integration)},
                  {"assignment", to_string(t.assignment)},
                  {"scoring", to_string(t.scoring)},
                  {"lost_frame_limit", t.lost_frame_limit},
                  {"spawn_confidence", t.spawn_confidence},
                  {"forecast", t.forecast},
                  {"forecast_constraints", t.forecasting.constrained},
                  {"forecast_min_hits", t.forecast_min_hits},
                  {"theta_app", t.forecasting.theta_app},
                  {"min_visible_fraction", t.forecasting.min_visible_fraction},
                  {"verifier", to_string(t.forecasting.verifier)}};
  const auto& r = c.train;
  j["train"] = {{"batch_graphs", r.batch_graphs},
                {"frames_per_graph", r.frames_per_graph},
                {"sampling_fps_static", r.sampling_fps_static},
                {"sampling_fps_moving", r.sampling_fps_moving},
                {"epochs", r.epochs},
                {"learning_rate", r.learning_rate},
                {"lr_decay_every", r.lr_decay_every},
                {"lr_decay", r.lr_decay},
                {"max_graphs_per_epoch", r.max_graphs_per_epoch},
                {"node_dropout", r.augment.node_dropout},
                {"box_jitter", r.augment.box_jitter}};
  j["train"]["positive_weight"] = r.positive_weight ? json(*r.positive_weight) : json(nullptr);
  j["scene"] = scene_json(c.scene);
  j["model"] = {{"feature_dim", c.model.feature_dim}, {"node_dim", c.model.node_dim},
                {"edge_dim", c.model.edge_dim},       {"hidden_dim", c.model.hidden_dim},
                {"classifier_hidden", c.model.classifier_hidden}, {"layers", c.model.layers},
                {"aggregation", to_string(c.model.aggregation)}};
  return j;
}

}  // namespace sparsetrack
