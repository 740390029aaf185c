#include "sparsetrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sparsetrack {

namespace fs = std::filesystem;

void SceneConfig::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  };
  prob(turn_probability, "turn_probability");
  prob(bounce_probability, "bounce_probability");
  prob(dropout, "dropout");
  prob(min_visible, "min_visible");
  if (!(clutter >= 0.0)) throw std::invalid_argument("clutter must be >= 0");
  if (!(box_noise >= 0.0) || !(feature_noise >= 0.0)) throw std::invalid_argument("noise must be >= 0");
  if (frames < 0 || targets < 0 || crossing_pairs < 0 || exits < 0) {
    throw std::invalid_argument("counts must be >= 0");
  }
  if (exits > targets) throw std::invalid_argument("exits cannot exceed the free target count");
  if (!(image.width > 0.0 && image.height > 0.0) || !(fps > 0.0)) {
    throw std::invalid_argument("image size and fps must be positive");
  }
  if (!(speed_min >= 0.0 && speed_max >= speed_min)) throw std::invalid_argument("bad speed range");
  if (!(height_min > 0.0 && height_max >= height_min) || !(aspect > 0.0)) {
    throw std::invalid_argument("bad box size range");
  }
  if (occlusion_min < 1 || occlusion_max < occlusion_min) throw std::invalid_argument("bad occlusion range");
  if (feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");
  if (!(margin >= 0.0)) throw std::invalid_argument("margin must be >= 0");
  if (height_max * aspect + 2.0 * margin >= image.width || height_max + 2.0 * margin >= image.height) {
    throw std::invalid_argument("boxes do not fit inside the image");
  }
}

namespace {

struct Agent {
  int id = 0;
  double cx = 0, cy = 0, vx = 0, vy = 0, w = 1, h = 1;
  double depth = 0;
  Feature anchor;
  bool exits = false;
  bool gone = false;
  bool seen = false;
  int partner = -1;  // index of the crossing partner
};

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

BoundingBox box_of(const Agent& a) {
  return BoundingBox{round3(a.cx - 0.5 * a.w), round3(a.cy - 0.5 * a.h), round3(a.w), round3(a.h)};
}

Feature random_unit(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Feature f(d);
  for (int i = 0; i < d; ++i) f[i] = static_cast<Scalar>(n(rng));
  return *normalized(f);
}

// Keeps a center inside [lo, hi] by mirroring at the walls.
void reflect(double& x, double& v, double lo, double hi) {
  if (hi <= lo) {
    x = 0.5 * (lo + hi);
    return;
  }
  for (int guard = 0; guard < 8 && (x < lo || x > hi); ++guard) {
    if (x < lo) x = 2.0 * lo - x;
    if (x > hi) x = 2.0 * hi - x;
    v = -v;
  }
  x = std::clamp(x, lo, hi);
}

}  // namespace

Sequence SceneOutput::sequence() const {
  std::vector<Detection> dets;
  dets.reserve(detections.size());
  for (std::size_t k = 0; k < detections.size(); ++k) {
    Detection d{detections[k].frame, detections[k].box, detections[k].confidence,
                features[k].feature, {}};
    if (detection_gt[k] >= 0) d.gt_id = detection_gt[k];
    dets.push_back(std::move(d));
  }
  return make_sequence(info.name, std::move(dets), info.image, info.fps, info.length);
}

SceneOutput generate(const SceneConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const double W = cfg.image.width, H = cfg.image.height;

  std::vector<Agent> agents;
  const int units = cfg.crossing_pairs + cfg.targets;
  const double lane_h = units > 0 ? H / units : H;
  if (cfg.lanes && lane_h < cfg.height_max * 1.1) {
    throw std::invalid_argument("lanes are too narrow for the box heights");
  }
  int lane = 0;
  auto lane_center = [&](int k) { return (k + 0.5) * lane_h; };
  auto x_bounds = [&](const Agent& a) {
    return std::pair{cfg.margin + 0.5 * a.w, W - cfg.margin - 0.5 * a.w};
  };
  auto y_bounds = [&](const Agent& a) {
    return std::pair{cfg.margin + 0.5 * a.h, H - cfg.margin - 0.5 * a.h};
  };
  auto new_agent = [&]() {
    Agent a;
    a.id = static_cast<int>(agents.size()) + 1;
    a.h = uniform(cfg.height_min, cfg.height_max);
    a.w = cfg.aspect * a.h;
    a.depth = unit(rng);
    a.anchor = random_unit(cfg.feature_dim, rng);
    return a;
  };

  for (int p = 0; p < cfg.crossing_pairs; ++p) {
    Agent a = new_agent();
    Agent b = new_agent();
    b.h = a.h * uniform(0.92, 1.08);
    b.w = cfg.aspect * b.h;
    const double cy = cfg.lanes ? lane_center(lane++) : uniform(y_bounds(a).first, y_bounds(a).second);
    a.cy = cy;
    b.cy = std::clamp(cy + uniform(-0.06, 0.06) * a.h, y_bounds(b).first, y_bounds(b).second);
    const int duration = std::uniform_int_distribution<int>(cfg.occlusion_min, cfg.occlusion_max)(rng);
    const Agent& rear = a.depth < b.depth ? a : b;
    const double span = 0.5 * (a.w + b.w) - (1.0 - cfg.min_visible) * rear.w;
    const double speed = std::max(0.1, span / duration);  // each side moves at half the closing speed
    const double px = 0.5 * W + uniform(-0.1, 0.1) * W;
    const double room = std::min(px - x_bounds(a).first, x_bounds(b).second - px);
    const int latest = static_cast<int>(std::floor(room / speed)) + 1;
    int tc = 0;
    if (cfg.crossing_frame) {
      tc = *cfg.crossing_frame;
      if (tc < 1 || tc > cfg.frames || tc > latest) {
        throw std::invalid_argument("infeasible occlusion script: pair " + std::to_string(p) +
                                    " cannot meet at frame " + std::to_string(tc));
      }
    } else {
      const int hi = std::min(cfg.frames / 2, latest);
      const int lo = std::min(std::max(2, cfg.frames / 6), hi);
      if (hi < 1) throw std::invalid_argument("infeasible occlusion script: crossing too fast");
      tc = std::uniform_int_distribution<int>(lo, hi)(rng);
    }
    a.vx = speed;
    b.vx = -speed;
    a.cx = px - speed * (tc - 1);
    b.cx = px + speed * (tc - 1);
    a.partner = static_cast<int>(agents.size()) + 1;
    b.partner = static_cast<int>(agents.size());
    b.id = a.id + 1;
    agents.push_back(a);
    agents.push_back(b);
  }
  for (int k = 0; k < cfg.targets; ++k) {
    Agent a = new_agent();
    a.exits = k < cfg.exits;
    a.cy = cfg.lanes ? lane_center(lane++) : uniform(y_bounds(a).first, y_bounds(a).second);
    const auto [xlo, xhi] = x_bounds(a);
    a.cx = uniform(xlo, xhi);
    const double speed = uniform(cfg.speed_min, cfg.speed_max);
    if (a.exits) {
      const int te = std::uniform_int_distribution<int>(std::max(2, cfg.frames * 3 / 10),
                                                        std::max(2, cfg.frames * 8 / 10))(rng);
      const bool left = a.cx < 0.5 * W;
      const double dist = left ? a.cx : W - a.cx;  // center leaves the image: half the box is out
      a.vx = (left ? -1.0 : 1.0) * std::max(0.2, dist / te);
      a.vy = 0.0;
    } else if (cfg.lanes) {
      a.vx = unit(rng) < 0.5 ? -speed : speed;
    } else {
      const double heading = uniform(0.0, 2.0 * std::numbers::pi);
      a.vx = speed * std::cos(heading);
      a.vy = speed * std::sin(heading);
    }
    agents.push_back(a);
  }

  SceneOutput out;
  out.info = {cfg.name, cfg.image, cfg.fps, cfg.frames};
  std::vector<double> prev_dx(agents.size(), 0.0);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].partner >= 0) prev_dx[i] = agents[i].cx - agents[static_cast<std::size_t>(agents[i].partner)].cx;
  }

  for (int t = 1; t <= cfg.frames; ++t) {
    if (t > 1) {
      for (auto& a : agents) {
        if (a.gone) continue;
        if (!cfg.lanes && !a.exits && a.partner < 0 && unit(rng) < cfg.turn_probability) {
          const double speed = std::hypot(a.vx, a.vy);
          const double heading = uniform(0.0, 2.0 * std::numbers::pi);
          a.vx = speed * std::cos(heading);
          a.vy = speed * std::sin(heading);
        }
        a.cx += a.vx;
        a.cy += a.vy;
        if (!a.exits) {
          const auto [xlo, xhi] = x_bounds(a);
          const auto [ylo, yhi] = y_bounds(a);
          reflect(a.cx, a.vx, xlo, xhi);
          reflect(a.cy, a.vy, ylo, yhi);
        }
      }
      for (std::size_t i = 0; i < agents.size(); ++i) {
        Agent& a = agents[i];
        if (a.partner < static_cast<int>(i)) continue;  // handle each pair once, from its first member
        Agent& b = agents[static_cast<std::size_t>(a.partner)];
        const double dx = a.cx - b.cx;
        const bool passed = (dx > 0) != (prev_dx[i] > 0) && dx != 0.0 && prev_dx[i] != 0.0;
        if (passed && unit(rng) < cfg.bounce_probability) {
          a.cx -= 2.0 * a.vx;
          b.cx -= 2.0 * b.vx;
          a.vx = -a.vx;
          b.vx = -b.vx;
          a.cx = std::clamp(a.cx, x_bounds(a).first, x_bounds(a).second);
          b.cx = std::clamp(b.cx, x_bounds(b).first, x_bounds(b).second);
        }
        prev_dx[i] = a.cx - b.cx;
      }
    }

    // targets present in this frame
    std::vector<std::size_t> present;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      Agent& a = agents[i];
      if (a.gone) continue;
      const double in_view = visible_fraction(box_of(a), cfg.image);
      if (in_view < 0.5) {
        if (a.exits && a.seen) a.gone = true;
        continue;
      }
      a.seen = true;
      present.push_back(i);
    }

    struct Pending {
      TrackRow row;
      Feature feature;
      int gt;
    };
    std::vector<Pending> dets;
    for (std::size_t i : present) {
      const Agent& a = agents[i];
      const BoundingBox box = box_of(a);
      double covered = 0.0, blend = 0.0;
      const Agent* occluder = nullptr;
      for (std::size_t j : present) {
        const Agent& o = agents[j];
        if (j == i || o.depth <= a.depth) continue;
        const BoundingBox ob = box_of(o);
        covered = std::max(covered, intersection_area(box, ob) / box.area());
        const double v = iou(box, ob);
        if (v > blend) {
          blend = v;
          occluder = &o;
        }
      }
      Feature f = a.anchor;
      for (int k = 0; k < cfg.feature_dim; ++k) f[k] += static_cast<Scalar>(cfg.feature_noise * gauss(rng));
      f = normalized(f).value_or(a.anchor);
      if (cfg.occlusion_blend && occluder) {
        const auto w = static_cast<Scalar>(blend);
        f = normalized((Scalar(1) - w) * f + w * occluder->anchor).value_or(f);
      }
      out.gt.push_back({t, a.id, box, 1.0});
      out.regions.push_back({t, a.id, box, f});
      const double drop = unit(rng);
      const double conf = uniform(0.6, 1.0);
      BoundingBox jittered{box.x + cfg.box_noise * gauss(rng), box.y + cfg.box_noise * gauss(rng),
                           box.w + cfg.box_noise * gauss(rng), box.h + cfg.box_noise * gauss(rng)};
      if (1.0 - covered < cfg.min_visible || drop < cfg.dropout) continue;
      if (cfg.box_noise == 0.0) jittered = box;
      jittered.w = std::max(1.0, jittered.w);
      jittered.h = std::max(1.0, jittered.h);
      jittered = {round3(jittered.x), round3(jittered.y), round3(jittered.w), round3(jittered.h)};
      dets.push_back({{t, -1, jittered, round3(conf)}, std::move(f), a.id});
    }
    if (cfg.clutter > 0.0 && !present.empty()) {
      std::poisson_distribution<int> count(cfg.clutter * static_cast<double>(present.size()));
      const int n = count(rng);
      for (int c = 0; c < n; ++c) {
        const double h = uniform(cfg.height_min, cfg.height_max);
        const double w = cfg.aspect * h;
        const BoundingBox box{round3(uniform(0.0, W - w)), round3(uniform(0.0, H - h)), round3(w), round3(h)};
        dets.push_back({{t, -1, box, round3(uniform(0.3, 0.7))}, random_unit(cfg.feature_dim, rng), -1});
      }
    }
    std::shuffle(dets.begin(), dets.end(), rng);
    for (std::size_t k = 0; k < dets.size(); ++k) {
      out.detections.push_back(dets[k].row);
      out.features.push_back({t, static_cast<int>(k), std::move(dets[k].feature)});
      out.detection_gt.push_back(dets[k].gt);
    }
  }
  return out;
}

std::vector<SceneConfig> standard_scenarios() {
  std::vector<SceneConfig> out;

  SceneConfig easy;
  easy.name = "easy";
  easy.targets = 5;
  easy.lanes = true;
  easy.box_noise = 0.5;
  out.push_back(easy);

  SceneConfig crossing;
  crossing.name = "crossing";
  crossing.targets = 0;
  crossing.crossing_pairs = 4;
  crossing.lanes = true;
  crossing.height_min = 80.0;
  crossing.height_max = 110.0;
  crossing.bounce_probability = 0.5;
  crossing.feature_noise = 0.1;
  out.push_back(crossing);

  SceneConfig crowded;
  crowded.name = "crowded";
  crowded.targets = 20;
  crowded.frames = 300;
  crowded.turn_probability = 0.02;
  crowded.clutter = 0.1;
  crowded.dropout = 0.1;
  crowded.height_min = 80.0;
  crowded.height_max = 130.0;
  crowded.box_noise = 0.5;
  out.push_back(crowded);

  SceneConfig exits;
  exits.name = "crossing-exits";
  exits.crossing_pairs = 2;
  exits.targets = 3;
  exits.exits = 3;
  exits.lanes = true;
  exits.height_min = 80.0;
  exits.height_max = 110.0;
  exits.dropout = 0.1;
  out.push_back(exits);
  return out;
}

SceneConfig scenario(const std::string& name, std::uint64_t seed) {
  for (auto cfg : standard_scenarios()) {
    if (cfg.name == name) {
      cfg.seed = seed;
      return cfg;
    }
  }
  throw std::invalid_argument("unknown preset '" + name + "' (easy|crossing|crowded|crossing-exits)");
}

void write_scene(const fs::path& dir, const SceneOutput& scene) {
  fs::create_directories(dir);
  std::ostringstream gt, det, feat, app, info;
  write_track_rows(gt, scene.gt);
  write_track_rows(det, scene.detections);
  write_feature_rows(feat, scene.features);
  write_appearance_rows(app, scene.regions);
  write_seqinfo(info, scene.info);
  write_file_atomic(dir / "gt.txt", gt.str());
  write_file_atomic(dir / "det.txt", det.str());
  write_file_atomic(dir / "features.txt", feat.str());
  write_file_atomic(dir / "appearance.txt", app.str());
  write_file_atomic(dir / "seqinfo.ini", info.str());
}

}  // namespace sparsetrack
