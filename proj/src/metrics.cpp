#include "sparsetrack/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sparsetrack/assignment.hpp"

namespace sparsetrack {

namespace {

using FrameRows = std::map<int, std::vector<const TrackRow*>>;

FrameRows by_frame(const std::vector<TrackRow>& rows, const char* what) {
  FrameRows out;
  for (const auto& r : rows) out[r.frame].push_back(&r);
  for (auto& [frame, list] : out) {
    std::sort(list.begin(), list.end(), [](const TrackRow* a, const TrackRow* b) { return a->id < b->id; });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i]->id == list[i - 1]->id) {
        throw std::invalid_argument(std::string(what) + " id " + std::to_string(list[i]->id) +
                                    " appears twice in frame " + std::to_string(frame));
      }
    }
  }
  return out;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

}  // namespace

ClearMot clear_mot(const std::vector<TrackRow>& gt, const std::vector<TrackRow>& hyp,
                   double iou_threshold) {
  const FrameRows gt_frames = by_frame(gt, "gt");
  const FrameRows hyp_frames = by_frame(hyp, "hypothesis");
  std::set<int> frames;
  for (const auto& [f, _] : gt_frames) frames.insert(f);
  for (const auto& [f, _] : hyp_frames) frames.insert(f);

  ClearMot out;
  std::map<int, int> previous;  // gt id -> hypothesis id of its last match
  std::map<int, int> current;   // pairs matched in the previous frame
  double iou_sum = 0.0;
  static const std::vector<const TrackRow*> kNone;
  for (int frame : frames) {
    auto git = gt_frames.find(frame);
    auto hit = hyp_frames.find(frame);
    const auto& g = git == gt_frames.end() ? kNone : git->second;
    const auto& h = hit == hyp_frames.end() ? kNone : hit->second;
    std::vector<int> g_match(g.size(), -1);
    std::vector<char> h_taken(h.size(), 0);

    for (std::size_t i = 0; i < g.size(); ++i) {
      auto p = current.find(g[i]->id);
      if (p == current.end()) continue;
      for (std::size_t j = 0; j < h.size(); ++j) {
        if (!h_taken[j] && h[j]->id == p->second && iou(g[i]->box, h[j]->box) >= iou_threshold) {
          g_match[i] = static_cast<int>(j);
          h_taken[j] = 1;
        }
      }
    }
    std::vector<std::size_t> free_g, free_h;
    for (std::size_t i = 0; i < g.size(); ++i) if (g_match[i] < 0) free_g.push_back(i);
    for (std::size_t j = 0; j < h.size(); ++j) if (!h_taken[j]) free_h.push_back(j);
    if (!free_g.empty() && !free_h.empty()) {
      Eigen::MatrixXd cost(static_cast<Eigen::Index>(free_g.size()), static_cast<Eigen::Index>(free_h.size()));
      for (std::size_t a = 0; a < free_g.size(); ++a) {
        for (std::size_t b = 0; b < free_h.size(); ++b) {
          const double v = iou(g[free_g[a]]->box, h[free_h[b]]->box);
          cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v >= iou_threshold ? -v : 0.0;
        }
      }
      const auto assign = solve_assignment(cost);
      for (std::size_t a = 0; a < free_g.size(); ++a) {
        const int b = assign[a];
        if (b < 0 || cost(static_cast<Eigen::Index>(a), b) == 0.0) continue;
        g_match[free_g[a]] = static_cast<int>(free_h[static_cast<std::size_t>(b)]);
        h_taken[free_h[static_cast<std::size_t>(b)]] = 1;
      }
    }

    ClearMotFrame fr;
    fr.frame = frame;
    fr.gt = static_cast<int>(g.size());
    current.clear();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g_match[i] < 0) {
        ++fr.fn;
        continue;
      }
      const TrackRow& hr = *h[static_cast<std::size_t>(g_match[i])];
      ++fr.matches;
      iou_sum += iou(g[i]->box, hr.box);
      auto prev = previous.find(g[i]->id);
      if (prev != previous.end() && prev->second != hr.id) ++fr.ids;
      previous[g[i]->id] = hr.id;
      current[g[i]->id] = hr.id;
    }
    fr.fp = static_cast<int>(h.size()) - fr.matches;
    out.fp += fr.fp;
    out.fn += fr.fn;
    out.ids += fr.ids;
    out.matches += fr.matches;
    out.gt_total += fr.gt;
    out.hyp_total += static_cast<int>(h.size());
    out.frames.push_back(fr);
  }
  out.mota = out.gt_total > 0
                 ? 1.0 - static_cast<double>(out.fp + out.fn + out.ids) / out.gt_total
                 : (out.fp == 0 ? 1.0 : -std::numeric_limits<double>::infinity());
  out.motp = out.matches > 0 ? iou_sum / out.matches : 0.0;
  return out;
}

IdMetrics id_metrics(const std::vector<TrackRow>& gt, const std::vector<TrackRow>& hyp,
                     double iou_threshold) {
  const FrameRows gt_frames = by_frame(gt, "gt");
  const FrameRows hyp_frames = by_frame(hyp, "hypothesis");
  std::map<int, int> gt_index, hyp_index;
  for (const auto& r : gt) gt_index.emplace(r.id, 0);
  for (const auto& r : hyp) hyp_index.emplace(r.id, 0);
  int n = 0;
  for (auto& [id, idx] : gt_index) idx = n++;
  n = 0;
  for (auto& [id, idx] : hyp_index) idx = n++;

  IdMetrics out;
  if (!gt_index.empty() && !hyp_index.empty()) {
    Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gt_index.size()),
                                                    static_cast<Eigen::Index>(hyp_index.size()));
    for (const auto& [frame, g] : gt_frames) {
      auto hit = hyp_frames.find(frame);
      if (hit == hyp_frames.end()) continue;
      for (const auto* gr : g) {
        for (const auto* hr : hit->second) {
          if (iou(gr->box, hr->box) >= iou_threshold) overlap(gt_index[gr->id], hyp_index[hr->id]) += 1.0;
        }
      }
    }
    const auto assign = solve_assignment(-overlap);
    for (Eigen::Index i = 0; i < overlap.rows(); ++i) {
      if (assign[static_cast<std::size_t>(i)] >= 0) {
        out.idtp += static_cast<int>(overlap(i, assign[static_cast<std::size_t>(i)]));
      }
    }
  }
  out.idfn = static_cast<int>(gt.size()) - out.idtp;
  out.idfp = static_cast<int>(hyp.size()) - out.idtp;
  const int denom = 2 * out.idtp + out.idfp + out.idfn;
  out.idf1 = denom > 0 ? 2.0 * out.idtp / denom : 1.0;
  out.idp = hyp.empty() ? 0.0 : static_cast<double>(out.idtp) / static_cast<double>(hyp.size());
  out.idr = gt.empty() ? 0.0 : static_cast<double>(out.idtp) / static_cast<double>(gt.size());
  return out;
}

SequenceScore aggregate_scores(const std::vector<SequenceScore>& scores) {
  SequenceScore all;
  all.name = "OVERALL";
  for (const auto& s : scores) {
    all.clear.fp += s.clear.fp;
    all.clear.fn += s.clear.fn;
    all.clear.ids += s.clear.ids;
    all.clear.matches += s.clear.matches;
    all.clear.gt_total += s.clear.gt_total;
    all.clear.hyp_total += s.clear.hyp_total;
    all.clear.motp += s.clear.motp * s.clear.matches;
    all.id.idtp += s.id.idtp;
    all.id.idfp += s.id.idfp;
    all.id.idfn += s.id.idfn;
  }
  auto& c = all.clear;
  c.mota = c.gt_total > 0 ? 1.0 - static_cast<double>(c.fp + c.fn + c.ids) / c.gt_total : 1.0;
  c.motp = c.matches > 0 ? c.motp / c.matches : 0.0;
  auto& id = all.id;
  const int denom = 2 * id.idtp + id.idfp + id.idfn;
  id.idf1 = denom > 0 ? 2.0 * id.idtp / denom : 1.0;
  id.idp = id.idtp + id.idfp > 0 ? static_cast<double>(id.idtp) / (id.idtp + id.idfp) : 0.0;
  id.idr = id.idtp + id.idfn > 0 ? static_cast<double>(id.idtp) / (id.idtp + id.idfn) : 0.0;
  return all;
}

std::string format_metrics_table(const std::vector<SequenceScore>& scores) {
  std::vector<SequenceScore> rows = scores;
  if (scores.size() > 1) rows.push_back(aggregate_scores(scores));
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %8s %8s %8s %8s %8s %8s %8s\n", "sequence", "MOTA", "IDF1",
                "MOTP", "FP", "FN", "IDS", "GT");
  out << buf;
  for (const auto& s : rows) {
    std::snprintf(buf, sizeof buf, "%-16s %8.4f %8.4f %8.4f %8d %8d %8d %8d\n", s.name.c_str(),
                  s.clear.mota, s.id.idf1, s.clear.motp, s.clear.fp, s.clear.fn, s.clear.ids,
                  s.clear.gt_total);
    out << buf;
  }
  return out.str();
}

std::string format_metrics_tsv(const std::vector<SequenceScore>& scores) {
  std::vector<SequenceScore> rows = scores;
  if (scores.size() > 1) rows.push_back(aggregate_scores(scores));
  std::ostringstream out;
  out << "sequence\tmetric\tvalue\n";
  for (const auto& s : rows) {
    out << s.name << "\tMOTA\t" << fmt("%.6f", s.clear.mota) << '\n'
        << s.name << "\tIDF1\t" << fmt("%.6f", s.id.idf1) << '\n'
        << s.name << "\tMOTP\t" << fmt("%.6f", s.clear.motp) << '\n'
        << s.name << "\tFP\t" << s.clear.fp << '\n'
        << s.name << "\tFN\t" << s.clear.fn << '\n'
        << s.name << "\tIDS\t" << s.clear.ids << '\n'
        << s.name << "\tIDTP\t" << s.id.idtp << '\n'
        << s.name << "\tIDFP\t" << s.id.idfp << '\n'
        << s.name << "\tIDFN\t" << s.id.idfn << '\n'
        << s.name << "\tGT\t" << s.clear.gt_total << '\n';
  }
  return out.str();
}

RatioAnalysisReport ratio_analysis(std::span<const Sequence> sequences, RatioKind kind,
                                   const std::vector<double>& alphas, const AnalysisConfig& config) {
  if (kind == RatioKind::None) throw std::invalid_argument("ratio analysis needs the iou or app variant");
  RatioAnalysisReport report;
  report.kind = kind;
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    report.rows.push_back({a, 0, 0, 0});
  }
  for (const auto& seq : sequences) {
    TeacherForcedReplay replay(config.replay);
    for (int t = 1; t <= seq.length(); ++t) {
      const auto dets = seq.at(t);
      const auto nodes = replay.nodes_for(t);
      if (!nodes.empty() && !dets.empty()) {
        const auto edges = candidate_edges(nodes, dets, config.k_neighbors);
        std::vector<std::vector<std::pair<double, int>>> per_track(nodes.size());
        for (const auto& e : edges) {
          per_track[static_cast<std::size_t>(e.track)].emplace_back(
              edge_distance(kind, nodes[static_cast<std::size_t>(e.track)],
                            dets[static_cast<std::size_t>(e.det)]),
              e.det);
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          const auto& cand = per_track[i];
          if (cand.size() < 2) {
            if (!cand.empty()) ++report.single_candidate;
            continue;
          }
          std::vector<double> dist;
          for (const auto& c : cand) dist.push_back(c.first);
          for (auto& row : report.rows) {
            const auto kept = ratio_test(dist, row.alpha);
            if (!kept) {
              ++row.inconclusive;
              continue;
            }
            const auto& det_gt = dets[static_cast<std::size_t>(cand[*kept].second)].gt_id;
            if (det_gt && nodes[i].gt_id && *det_gt == *nodes[i].gt_id) {
              ++row.true_matches;
            } else {
              ++row.false_matches;
            }
          }
        }
      }
      replay.observe(t, dets);
    }
  }
  return report;
}

std::string format_ratio_table(const std::vector<RatioAnalysisReport>& reports) {
  std::ostringstream out;
  out << "# trajectories with a single candidate edge are excluded (M >= 2 required)\n";
  if (reports.empty()) return out.str();
  out << "        alpha";
  for (const auto& row : reports.front().rows) out << fmt("%10.2f", row.alpha);
  out << '\n';
  for (const auto& r : reports) {
    const std::string name = r.kind == RatioKind::Iou ? "R_iou" : "R_app";
    const char* labels[] = {"T", "F", "I"};
    for (int k = 0; k < 3; ++k) {
      char head[32];
      std::snprintf(head, sizeof head, "%-8s%-5s", k == 0 ? name.c_str() : "", labels[k]);
      out << head;
      for (const auto& row : r.rows) {
        const long v = k == 0 ? row.true_matches : k == 1 ? row.false_matches : row.inconclusive;
        out << fmt("%10.0f", static_cast<double>(v));
      }
      out << '\n';
    }
    out << "        single-candidate trajectories: " << r.single_candidate << '\n';
  }
  return out.str();
}

std::string format_ratio_tsv(const std::vector<RatioAnalysisReport>& reports) {
  std::ostringstream out;
  out << "variant\talpha\tT\tF\tI\n";
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      out << (r.kind == RatioKind::Iou ? "iou" : "app") << '\t' << fmt("%.4g", row.alpha) << '\t'
          << row.true_matches << '\t' << row.false_matches << '\t' << row.inconclusive << '\n';
    }
  }
  return out.str();
}

std::vector<SparsityRow> measure_sparsity(
    std::span<const Sequence> sequences,
    const std::vector<std::pair<std::string, RatioVariant>>& variants, const MpnModel& model,
    const AnalysisConfig& config, double tau, int repeats) {
  struct Step {
    std::vector<TrackNode> nodes;
    std::vector<Detection> dets;
    double fps;
  };
  std::vector<Step> steps;
  for (const auto& seq : sequences) {
    TeacherForcedReplay replay(config.replay);
    for (int t = 1; t <= seq.length(); ++t) {
      const auto dets = seq.at(t);
      auto nodes = replay.nodes_for(t);
      if (!nodes.empty() && !dets.empty()) {
        steps.push_back({std::move(nodes), {dets.begin(), dets.end()}, seq.fps});
      }
      replay.observe(t, dets);
    }
  }
  using Clock = std::chrono::steady_clock;
  std::vector<SparsityRow> rows;
  for (const auto& [label, variant] : variants) {
    SparsityRow row;
    row.label = label;
    row.variant = variant;
    row.steps = steps.size();
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < std::max(1, repeats); ++rep) {
      std::size_t candidates = 0, kept = 0;
      const auto start = Clock::now();
      for (const auto& s : steps) {
        AssocGraph g;
        g.tracks = s.nodes;
        g.detections = s.dets;
        g.edges = candidate_edges(g.tracks, g.detections, config.k_neighbors);
        candidates += g.edges.size();
        g = ratio_test_filter(std::move(g), variant);
        init_edge_features(g, s.fps);
        kept += g.edges.size();
        const Vec scores = score_edges(g, model);
        std::vector<ScoredEdge> scored;
        scored.reserve(g.edges.size());
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
          scored.push_back({g.edges[e].track, g.edges[e].det,
                            static_cast<double>(scores[static_cast<Eigen::Index>(e)])});
        }
        greedy_match(scored, g.tracks.size(), g.detections.size(), tau);
      }
      const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      best = std::min(best, ms);
      const double n = steps.empty() ? 1.0 : static_cast<double>(steps.size());
      row.candidate_edges = static_cast<double>(candidates) / n;
      row.kept_edges = static_cast<double>(kept) / n;
    }
    row.milliseconds = steps.empty() ? 0.0 : best / static_cast<double>(steps.size());
    rows.push_back(row);
  }
  return rows;
}

std::string format_sparsity_table(const std::vector<SparsityRow>& rows) {
  std::ostringstream out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-10s %8s %14s %12s %10s %12s\n", "graph", "alpha", "edges_before",
                "edges_after", "removed", "time_ms");
  out << buf;
  for (const auto& r : rows) {
    const double removed = r.candidate_edges > 0 ? 1.0 - r.kept_edges / r.candidate_edges : 0.0;
    std::snprintf(buf, sizeof buf, "%-10s %8s %14.2f %12.2f %9.1f%% %12.4f\n", r.label.c_str(),
                  r.variant.kind == RatioKind::None ? "-" : fmt("%.2f", r.variant.alpha).c_str(),
                  r.candidate_edges, r.kept_edges, 100.0 * removed, r.milliseconds);
    out << buf;
  }
  return out.str();
}

std::string format_sparsity_tsv(const std::vector<SparsityRow>& rows) {
  std::ostringstream out;
  out << "graph\tvariant\talpha\tedges_before\tedges_after\ttime_ms\tsteps\n";
  for (const auto& r : rows) {
    out << r.label << '\t' << to_string(r.variant.kind) << '\t' << fmt("%.4g", r.variant.alpha) << '\t'
        << fmt("%.4f", r.candidate_edges) << '\t' << fmt("%.4f", r.kept_edges) << '\t'
        << fmt("%.6f", r.milliseconds) << '\t' << r.steps << '\n';
  }
  return out.str();
}

}  // namespace sparsetrack
