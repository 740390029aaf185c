#include "sparsetrack/assignment.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace sparsetrack {

namespace {

// rows <= cols; classic O(n^2 m) shortest augmenting path formulation.
std::vector<int> solve_wide(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

MatchResult finish(std::vector<std::pair<int, int>> matches, std::size_t num_tracks,
                   std::size_t num_detections) {
  MatchResult out;
  std::vector<char> track_used(num_tracks, 0), det_used(num_detections, 0);
  for (auto [t, d] : matches) {
    track_used[t] = 1;
    det_used[d] = 1;
  }
  std::sort(matches.begin(), matches.end());
  out.matches = std::move(matches);
  for (std::size_t t = 0; t < num_tracks; ++t) {
    if (!track_used[t]) out.unmatched_tracks.push_back(static_cast<int>(t));
  }
  for (std::size_t d = 0; d < num_detections; ++d) {
    if (!det_used[d]) out.unmatched_detections.push_back(static_cast<int>(d));
  }
  return out;
}

void check_edges(std::span<const ScoredEdge> edges, std::size_t num_tracks,
                 std::size_t num_detections) {
  for (const auto& e : edges) {
    if (e.track < 0 || e.det < 0 || static_cast<std::size_t>(e.track) >= num_tracks ||
        static_cast<std::size_t>(e.det) >= num_detections) {
      throw std::out_of_range("scored edge endpoint out of range");
    }
  }
}

}  // namespace

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) return std::vector<int>(cost.rows(), -1);
  if (cost.rows() <= cost.cols()) return solve_wide(cost);
  const std::vector<int> col_to_row = solve_wide(cost.transpose());
  std::vector<int> row_to_col(cost.rows(), -1);
  for (std::size_t c = 0; c < col_to_row.size(); ++c) {
    if (col_to_row[c] >= 0) row_to_col[col_to_row[c]] = static_cast<int>(c);
  }
  return row_to_col;
}

MatchResult greedy_match(std::span<const ScoredEdge> edges, std::size_t num_tracks,
                         std::size_t num_detections, double tau) {
  check_edges(edges, num_tracks, num_detections);
  std::vector<ScoredEdge> ranked;
  for (const auto& e : edges) {
    if (e.score >= tau) ranked.push_back(e);
  }
  std::sort(ranked.begin(), ranked.end(), [](const ScoredEdge& a, const ScoredEdge& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.track != b.track) return a.track < b.track;
    return a.det < b.det;
  });
  std::vector<char> track_used(num_tracks, 0), det_used(num_detections, 0);
  std::vector<std::pair<int, int>> matches;
  for (const auto& e : ranked) {
    if (track_used[e.track] || det_used[e.det]) continue;
    track_used[e.track] = 1;
    det_used[e.det] = 1;
    matches.emplace_back(e.track, e.det);
  }
  return finish(std::move(matches), num_tracks, num_detections);
}

MatchResult optimal_match(std::span<const ScoredEdge> edges, std::size_t num_tracks,
                          std::size_t num_detections, double tau) {
  check_edges(edges, num_tracks, num_detections);
  if (num_tracks == 0 || num_detections == 0) return finish({}, num_tracks, num_detections);
  // Non-edges cost 0 (equivalent to leaving both endpoints free).
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_tracks),
                                               static_cast<Eigen::Index>(num_detections));
  Eigen::MatrixXi valid = Eigen::MatrixXi::Zero(cost.rows(), cost.cols());
  for (const auto& e : edges) {
    if (e.score < tau) continue;
    cost(e.track, e.det) = std::min(cost(e.track, e.det), -e.score);
    valid(e.track, e.det) = 1;
  }
  const auto assignment = solve_assignment(cost);
  std::vector<std::pair<int, int>> matches;
  for (std::size_t t = 0; t < assignment.size(); ++t) {
    const int d = assignment[t];
    if (d >= 0 && valid(static_cast<Eigen::Index>(t), d)) matches.emplace_back(static_cast<int>(t), d);
  }
  return finish(std::move(matches), num_tracks, num_detections);
}

}  // namespace sparsetrack
