#include "sparsetrack/mot_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sparsetrack/assignment.hpp"

namespace sparsetrack {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

double to_double(std::string_view field, const std::string& source, int line) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail(source, line, "bad number '" + std::string(field) + "'");
  }
  return v;
}

int to_int(std::string_view field, const std::string& source, int line) {
  const double v = to_double(field, source, line);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    fail(source, line, "expected an integer, got '" + std::string(field) + "'");
  }
  return static_cast<int>(v);
}

// Calls fn(fields, line_number) for every non-blank line.
template <typename Fn>
void for_each_row(std::istream& in, Fn&& fn) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    fn(split_csv(line), number);
  }
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::vector<TrackRow> read_track_rows(std::istream& in, const std::string& source) {
  std::vector<TrackRow> rows;
  for_each_row(in, [&](const std::vector<std::string_view>& f, int line) {
    if (f.size() < 6) fail(source, line, "expected at least 6 fields, got " + std::to_string(f.size()));
    TrackRow r;
    r.frame = to_int(f[0], source, line);
    r.id = to_int(f[1], source, line);
    r.box = {to_double(f[2], source, line), to_double(f[3], source, line),
             to_double(f[4], source, line), to_double(f[5], source, line)};
    r.confidence = f.size() > 6 ? to_double(f[6], source, line) : 1.0;
    if (r.frame < 1) fail(source, line, "frame must be >= 1");
    if (!r.box.valid()) fail(source, line, "box width and height must be positive");
    rows.push_back(r);
  });
  return rows;
}

std::vector<TrackRow> read_track_file(const fs::path& path) {
  auto in = open_input(path);
  return read_track_rows(in, path.string());
}

void write_track_rows(std::ostream& out, const std::vector<TrackRow>& rows) {
  for (const auto& r : rows) {
    out << r.frame << ',' << r.id << ',' << format_fixed(r.box.x) << ',' << format_fixed(r.box.y)
        << ',' << format_fixed(r.box.w) << ',' << format_fixed(r.box.h) << ','
        << format_fixed(r.confidence) << ",-1,-1,-1\n";
  }
}

std::string format_track_rows(const std::vector<TrackRow>& rows) {
  std::ostringstream out;
  write_track_rows(out, rows);
  return out.str();
}

std::vector<FeatureRow> read_feature_rows(std::istream& in, const std::string& source) {
  std::vector<FeatureRow> rows;
  for_each_row(in, [&](const std::vector<std::string_view>& f, int line) {
    if (f.size() < 3) fail(source, line, "feature row needs frame, index and at least one value");
    FeatureRow r;
    r.frame = to_int(f[0], source, line);
    r.det_index = to_int(f[1], source, line);
    if (r.det_index < 0) fail(source, line, "negative detection index");
    r.feature.resize(static_cast<Eigen::Index>(f.size() - 2));
    for (std::size_t i = 2; i < f.size(); ++i) {
      r.feature[static_cast<Eigen::Index>(i - 2)] = static_cast<Scalar>(to_double(f[i], source, line));
    }
    if (!rows.empty() && rows.front().feature.size() != r.feature.size()) {
      fail(source, line, "feature dimension differs from the first row");
    }
    rows.push_back(std::move(r));
  });
  return rows;
}

std::vector<FeatureRow> read_feature_file(const fs::path& path) {
  auto in = open_input(path);
  return read_feature_rows(in, path.string());
}

void write_feature_rows(std::ostream& out, const std::vector<FeatureRow>& rows) {
  for (const auto& r : rows) {
    out << r.frame << ',' << r.det_index;
    for (Eigen::Index i = 0; i < r.feature.size(); ++i) out << ',' << format_number(r.feature[i]);
    out << '\n';
  }
}

std::vector<AppearanceRegion> read_appearance_file(const fs::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::vector<AppearanceRegion> out;
  for_each_row(in, [&](const std::vector<std::string_view>& f, int line) {
    if (f.size() < 7) fail(source, line, "appearance row needs frame, id, box and features");
    AppearanceRegion r;
    r.frame = to_int(f[0], source, line);
    r.id = to_int(f[1], source, line);
    r.box = {to_double(f[2], source, line), to_double(f[3], source, line),
             to_double(f[4], source, line), to_double(f[5], source, line)};
    if (!r.box.valid()) fail(source, line, "box width and height must be positive");
    r.feature.resize(static_cast<Eigen::Index>(f.size() - 6));
    for (std::size_t i = 6; i < f.size(); ++i) {
      r.feature[static_cast<Eigen::Index>(i - 6)] = static_cast<Scalar>(to_double(f[i], source, line));
    }
    if (auto n = normalized(r.feature)) r.feature = *n;
    out.push_back(std::move(r));
  });
  return out;
}

void write_appearance_rows(std::ostream& out, const std::vector<AppearanceRegion>& regions) {
  for (const auto& r : regions) {
    out << r.frame << ',' << r.id << ',' << format_fixed(r.box.x) << ',' << format_fixed(r.box.y)
        << ',' << format_fixed(r.box.w) << ',' << format_fixed(r.box.h);
    for (Eigen::Index i = 0; i < r.feature.size(); ++i) out << ',' << format_number(r.feature[i]);
    out << '\n';
  }
}

SequenceInfo read_seqinfo(const fs::path& path) {
  auto in = open_input(path);
  SequenceInfo info;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto t = trim(line);
    if (t.empty() || t.front() == '[' || t.front() == ';' || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) fail(path.string(), number, "expected key=value");
    const auto key = trim(t.substr(0, eq));
    const auto value = trim(t.substr(eq + 1));
    if (key == "name") info.name = std::string(value);
    else if (key == "imWidth") info.image.width = to_double(value, path.string(), number);
    else if (key == "imHeight") info.image.height = to_double(value, path.string(), number);
    else if (key == "frameRate") info.fps = to_double(value, path.string(), number);
    else if (key == "seqLength") info.length = to_int(value, path.string(), number);
  }
  if (!(info.fps > 0.0) || !(info.image.width > 0.0) || !(info.image.height > 0.0)) {
    throw ParseError(path.string() + ": frame rate and image size must be positive");
  }
  return info;
}

void write_seqinfo(std::ostream& out, const SequenceInfo& info) {
  out << "[Sequence]\nname=" << info.name << "\nframeRate=" << format_number(info.fps)
      << "\nseqLength=" << info.length << "\nimWidth=" << format_number(info.image.width)
      << "\nimHeight=" << format_number(info.image.height) << '\n';
}

Sequence assemble_sequence(const std::vector<TrackRow>& detections,
                           const std::vector<FeatureRow>& features, const SequenceInfo& info) {
  std::map<std::pair<int, int>, const Feature*> lookup;
  for (const auto& f : features) {
    if (!lookup.emplace(std::make_pair(f.frame, f.det_index), &f.feature).second) {
      throw ParseError("duplicate feature row for frame " + std::to_string(f.frame) + " index " +
                       std::to_string(f.det_index));
    }
  }
  std::map<int, int> seen;  // frame -> detections so far
  std::vector<Detection> dets;
  dets.reserve(detections.size());
  for (const auto& row : detections) {
    const int index = seen[row.frame]++;
    auto it = lookup.find({row.frame, index});
    if (it == lookup.end()) {
      throw ParseError("missing feature for detection " + std::to_string(index) + " of frame " +
                       std::to_string(row.frame));
    }
    auto unit = normalized(*it->second);
    if (!unit) throw ParseError("zero feature vector in frame " + std::to_string(row.frame));
    dets.push_back({row.frame, row.box, std::clamp(row.confidence, 0.0, 1.0), std::move(*unit), {}});
  }
  if (lookup.size() != dets.size()) throw ParseError("feature rows without a matching detection");
  return make_sequence(info.name, std::move(dets), info.image, info.fps, info.length);
}

Sequence load_sequence_dir(const fs::path& dir) {
  SequenceInfo info;
  info.name = dir.filename().string();
  if (fs::exists(dir / "seqinfo.ini")) info = read_seqinfo(dir / "seqinfo.ini");
  return assemble_sequence(read_track_file(dir / "det.txt"), read_feature_file(dir / "features.txt"),
                           info);
}

void label_detections(Sequence& sequence, const std::vector<TrackRow>& gt, double min_iou) {
  std::map<int, std::vector<const TrackRow*>> by_frame;
  for (const auto& r : gt) by_frame[r.frame].push_back(&r);
  for (int t = 1; t <= sequence.length(); ++t) {
    auto& dets = sequence.frames[static_cast<std::size_t>(t - 1)];
    for (auto& d : dets) d.gt_id.reset();
    auto it = by_frame.find(t);
    if (it == by_frame.end() || dets.empty()) continue;
    const auto& rows = it->second;
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(dets.size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < dets.size(); ++i) {
      for (std::size_t j = 0; j < rows.size(); ++j) {
        const double v = iou(dets[i].box, rows[j]->box);
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v >= min_iou ? -v : 0.0;
      }
    }
    const auto assign = solve_assignment(cost);
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const int j = assign[i];
      if (j >= 0 && iou(dets[i].box, rows[static_cast<std::size_t>(j)]->box) >= min_iou) {
        dets[i].gt_id = rows[static_cast<std::size_t>(j)]->id;
      }
    }
  }
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.close();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

}  // namespace sparsetrack
