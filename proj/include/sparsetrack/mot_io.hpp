#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparsetrack/forecast.hpp"
#include "sparsetrack/sequence.hpp"

namespace sparsetrack {

// Thrown for malformed input files; the message carries "path:line".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Track / detection rows: frame,id,x,y,w,h,conf,-1,-1,-1
std::vector<TrackRow> read_track_rows(std::istream& in, const std::string& source = "<input>");
std::vector<TrackRow> read_track_file(const std::filesystem::path& path);
void write_track_rows(std::ostream& out, const std::vector<TrackRow>& rows);
std::string format_track_rows(const std::vector<TrackRow>& rows);

// Feature rows: frame,det_index,f_1,...,f_d where det_index is the 0-based
// position of the detection within its frame in the detection file.
struct FeatureRow {
  int frame = 1;
  int det_index = 0;
  Feature feature;
};
std::vector<FeatureRow> read_feature_rows(std::istream& in, const std::string& source = "<input>");
std::vector<FeatureRow> read_feature_file(const std::filesystem::path& path);
void write_feature_rows(std::ostream& out, const std::vector<FeatureRow>& rows);

// Appearance regions: frame,id,x,y,w,h,f_1,...,f_d (one per visible target).
std::vector<AppearanceRegion> read_appearance_file(const std::filesystem::path& path);
void write_appearance_rows(std::ostream& out, const std::vector<AppearanceRegion>& regions);

struct SequenceInfo {
  std::string name = "sequence";
  ImageSize image;
  double fps = 30.0;
  int length = 0;
};
SequenceInfo read_seqinfo(const std::filesystem::path& path);
void write_seqinfo(std::ostream& out, const SequenceInfo& info);

// Joins detection rows with their features (normalized to unit length).
// Every detection must have exactly one feature row.
Sequence assemble_sequence(const std::vector<TrackRow>& detections,
                           const std::vector<FeatureRow>& features, const SequenceInfo& info);

// Loads det.txt, features.txt and (when present) seqinfo.ini from a directory.
Sequence load_sequence_dir(const std::filesystem::path& dir);

// Attaches gt identities to detections by per-frame optimal IoU matching (>= min_iou).
void label_detections(Sequence& sequence, const std::vector<TrackRow>& gt, double min_iou = 0.5);

// Writes `content` to `path` through a temporary file in the same directory.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace sparsetrack
