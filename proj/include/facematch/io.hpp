#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facematch/clustering.hpp"
#include "facematch/evaluation.hpp"
#include "facematch/geometry.hpp"
#include "facematch/pipeline.hpp"
#include "facematch/timeline.hpp"

namespace facematch {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

// Embedding file: header `#emb v1 dim=<n>`, then tab separated
// id, video_id, frame_index, label, comma separated vector, and an optional
// sixth field x1,y1,x2,y2 for the bounding box.
void write_embeddings(std::ostream& out, std::span<const Embedding> data);
std::vector<Embedding> read_embeddings(std::istream& in);
void write_embeddings(const std::filesystem::path& path, std::span<const Embedding> data);
std::vector<Embedding> read_embeddings(const std::filesystem::path& path);

// Cluster assignment file: header `#clusters v1 k=<k> algo=<name>`, then
// id<TAB>cluster per face.
struct Assignment {
  std::string id;
  std::size_t cluster = 0;
};
void write_assignments(std::ostream& out, std::span<const Embedding> data,
                       const Clustering& clustering, Algorithm algorithm);
std::vector<Assignment> read_assignments(std::istream& in);
void write_assignments(const std::filesystem::path& path, std::span<const Embedding> data,
                       const Clustering& clustering, Algorithm algorithm);
std::vector<Assignment> read_assignments(const std::filesystem::path& path);

/// Aligns an assignment file with a dataset by face id.
Clustering clustering_for(std::span<const Embedding> data, std::span<const Assignment> assignments);

// Cluster store: versioned JSON document.
std::string store_to_string(const ClusterStore& store);
ClusterStore store_from_string(const std::string& text);
void write_store(const std::filesystem::path& path, const ClusterStore& store);
ClusterStore read_store(const std::filesystem::path& path);

// Face label file: header `#labels v1`, then
// id, video_id, frame_index, cluster, label (empty when non-registered).
struct FaceLabelRecord {
  std::string id;
  std::optional<std::string> video_id;
  std::optional<std::uint64_t> frame_index;
  std::size_t cluster = 0;
  std::optional<std::string> label;

  friend bool operator==(const FaceLabelRecord&, const FaceLabelRecord&) = default;
};
std::vector<FaceLabelRecord> face_label_records(std::span<const Embedding> faces,
                                                const Recognition& recognition);
void write_face_labels(std::ostream& out, std::span<const FaceLabelRecord> records);
std::vector<FaceLabelRecord> read_face_labels(std::istream& in);
void write_face_labels(const std::filesystem::path& path, std::span<const FaceLabelRecord> records);
std::vector<FaceLabelRecord> read_face_labels(const std::filesystem::path& path);

/// JSON report of every cluster decision.
std::string decisions_to_json(const Recognition& recognition, std::span<const Embedding> faces);

// Timeline: identity<TAB>start_s<TAB>end_s<TAB>first_frame<TAB>last_frame.
void write_timeline(std::ostream& out, std::span<const TimelineSegment> segments);
std::string timeline_to_json(std::span<const TimelineSegment> segments, double fps);

std::string vmeasure_to_json(const VMeasureReport& report);
std::string match_metrics_to_json(const MatchMetrics& metrics);
std::string video_score_to_json(const VideoScore& score);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace facematch
