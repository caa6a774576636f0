#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facematch/clustering.hpp"
#include "facematch/matching.hpp"
#include "facematch/timeline.hpp"

namespace facematch {

/// How a dataset gets clustered. `k` unset means the silhouette search.
struct ClusteringParams {
  Algorithm algorithm = Algorithm::Ward;
  std::optional<std::size_t> k;
  KSearchConfig search;
  AffinityOptions affinity;

  friend bool operator==(const ClusteringParams&, const ClusteringParams&) = default;
};

Clustering run_clustering(std::span<const Vector> data, const ClusteringParams& params);

/// A persisted gallery together with how it was produced.
struct ClusterStore {
  LabeledClusterSet gallery;
  ClusteringParams params;
  std::size_t num_faces = 0;

  friend bool operator==(const ClusterStore&, const ClusterStore&) = default;
};

/// Labels an existing clustering. With `cluster_labels` the i-th cluster
/// gets the i-th label; otherwise each cluster takes the majority of its
/// members' true labels. Clusters sharing a label become one entry.
LabeledClusterSet label_clusters(std::span<const Embedding> faces, const Clustering& clustering,
                                 const std::optional<std::vector<std::string>>& cluster_labels = {});

/// Clusters `faces` and labels the result.
ClusterStore build_labeled_store(std::span<const Embedding> faces, const ClusteringParams& params,
                                 const std::optional<std::vector<std::string>>& cluster_labels = {});

struct FaceRecognition {
  std::size_t face = 0;           // position in the input
  std::size_t video_cluster = 0;  // index into Recognition::clusters
  std::optional<std::string> label;
};

struct VideoCluster {
  std::string video_id;
  std::size_t local_index = 0;  // cluster index inside its video
  std::vector<std::size_t> faces;
  MatchDecision decision;
};

struct Recognition {
  std::vector<FaceRecognition> faces;  // input order
  std::vector<VideoCluster> clusters;  // by video first appearance, then local index
};

/// Clusters each video's faces (unknown K, Ward) and matches every cluster
/// against the gallery. Faces without a video_id form one video.
Recognition recognize(std::span<const Embedding> faces, const LabeledClusterSet& gallery,
                      const MatchConfig& match = {}, const KSearchConfig& search = {});

/// Face clusters only, without a gallery.
Recognition cluster_video(std::span<const Embedding> faces, const KSearchConfig& search = {});

/// Timeline identity of every face: the matched label, otherwise
/// "unknown-<cluster>" (or "cluster-<cluster>" when `anonymous`).
std::vector<TimelineRecord> timeline_records(std::span<const Embedding> faces,
                                             const Recognition& recognition,
                                             bool anonymous = false);

}  // namespace facematch
