#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facematch/clustering.hpp"
#include "facematch/geometry.hpp"

namespace facematch {

enum class EmbeddingMethod { Centroid, BestSilhouetteSample };

const char* to_string(EmbeddingMethod m);
/// Accepts "centroid" and "silhouette" (or "best_silhouette_sample").
EmbeddingMethod embedding_method_from_string(std::string_view name);

/// A single vector summarising one cluster.
struct ClusterEmbedding {
  Vector vector;
  EmbeddingMethod method = EmbeddingMethod::Centroid;
  std::size_t cluster = 0;
  /// Member position (within the dataset) of the chosen sample; only set
  /// for BestSilhouetteSample.
  std::optional<std::size_t> representative;
};

/// Builds the embedding of `cluster` within `clustering` over `data`.
/// BestSilhouetteSample falls back to the centroid when the clustering has
/// fewer than two clusters. `silhouettes` may carry precomputed
/// per-sample coefficients for `clustering`.
ClusterEmbedding make_cluster_embedding(std::span<const Vector> data, const Clustering& clustering,
                                        std::size_t cluster, EmbeddingMethod method,
                                        const SilhouetteReport* silhouettes = nullptr);

/// Centroid embedding of a bare member list.
ClusterEmbedding make_cluster_embedding(std::span<const Vector> members);

struct LabeledCluster {
  std::string label;
  std::vector<std::string> member_ids;
  Vector centroid;
  std::string representative_id;
  Vector representative;
  std::map<std::string, std::size_t> label_histogram;

  const Vector& embedding(EmbeddingMethod m) const {
    return m == EmbeddingMethod::Centroid ? centroid : representative;
  }
  /// The distinct face labels present in the cluster.
  std::set<std::string> label_set() const;

  friend bool operator==(const LabeledCluster&, const LabeledCluster&) = default;
};

/// The reference gallery. Entry order is fixed and drives tie-breaking.
class LabeledClusterSet {
 public:
  LabeledClusterSet() = default;
  LabeledClusterSet(std::size_t dimension, std::vector<LabeledCluster> entries);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const LabeledCluster& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<LabeledCluster>& entries() const { return entries_; }
  std::optional<std::size_t> find(std::string_view label) const;

  friend bool operator==(const LabeledClusterSet&, const LabeledClusterSet&) = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<LabeledCluster> entries_;
};

struct MatchConfig {
  std::size_t alpha = 5;
  double probability_threshold = 0.5;
  EmbeddingMethod cluster_embedding_method = EmbeddingMethod::Centroid;
  double rmse_epsilon = 1e-12;
};

void validate(const MatchConfig& config);

struct Match {
  std::string label;
  std::size_t cluster = 0;
  double probability = 0.0;
};

struct MatchDecision {
  std::optional<Match> match;  // empty means "no registered identity"
  std::vector<double> probabilities;
  std::vector<double> similarities;
  std::vector<double> truncated;

  bool matched() const { return match.has_value(); }
};

/// Inverse RMSE with the denominator clamped at `rmse_epsilon`.
double similarity(VectorView query, VectorView reference, double rmse_epsilon = 1e-12);

/// Keeps the `alpha` largest entries and zeroes the rest. Ties at the
/// cutoff keep the earliest index.
std::vector<double> truncate_top_alpha(std::span<const double> similarities, std::size_t alpha);

/// Softmax over all entries, zeroed ones included.
std::vector<double> match_probabilities(std::span<const double> truncated);

/// The argmax entry when its probability strictly exceeds `threshold`.
/// The returned decision carries `probabilities` but no similarity vectors.
MatchDecision sigma(std::span<const double> probabilities, const LabeledClusterSet& gallery,
                    double threshold = 0.5);

/// Full chain for one query embedding against the gallery.
MatchDecision match_embedding(VectorView query, const LabeledClusterSet& gallery,
                              const MatchConfig& config = {});

/// Query embedding is the centroid of `members`.
MatchDecision match_cluster(std::span<const Vector> members, const LabeledClusterSet& gallery,
                            const MatchConfig& config = {});

struct MajorityLabel {
  std::string label;             // most frequent, lexicographically smallest on ties
  std::set<std::string> labels;  // distinct labels
};

MajorityLabel majority_label(std::span<const std::string> labels);
MajorityLabel majority_label(const std::map<std::string, std::size_t>& histogram);

}  // namespace facematch
