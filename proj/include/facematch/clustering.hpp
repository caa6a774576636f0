#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "facematch/geometry.hpp"

namespace facematch {

/// A partition of a dataset. Cluster indices are canonical: cluster 0 holds
/// point 0, and new indices are handed out in order of first appearance.
class Clustering {
 public:
  Clustering() = default;

  /// Relabels `labels` canonically. Any integer labelling is accepted.
  static Clustering from_labels(std::span<const std::size_t> labels);
  static Clustering single(std::size_t n_points);
  static Clustering singletons(std::size_t n_points);

  std::size_t num_points() const { return assignments_.size(); }
  std::size_t num_clusters() const { return num_clusters_; }
  std::size_t operator[](std::size_t point) const { return assignments_[point]; }
  const std::vector<std::size_t>& assignments() const { return assignments_; }

  /// Member point indices per cluster, each list ascending.
  std::vector<std::vector<std::size_t>> members() const;
  std::vector<std::size_t> sizes() const;

  friend bool operator==(const Clustering&, const Clustering&) = default;

 private:
  std::vector<std::size_t> assignments_;
  std::size_t num_clusters_ = 0;
};

// ---------------------------------------------------------------- k-means

enum class KMeansInit { PlusPlus, Random };

struct KMeansOptions {
  std::uint64_t seed = 0;
  std::size_t max_iter = 300;
  KMeansInit init = KMeansInit::PlusPlus;
};

struct KMeansResult {
  Clustering clustering;
  std::vector<Vector> centroids;  // indexed by canonical cluster
  /// Within-cluster sum of squares after every Lloyd iteration.
  std::vector<double> objective_history;
  std::size_t iterations = 0;
  bool converged = false;
};

KMeansResult kmeans_detailed(std::span<const Vector> data, std::size_t k,
                             const KMeansOptions& options = {});
Clustering kmeans(std::span<const Vector> data, std::size_t k, std::uint64_t seed = 0,
                  std::size_t max_iter = 300);

// ------------------------------------------------- affinity propagation

struct AffinityOptions {
  double damping = 0.5;
  std::size_t max_iter = 200;
  std::size_t convergence_iter = 15;
  /// Self-similarity; the median off-diagonal similarity when unset.
  std::optional<double> preference;
  /// Seeds the tiny jitter added to similarities to break exact ties.
  std::uint64_t seed = 0;

  friend bool operator==(const AffinityOptions&, const AffinityOptions&) = default;
};

struct AffinityResult {
  Clustering clustering;
  /// Exemplar point index per canonical cluster.
  std::vector<std::size_t> exemplars;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Responsibility/availability message passing on negative squared
/// Euclidean similarities. Never throws on non-convergence; check
/// `converged` instead.
AffinityResult affinity_propagation(std::span<const Vector> data,
                                    const AffinityOptions& options = {});

// ------------------------------------------------------- Ward linkage

/// One agglomeration step. Clusters are named by their smallest member
/// index, so `first < second` and the merged cluster keeps `first`.
struct WardMerge {
  std::size_t first = 0;
  std::size_t second = 0;
  /// Increase of the total within-cluster sum of squares caused by the merge.
  double increase = 0.0;
  std::size_t size = 0;  // size of the merged cluster
};

/// Full merge sequence (n - 1 steps) of Ward agglomerative clustering.
/// At every step, merges the pair with the minimal increase; ties go to the
/// lexicographically smallest (first, second).
class WardDendrogram {
 public:
  explicit WardDendrogram(std::span<const Vector> data);

  std::size_t num_points() const { return n_; }
  const std::vector<WardMerge>& merges() const { return merges_; }

  /// The partition reached after n - k merges.
  Clustering cut(std::size_t k) const;

 private:
  std::size_t n_ = 0;
  std::vector<WardMerge> merges_;
};

Clustering agglomerative_ward(std::span<const Vector> data, std::size_t k);

// --------------------------------------------------------- silhouette

struct SilhouetteReport {
  std::vector<double> coefficients;  // S per sample
  std::vector<double> intra;         // a per sample
  std::vector<double> nearest;       // b per sample
  double score = 0.0;                // mean of S
};

/// Samples alone in their cluster get S = 0. Requires >= 2 clusters.
SilhouetteReport silhouette(const DistanceMatrix& distances, const Clustering& clustering);
SilhouetteReport silhouette(std::span<const Vector> data, const Clustering& clustering);

// ------------------------------------------------- unknown-K search

enum class Algorithm { KMeans, Ward, AffinityPropagation };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view name);

struct KSearchConfig {
  std::size_t patience = 5;
  double min_silhouette = 0.2;
  std::optional<std::size_t> max_clusters;
  std::uint64_t seed = 0;  // k-means only

  friend bool operator==(const KSearchConfig&, const KSearchConfig&) = default;
};

void validate(const KSearchConfig& config);

struct KSearchStep {
  std::size_t k = 0;
  double score = 0.0;
};

struct KSearchResult {
  Clustering clustering;
  std::vector<KSearchStep> trace;
  std::size_t best_k = 1;     // k with the highest score (1 if none evaluated)
  double best_score = 0.0;
  bool collapsed = false;     // best score fell below min_silhouette
};

/// Grows k from 2 until the best silhouette score fails to improve
/// `patience` times in a row or k reaches the cap, then returns the best
/// configuration, or a single cluster when its score is below
/// `min_silhouette`. Only k-means and Ward are accepted.
KSearchResult estimate_clustering_detailed(std::span<const Vector> data, Algorithm algorithm,
                                           const KSearchConfig& config = {});
Clustering estimate_clustering(std::span<const Vector> data, Algorithm algorithm,
                               const KSearchConfig& config = {});

}  // namespace facematch
