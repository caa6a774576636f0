#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facematch/matching.hpp"

namespace facematch {

/// Class-by-cluster count matrix. Classes are sorted, clusters ascending.
class ContingencyTable {
 public:
  ContingencyTable() = default;
  ContingencyTable(std::vector<std::string> classes, std::vector<std::size_t> clusters,
                   std::vector<std::vector<std::size_t>> counts);

  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<std::size_t>& clusters() const { return clusters_; }
  std::size_t count(std::size_t class_index, std::size_t cluster_index) const {
    return counts_[class_index][cluster_index];
  }
  const std::vector<std::vector<std::size_t>>& counts() const { return counts_; }
  std::size_t total() const { return total_; }

  std::vector<std::size_t> class_sizes() const;
  std::vector<std::size_t> cluster_sizes() const;

  /// Classes and clusters swapped; cluster names become "0", "1", ...
  ContingencyTable transposed() const;

 private:
  std::vector<std::string> classes_;
  std::vector<std::size_t> clusters_;
  std::vector<std::vector<std::size_t>> counts_;
  std::size_t total_ = 0;
};

ContingencyTable contingency(std::span<const std::string> true_labels,
                             std::span<const std::size_t> assignments);

struct VMeasureReport {
  double homogeneity = 0.0;
  double completeness = 0.0;
  double v_measure = 0.0;
  double beta = 1.0;
  double h_class_given_cluster = 0.0;  // H(C|K)
  double h_class = 0.0;                // H(C)
  double h_cluster_given_class = 0.0;  // H(K|C)
  double h_cluster = 0.0;              // H(K)
};

/// Entropies use `log_base` (natural log by default); the scores do not
/// depend on it.
VMeasureReport v_measure(const ContingencyTable& table, double beta = 1.0,
                         double log_base = 0.0);

/// One registered (validation) query and its decision.
struct RegisteredOutcome {
  std::string true_label;  // majority true label of the query cluster
  MatchDecision decision;
};

struct MatchMetrics {
  std::optional<double> m1;  // matched anything
  std::optional<double> m2;  // matched a cluster with the same majority label
  std::optional<double> m3;  // matched a cluster containing the label
  std::optional<double> m4;  // non-registered query left unmatched
  std::size_t registered_queries = 0;
  std::size_t unregistered_queries = 0;
};

MatchMetrics match_metrics(std::span<const RegisteredOutcome> registered,
                           std::span<const MatchDecision> unregistered,
                           const LabeledClusterSet& gallery);

/// A face in a frame; an empty label means "non-registered".
struct FaceLabel {
  std::string face_id;
  std::optional<std::string> label;
};

struct FrameFaces {
  std::uint64_t frame_index = 0;
  std::vector<FaceLabel> faces;
};

struct FrameScore {
  std::uint64_t frame_index = 0;
  std::size_t truth_faces = 0;
  std::size_t predicted_faces = 0;
  std::size_t correct = 0;
  bool exact = false;
};

struct VideoScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t frames = 0;         // #F
  std::size_t exact_frames = 0;   // #EM
  std::size_t truth_faces = 0;
  std::size_t predicted_faces = 0;
  std::size_t correct_faces = 0;
  std::vector<FrameScore> per_frame;  // ascending frame index
};

/// Predictions pair with ground truth by face id within a frame. Spurious
/// predictions lower precision, missed faces lower recall.
VideoScore score_video(std::span<const FrameFaces> truth, std::span<const FrameFaces> predictions);

}  // namespace facematch
