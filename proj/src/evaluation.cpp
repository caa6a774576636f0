#include "facematch/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace facematch {

ContingencyTable::ContingencyTable(std::vector<std::string> classes,
                                   std::vector<std::size_t> clusters,
                                   std::vector<std::vector<std::size_t>> counts)
    : classes_(std::move(classes)), clusters_(std::move(clusters)), counts_(std::move(counts)) {
  if (counts_.size() != classes_.size()) throw Error("contingency rows do not match classes");
  for (const auto& row : counts_) {
    if (row.size() != clusters_.size()) throw Error("contingency columns do not match clusters");
    for (std::size_t v : row) total_ += v;
  }
}

std::vector<std::size_t> ContingencyTable::class_sizes() const {
  std::vector<std::size_t> out(classes_.size(), 0);
  for (std::size_t c = 0; c < classes_.size(); ++c)
    for (std::size_t v : counts_[c]) out[c] += v;
  return out;
}

std::vector<std::size_t> ContingencyTable::cluster_sizes() const {
  std::vector<std::size_t> out(clusters_.size(), 0);
  for (const auto& row : counts_)
    for (std::size_t k = 0; k < row.size(); ++k) out[k] += row[k];
  return out;
}

ContingencyTable ContingencyTable::transposed() const {
  std::vector<std::string> classes;
  for (std::size_t k : clusters_) classes.push_back(std::to_string(k));
  std::vector<std::size_t> clusters(classes_.size());
  for (std::size_t c = 0; c < classes_.size(); ++c) clusters[c] = c;
  std::vector<std::vector<std::size_t>> counts(clusters_.size(),
                                               std::vector<std::size_t>(classes_.size(), 0));
  for (std::size_t c = 0; c < classes_.size(); ++c)
    for (std::size_t k = 0; k < clusters_.size(); ++k) counts[k][c] = counts_[c][k];
  return ContingencyTable(std::move(classes), std::move(clusters), std::move(counts));
}

ContingencyTable contingency(std::span<const std::string> true_labels,
                             std::span<const std::size_t> assignments) {
  if (true_labels.size() != assignments.size()) {
    throw Error("label and assignment sequences differ in length (" +
                std::to_string(true_labels.size()) + " vs " + std::to_string(assignments.size()) +
                ")");
  }
  if (true_labels.empty()) throw Error("empty labelling");
  const std::set<std::string> class_set(true_labels.begin(), true_labels.end());
  const std::set<std::size_t> cluster_set(assignments.begin(), assignments.end());
  std::vector<std::string> classes(class_set.begin(), class_set.end());
  std::vector<std::size_t> clusters(cluster_set.begin(), cluster_set.end());
  std::map<std::string, std::size_t> class_index;
  std::map<std::size_t, std::size_t> cluster_index;
  for (std::size_t i = 0; i < classes.size(); ++i) class_index[classes[i]] = i;
  for (std::size_t i = 0; i < clusters.size(); ++i) cluster_index[clusters[i]] = i;

  std::vector<std::vector<std::size_t>> counts(classes.size(),
                                               std::vector<std::size_t>(clusters.size(), 0));
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    ++counts[class_index[true_labels[i]]][cluster_index[assignments[i]]];
  }
  return ContingencyTable(std::move(classes), std::move(clusters), std::move(counts));
}

namespace {

// -sum (x / N) log(x / N); zero counts contribute nothing.
double marginal_entropy(const std::vector<std::size_t>& sizes, double n) {
  double h = 0.0;
  for (std::size_t s : sizes) {
    if (s == 0) continue;
    const double p = static_cast<double>(s) / n;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

VMeasureReport v_measure(const ContingencyTable& table, double beta, double log_base) {
  if (table.total() == 0) throw Error("v-measure of an empty contingency table");
  if (!(beta > 0.0)) throw Error("beta must be positive");
  if (log_base != 0.0 && !(log_base > 0.0 && log_base != 1.0)) throw Error("invalid log base");

  const double n = static_cast<double>(table.total());
  const auto class_sizes = table.class_sizes();
  const auto cluster_sizes = table.cluster_sizes();
  const std::size_t nc = table.classes().size();
  const std::size_t nk = table.clusters().size();

  double h_c_given_k = 0.0;
  for (std::size_t k = 0; k < nk; ++k) {
    for (std::size_t c = 0; c < nc; ++c) {
      const auto a = table.count(c, k);
      if (a == 0) continue;
      h_c_given_k -= static_cast<double>(a) / n *
                     std::log(static_cast<double>(a) / static_cast<double>(cluster_sizes[k]));
    }
  }
  double h_k_given_c = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t k = 0; k < nk; ++k) {
      const auto a = table.count(c, k);
      if (a == 0) continue;
      h_k_given_c -= static_cast<double>(a) / n *
                     std::log(static_cast<double>(a) / static_cast<double>(class_sizes[c]));
    }
  }
  double h_c = marginal_entropy(class_sizes, n);
  double h_k = marginal_entropy(cluster_sizes, n);

  if (log_base != 0.0) {
    const double scale = std::log(log_base);
    h_c_given_k /= scale;
    h_k_given_c /= scale;
    h_c /= scale;
    h_k /= scale;
  }

  VMeasureReport r;
  r.beta = beta;
  r.h_class_given_cluster = h_c_given_k;
  r.h_class = h_c;
  r.h_cluster_given_class = h_k_given_c;
  r.h_cluster = h_k;
  r.homogeneity = (h_c_given_k == 0.0 || h_c == 0.0) ? 1.0 : 1.0 - h_c_given_k / h_c;
  r.completeness = (h_k_given_c == 0.0 || h_k == 0.0) ? 1.0 : 1.0 - h_k_given_c / h_k;
  const double denom = beta * r.homogeneity + r.completeness;
  r.v_measure = denom > 0.0 ? (1.0 + beta) * r.homogeneity * r.completeness / denom : 0.0;
  return r;
}

MatchMetrics match_metrics(std::span<const RegisteredOutcome> registered,
                           std::span<const MatchDecision> unregistered,
                           const LabeledClusterSet& gallery) {
  MatchMetrics m;
  m.registered_queries = registered.size();
  m.unregistered_queries = unregistered.size();
  if (!registered.empty()) {
    std::size_t any = 0, same = 0, present = 0;
    for (const auto& q : registered) {
      if (!q.decision.matched()) continue;
      ++any;
      const std::size_t idx = q.decision.match->cluster;
      if (idx >= gallery.size()) throw Error("decision refers to a cluster outside the gallery");
      const auto& entry = gallery[idx];
      if (entry.label == q.true_label) ++same;
      if (entry.label_histogram.count(q.true_label) && entry.label_histogram.at(q.true_label) > 0) {
        ++present;
      }
    }
    const double v = static_cast<double>(registered.size());
    m.m1 = static_cast<double>(any) / v;
    m.m2 = static_cast<double>(same) / v;
    m.m3 = static_cast<double>(present) / v;
  }
  if (!unregistered.empty()) {
    const auto none = std::count_if(unregistered.begin(), unregistered.end(),
                                    [](const MatchDecision& d) { return !d.matched(); });
    m.m4 = static_cast<double>(none) / static_cast<double>(unregistered.size());
  }
  return m;
}

namespace {

using FrameMap = std::map<std::uint64_t, std::map<std::string, std::optional<std::string>>>;

FrameMap by_frame(std::span<const FrameFaces> frames, const char* what) {
  FrameMap out;
  for (const auto& f : frames) {
    auto& faces = out[f.frame_index];
    for (const auto& face : f.faces) {
      if (!faces.emplace(face.face_id, face.label).second) {
        throw Error(std::string("duplicate face id '") + face.face_id + "' in " + what +
                    " frame " + std::to_string(f.frame_index));
      }
    }
  }
  return out;
}

}  // namespace

VideoScore score_video(std::span<const FrameFaces> truth, std::span<const FrameFaces> predictions) {
  const FrameMap gt = by_frame(truth, "ground-truth");
  const FrameMap pred = by_frame(predictions, "predicted");
  std::set<std::uint64_t> frames;
  for (const auto& [f, _] : gt) frames.insert(f);
  for (const auto& [f, _] : pred) frames.insert(f);

  VideoScore score;
  static const std::map<std::string, std::optional<std::string>> kNone;
  for (std::uint64_t f : frames) {
    const auto git = gt.find(f);
    const auto pit = pred.find(f);
    const auto& g = git == gt.end() ? kNone : git->second;
    const auto& p = pit == pred.end() ? kNone : pit->second;
    FrameScore fs;
    fs.frame_index = f;
    fs.truth_faces = g.size();
    fs.predicted_faces = p.size();
    for (const auto& [id, label] : p) {
      const auto hit = g.find(id);
      if (hit != g.end() && hit->second == label) ++fs.correct;
    }
    fs.exact = fs.correct == fs.truth_faces && fs.predicted_faces == fs.truth_faces;
    score.truth_faces += fs.truth_faces;
    score.predicted_faces += fs.predicted_faces;
    score.correct_faces += fs.correct;
    score.exact_frames += fs.exact;
    score.per_frame.push_back(fs);
  }
  score.frames = frames.size();
  // Empty denominators are vacuously perfect.
  score.precision = score.predicted_faces
                        ? static_cast<double>(score.correct_faces) / static_cast<double>(score.predicted_faces)
                        : 1.0;
  score.recall = score.truth_faces
                     ? static_cast<double>(score.correct_faces) / static_cast<double>(score.truth_faces)
                     : 1.0;
  const double sum = score.precision + score.recall;
  score.f1 = sum > 0.0 ? 2.0 * score.precision * score.recall / sum : 0.0;
  return score;
}

}  // namespace facematch
