#include "facematch/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace facematch {

const char* to_string(EmbeddingMethod m) {
  return m == EmbeddingMethod::Centroid ? "centroid" : "silhouette";
}

EmbeddingMethod embedding_method_from_string(std::string_view name) {
  if (name == "centroid") return EmbeddingMethod::Centroid;
  if (name == "silhouette" || name == "best_silhouette_sample") {
    return EmbeddingMethod::BestSilhouetteSample;
  }
  throw Error("unknown cluster embedding method '" + std::string(name) + "'");
}

ClusterEmbedding make_cluster_embedding(std::span<const Vector> data, const Clustering& clustering,
                                        std::size_t cluster, EmbeddingMethod method,
                                        const SilhouetteReport* silhouettes) {
  if (data.size() != clustering.num_points()) throw Error("clustering does not match the data");
  if (cluster >= clustering.num_clusters()) throw Error("cluster index out of range");

  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < clustering.num_points(); ++i)
    if (clustering[i] == cluster) members.push_back(i);
  if (members.empty()) throw Error("empty cluster");

  ClusterEmbedding out;
  out.cluster = cluster;
  if (method == EmbeddingMethod::BestSilhouetteSample && clustering.num_clusters() >= 2) {
    SilhouetteReport local;
    if (!silhouettes) {
      local = silhouette(data, clustering);
      silhouettes = &local;
    }
    std::size_t best = members.front();
    for (std::size_t m : members) {
      if (silhouettes->coefficients[m] > silhouettes->coefficients[best]) best = m;
    }
    out.method = EmbeddingMethod::BestSilhouetteSample;
    out.vector = data[best];
    out.representative = best;
    return out;
  }

  std::vector<Vector> vs;
  vs.reserve(members.size());
  for (std::size_t m : members) vs.push_back(data[m]);
  out.vector = centroid(vs);
  out.method = EmbeddingMethod::Centroid;
  return out;
}

ClusterEmbedding make_cluster_embedding(std::span<const Vector> members) {
  if (members.empty()) throw Error("empty cluster");
  ClusterEmbedding out;
  out.vector = centroid(members);
  return out;
}

std::set<std::string> LabeledCluster::label_set() const {
  std::set<std::string> out;
  for (const auto& [label, count] : label_histogram)
    if (count > 0) out.insert(label);
  return out;
}

LabeledClusterSet::LabeledClusterSet(std::size_t dimension, std::vector<LabeledCluster> entries)
    : dimension_(dimension), entries_(std::move(entries)) {
  if (dimension_ == 0) throw Error("gallery dimension must be positive");
  std::set<std::string> labels, ids;
  for (const auto& e : entries_) {
    if (e.label.empty()) throw Error("gallery entry with an empty label");
    if (!labels.insert(e.label).second) throw Error("duplicate gallery label '" + e.label + "'");
    if (e.centroid.size() != dimension_ || e.representative.size() != dimension_) {
      throw Error("gallery entry '" + e.label + "' has the wrong dimension");
    }
    for (const auto& id : e.member_ids) {
      if (!ids.insert(id).second) throw Error("face '" + id + "' appears in two gallery entries");
    }
  }
}

std::optional<std::size_t> LabeledClusterSet::find(std::string_view label) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].label == label) return i;
  return std::nullopt;
}

void validate(const MatchConfig& config) {
  if (config.alpha < 1) throw Error("alpha must be at least 1");
  if (!(config.probability_threshold > 0.0 && config.probability_threshold < 1.0)) {
    throw Error("probability threshold must lie in (0, 1)");
  }
  if (!(config.rmse_epsilon > 0.0)) throw Error("rmse epsilon must be positive");
}

double similarity(VectorView query, VectorView reference, double rmse_epsilon) {
  return 1.0 / std::max(rmse(query, reference), rmse_epsilon);
}

std::vector<double> truncate_top_alpha(std::span<const double> similarities, std::size_t alpha) {
  std::vector<std::size_t> order(similarities.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return similarities[a] > similarities[b];
  });
  std::vector<double> out(similarities.size(), 0.0);
  const std::size_t keep = std::min(alpha, similarities.size());
  for (std::size_t i = 0; i < keep; ++i) out[order[i]] = similarities[order[i]];
  return out;
}

std::vector<double> match_probabilities(std::span<const double> truncated) {
  if (truncated.empty()) throw Error("softmax over an empty vector");
  const double shift = *std::max_element(truncated.begin(), truncated.end());
  std::vector<double> p(truncated.size());
  double total = 0.0;
  for (std::size_t i = 0; i < truncated.size(); ++i) {
    p[i] = std::exp(truncated[i] - shift);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

MatchDecision sigma(std::span<const double> probabilities, const LabeledClusterSet& gallery,
                    double threshold) {
  if (gallery.empty()) throw Error("empty gallery");
  if (probabilities.size() != gallery.size()) {
    throw Error("probability vector does not match the gallery size");
  }
  MatchDecision decision;
  decision.probabilities.assign(probabilities.begin(), probabilities.end());
  const auto best = static_cast<std::size_t>(
      std::max_element(probabilities.begin(), probabilities.end()) - probabilities.begin());
  if (probabilities[best] > threshold) {
    decision.match = Match{gallery[best].label, best, probabilities[best]};
  }
  return decision;
}

MatchDecision match_embedding(VectorView query, const LabeledClusterSet& gallery,
                              const MatchConfig& config) {
  validate(config);
  if (gallery.empty()) throw Error("empty gallery");
  if (query.size() != gallery.dimension()) {
    throw Error("query dimension " + std::to_string(query.size()) +
                " does not match gallery dimension " + std::to_string(gallery.dimension()));
  }
  std::vector<double> s(gallery.size());
  for (std::size_t k = 0; k < gallery.size(); ++k) {
    s[k] = similarity(query, gallery[k].embedding(config.cluster_embedding_method),
                      config.rmse_epsilon);
  }
  auto truncated = truncate_top_alpha(s, config.alpha);
  auto p = match_probabilities(truncated);
  MatchDecision decision = sigma(p, gallery, config.probability_threshold);
  decision.similarities = std::move(s);
  decision.truncated = std::move(truncated);
  return decision;
}

MatchDecision match_cluster(std::span<const Vector> members, const LabeledClusterSet& gallery,
                            const MatchConfig& config) {
  return match_embedding(make_cluster_embedding(members).vector, gallery, config);
}

MajorityLabel majority_label(const std::map<std::string, std::size_t>& histogram) {
  MajorityLabel out;
  std::size_t best = 0;
  // std::map iterates in lexicographic order, so the first maximum wins ties.
  for (const auto& [label, count] : histogram) {
    if (count == 0) continue;
    out.labels.insert(label);
    if (count > best) {
      best = count;
      out.label = label;
    }
  }
  if (best == 0) throw Error("majority label of an empty multiset");
  return out;
}

MajorityLabel majority_label(std::span<const std::string> labels) {
  std::map<std::string, std::size_t> histogram;
  for (const auto& l : labels) ++histogram[l];
  return majority_label(histogram);
}

}  // namespace facematch
