#include "facematch/pipeline.hpp"

#include <map>

namespace facematch {

Clustering run_clustering(std::span<const Vector> data, const ClusteringParams& params) {
  if (params.algorithm == Algorithm::AffinityPropagation) {
    if (data.size() == 1) return Clustering::single(1);
    return affinity_propagation(data, params.affinity).clustering;
  }
  if (!params.k) return estimate_clustering(data, params.algorithm, params.search);
  if (params.algorithm == Algorithm::Ward) return agglomerative_ward(data, *params.k);
  return kmeans(data, *params.k, params.search.seed);
}

LabeledClusterSet label_clusters(std::span<const Embedding> faces, const Clustering& clustering,
                                 const std::optional<std::vector<std::string>>& cluster_labels) {
  const std::size_t dim = validate_dataset(faces);
  if (faces.empty()) throw Error("cannot label an empty dataset");
  if (clustering.num_points() != faces.size()) throw Error("clustering does not match the faces");

  const auto members = clustering.members();
  std::vector<std::string> labels(members.size());
  if (cluster_labels) {
    if (cluster_labels->size() != members.size()) {
      throw Error("got " + std::to_string(cluster_labels->size()) + " labels for " +
                  std::to_string(members.size()) + " clusters");
    }
    labels = *cluster_labels;
    for (const auto& l : labels)
      if (l.empty()) throw Error("empty cluster label");
  } else {
    for (std::size_t c = 0; c < members.size(); ++c) {
      std::vector<std::string> truth;
      for (std::size_t i : members[c]) {
        if (!faces[i].true_label) {
          throw Error("face '" + faces[i].id + "' has no label; supply per-cluster labels");
        }
        truth.push_back(*faces[i].true_label);
      }
      labels[c] = majority_label(truth).label;
    }
  }

  // The labelled partition merges clusters that received the same label.
  std::map<std::string, std::size_t> entry_of;
  std::vector<std::string> entry_labels;
  std::vector<std::size_t> entry_assign(faces.size());
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto [it, inserted] = entry_of.try_emplace(labels[c], entry_labels.size());
    if (inserted) entry_labels.push_back(labels[c]);
    for (std::size_t i : members[c]) entry_assign[i] = it->second;
  }
  const Clustering partition = Clustering::from_labels(entry_assign);
  const auto vectors = vectors_of(faces);
  std::optional<SilhouetteReport> sil;
  if (partition.num_clusters() >= 2) sil = silhouette(vectors, partition);

  const auto parts = partition.members();
  std::vector<LabeledCluster> entries(parts.size());
  for (std::size_t e = 0; e < parts.size(); ++e) {
    LabeledCluster& entry = entries[e];
    entry.label = entry_labels[entry_assign[parts[e].front()]];
    for (std::size_t i : parts[e]) {
      entry.member_ids.push_back(faces[i].id);
      ++entry.label_histogram[faces[i].true_label.value_or(entry.label)];
    }
    entry.centroid = centroid(faces, parts[e]);
    const auto rep = make_cluster_embedding(vectors, partition, e,
                                            EmbeddingMethod::BestSilhouetteSample,
                                            sil ? &*sil : nullptr);
    entry.representative = rep.vector;
    if (rep.representative) entry.representative_id = faces[*rep.representative].id;
  }
  return LabeledClusterSet(dim, std::move(entries));
}

ClusterStore build_labeled_store(std::span<const Embedding> faces, const ClusteringParams& params,
                                 const std::optional<std::vector<std::string>>& cluster_labels) {
  validate_dataset(faces);
  if (faces.empty()) throw Error("cannot build a store from an empty dataset");
  const auto vectors = vectors_of(faces);
  const Clustering clustering = run_clustering(vectors, params);
  ClusterStore store;
  store.gallery = label_clusters(faces, clustering, cluster_labels);
  store.params = params;
  store.num_faces = faces.size();
  return store;
}

namespace {

Recognition recognize_impl(std::span<const Embedding> faces, const LabeledClusterSet* gallery,
                           const MatchConfig& match, const KSearchConfig& search) {
  const std::size_t dim = validate_dataset(faces);
  if (faces.empty()) throw Error("no faces to recognize");
  if (gallery) {
    validate(match);
    if (gallery->empty()) throw Error("empty gallery");
    if (gallery->dimension() != dim) {
      throw Error("face dimension " + std::to_string(dim) + " does not match store dimension " +
                  std::to_string(gallery->dimension()));
    }
  }

  std::vector<std::string> videos;
  std::map<std::string, std::vector<std::size_t>> by_video;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const std::string v = faces[i].video_id.value_or("");
    auto [it, inserted] = by_video.try_emplace(v);
    if (inserted) videos.push_back(v);
    it->second.push_back(i);
  }

  Recognition out;
  out.faces.resize(faces.size());
  for (const auto& video : videos) {
    const auto& idx = by_video[video];
    std::vector<Vector> vs;
    vs.reserve(idx.size());
    for (std::size_t i : idx) vs.push_back(faces[i].vector);
    const Clustering clustering = estimate_clustering(vs, Algorithm::Ward, search);

    std::optional<SilhouetteReport> sil;
    if (gallery && match.cluster_embedding_method == EmbeddingMethod::BestSilhouetteSample &&
        clustering.num_clusters() >= 2) {
      sil = silhouette(vs, clustering);
    }
    const auto members = clustering.members();
    for (std::size_t c = 0; c < members.size(); ++c) {
      VideoCluster vc;
      vc.video_id = video;
      vc.local_index = c;
      for (std::size_t m : members[c]) vc.faces.push_back(idx[m]);
      if (gallery) {
        const auto q = make_cluster_embedding(vs, clustering, c, match.cluster_embedding_method,
                                              sil ? &*sil : nullptr);
        vc.decision = match_embedding(q.vector, *gallery, match);
      }
      const std::size_t global = out.clusters.size();
      for (std::size_t f : vc.faces) {
        out.faces[f].face = f;
        out.faces[f].video_cluster = global;
        if (vc.decision.matched()) out.faces[f].label = vc.decision.match->label;
      }
      out.clusters.push_back(std::move(vc));
    }
  }
  return out;
}

}  // namespace

Recognition recognize(std::span<const Embedding> faces, const LabeledClusterSet& gallery,
                      const MatchConfig& match, const KSearchConfig& search) {
  return recognize_impl(faces, &gallery, match, search);
}

Recognition cluster_video(std::span<const Embedding> faces, const KSearchConfig& search) {
  return recognize_impl(faces, nullptr, MatchConfig{}, search);
}

std::vector<TimelineRecord> timeline_records(std::span<const Embedding> faces,
                                             const Recognition& recognition, bool anonymous) {
  if (recognition.faces.size() != faces.size()) throw Error("recognition does not match the faces");
  std::vector<TimelineRecord> out;
  out.reserve(faces.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    if (!faces[i].frame_index) throw Error("face '" + faces[i].id + "' has no frame index");
    const auto& r = recognition.faces[i];
    const auto local = recognition.clusters[r.video_cluster].local_index;
    std::string identity;
    if (!anonymous && r.label) {
      identity = *r.label;
    } else {
      identity = (anonymous ? "cluster-" : "unknown-") + std::to_string(local);
    }
    out.push_back({std::move(identity), *faces[i].frame_index});
  }
  return out;
}

}  // namespace facematch
