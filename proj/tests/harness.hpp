// Synthetic gallery/video scenarios shared by the pipeline tests and the
// acceptance binary.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "facematch/pipeline.hpp"
#include "facematch/synth.hpp"

namespace harness {

struct Scenario {
  facematch::SynthDataset data;
  std::vector<facematch::Embedding> gallery_faces;  // registered identities only
  std::vector<facematch::Embedding> video_faces;    // every identity, frame tagged
};

/// Each identity gets `gallery_per + video_per` points. The first
/// `gallery_per` of a registered identity go to the gallery, the rest to the
/// videos. Identities are dealt to `num_videos` videos round-robin.
inline Scenario make_scenario(facematch::SynthConfig cfg, std::size_t gallery_per,
                              std::size_t video_per, std::size_t num_videos) {
  cfg.points_per_identity = gallery_per + video_per;
  Scenario s;
  s.data = facematch::generate_synthetic(cfg);
  std::vector<std::vector<facematch::Embedding>> videos(num_videos);
  for (std::size_t i = 0; i < s.data.identities.size(); ++i) {
    const bool registered = s.data.registered(s.data.identities[i]);
    for (std::size_t j = 0; j < cfg.points_per_identity; ++j) {
      const auto& e = s.data.embeddings[i * cfg.points_per_identity + j];
      if (j < gallery_per) {
        if (registered) s.gallery_faces.push_back(e);
      } else {
        videos[i % num_videos].push_back(e);
      }
    }
  }
  for (std::size_t v = 0; v < num_videos; ++v) {
    facematch::tag_frames(videos[v], "video-" + std::to_string(v), 20, cfg.seed * 1000 + v);
    s.video_faces.insert(s.video_faces.end(), videos[v].begin(), videos[v].end());
  }
  return s;
}

/// Gallery built from ground-truth labels of the gallery faces.
inline facematch::LabeledClusterSet truth_gallery(const std::vector<facematch::Embedding>& faces) {
  std::vector<std::size_t> raw;
  std::vector<std::string> names;
  for (const auto& f : faces) {
    std::size_t k = 0;
    while (k < names.size() && names[k] != *f.true_label) ++k;
    if (k == names.size()) names.push_back(*f.true_label);
    raw.push_back(k);
  }
  return facematch::label_clusters(faces, facematch::Clustering::from_labels(raw));
}

}  // namespace harness
