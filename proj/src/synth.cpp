#include "facematch/synth.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <random>

namespace facematch {

void validate(const SynthConfig& c) {
  if (c.num_identities == 0 || c.points_per_identity == 0 || c.dimension == 0) {
    throw Error("identity count, points per identity and dimension must be positive");
  }
  if (!(c.blob_stddev > 0.0) || !std::isfinite(c.blob_stddev)) throw Error("blob_stddev must be positive");
  if (!(c.separation > 0.0) || !std::isfinite(c.separation)) throw Error("separation must be positive");
  if (!(c.fraction_nonregistered >= 0.0 && c.fraction_nonregistered <= 1.0)) {
    throw Error("fraction_nonregistered must lie in [0, 1]");
  }
  if (c.max_retries == 0) throw Error("max_retries must be positive");
}

SynthDataset generate_synthetic(const SynthConfig& config) {
  validate(config);
  const std::size_t k = config.num_identities;
  const std::size_t d = config.dimension;
  const double min_dist = config.separation * config.blob_stddev;
  // Cube wide enough to hold k centres at the minimum spacing with room.
  const double per_axis = std::ceil(std::pow(static_cast<double>(k), 1.0 / static_cast<double>(d)));
  const double side = 2.0 * min_dist * std::max(2.0, per_axis);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uniform(-0.5 * side, 0.5 * side);
  std::normal_distribution<double> normal(0.0, 1.0);

  SynthDataset out;
  out.centers.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < config.max_retries && !placed; ++attempt) {
      Vector c(d);
      for (double& v : c) v = uniform(rng);
      placed = true;
      for (const auto& other : out.centers) {
        if (euclidean_distance(c, other) < min_dist) {
          placed = false;
          break;
        }
      }
      if (placed) out.centers.push_back(std::move(c));
    }
    if (!placed) {
      throw Error("could not place identity centre " + std::to_string(i) + " after " +
                  std::to_string(config.max_retries) +
                  " attempts; lower the separation or increase the dimension");
    }
  }

  const auto nonreg = static_cast<std::size_t>(
      std::llround(config.fraction_nonregistered * static_cast<double>(k)));
  char name[32];
  out.embeddings.reserve(k * config.points_per_identity);
  for (std::size_t i = 0; i < k; ++i) {
    std::snprintf(name, sizeof name, "person-%03zu", i);
    const std::string identity = name;
    out.identities.push_back(identity);
    if (i >= k - nonreg) out.nonregistered.insert(identity);
    for (std::size_t j = 0; j < config.points_per_identity; ++j) {
      Embedding e;
      e.id = identity + "/" + std::to_string(j);
      e.vector.resize(d);
      for (std::size_t x = 0; x < d; ++x) {
        e.vector[x] = out.centers[i][x] + config.blob_stddev * normal(rng);
      }
      e.true_label = identity;
      out.embeddings.push_back(std::move(e));
    }
  }
  return out;
}

void tag_frames(std::vector<Embedding>& faces, const std::string& video_id,
                std::uint64_t max_offset, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> offset(0, max_offset);
  std::map<std::string, std::uint64_t> next;
  for (auto& f : faces) {
    const std::string key = f.true_label.value_or("");
    auto it = next.find(key);
    if (it == next.end()) it = next.emplace(key, offset(rng)).first;
    f.video_id = video_id;
    f.frame_index = it->second++;
  }
}

}  // namespace facematch
