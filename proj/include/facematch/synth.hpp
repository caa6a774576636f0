#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "facematch/geometry.hpp"

namespace facematch {

struct SynthConfig {
  std::size_t num_identities = 10;
  std::size_t points_per_identity = 10;
  std::size_t dimension = 16;
  double blob_stddev = 1.0;
  /// Minimum distance between identity centres, in units of blob_stddev.
  double separation = 10.0;
  std::uint64_t seed = 0;
  double fraction_nonregistered = 0.0;
  std::size_t max_retries = 10000;  // per centre
};

void validate(const SynthConfig& config);

struct SynthDataset {
  /// Identity-major order: all faces of identity 0, then identity 1, ...
  std::vector<Embedding> embeddings;
  std::vector<Vector> centers;
  std::vector<std::string> identities;
  /// Identities that must be withheld from any gallery.
  std::set<std::string> nonregistered;

  bool registered(const std::string& identity) const { return !nonregistered.count(identity); }
};

/// Isotropic Gaussian blobs around centres rejection-sampled from a cube, at
/// pairwise distance >= separation * blob_stddev. The last
/// round(fraction_nonregistered * num_identities) identities are flagged
/// non-registered. Bit-identical for a fixed seed.
SynthDataset generate_synthetic(const SynthConfig& config);

/// Faces of one identity get consecutive frames starting at a random offset
/// in [0, max_offset]. Sets video_id and frame_index on every face.
void tag_frames(std::vector<Embedding>& faces, const std::string& video_id,
                std::uint64_t max_offset, std::uint64_t seed);

}  // namespace facematch
