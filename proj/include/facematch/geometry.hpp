#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace facematch {

/// Raised for every contract violation in the library (bad dimensions,
/// empty inputs, malformed files).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vector = std::vector<double>;
using VectorView = std::span<const double>;

/// Pixel rectangle, upper-left (x1, y1) to lower-right (x2, y2).
struct BoundingBox {
  std::uint32_t x1 = 0;
  std::uint32_t y1 = 0;
  std::uint32_t x2 = 0;
  std::uint32_t y2 = 0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// One face observation: a point in R^n plus optional provenance.
struct Embedding {
  std::string id;
  Vector vector;
  std::optional<std::string> video_id;
  std::optional<std::uint64_t> frame_index;
  std::optional<BoundingBox> bbox;
  std::optional<std::string> true_label;

  std::size_t dimension() const { return vector.size(); }

  friend bool operator==(const Embedding&, const Embedding&) = default;
};

/// Checks finiteness, n >= 1 and bbox ordering. Throws Error.
void validate(const Embedding& e);

/// Checks every embedding and that all share one dimension; returns it.
std::size_t validate_dataset(std::span<const Embedding> data);

double squared_euclidean_distance(VectorView a, VectorView b);
double euclidean_distance(VectorView a, VectorView b);

/// Root mean square of the component differences; equals
/// euclidean_distance(a, b) / sqrt(n).
double rmse(VectorView a, VectorView b);

/// Component-wise arithmetic mean.
Vector centroid(std::span<const Vector> members);
Vector centroid(std::span<const Embedding> data, std::span<const std::size_t> indices);

/// Dense symmetric matrix of pairwise Euclidean distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::span<const Vector> points);
  explicit DistanceMatrix(std::span<const Embedding> data);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
};

/// Extracts the raw vectors of a dataset.
std::vector<Vector> vectors_of(std::span<const Embedding> data);

}  // namespace facematch
