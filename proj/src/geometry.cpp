#include "facematch/geometry.hpp"

#include <cmath>
#include <string>

namespace facematch {

namespace {

void require_same_dimension(VectorView a, VectorView b) {
  if (a.size() != b.size()) {
    throw Error("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()));
  }
}

}  // namespace

void validate(const Embedding& e) {
  if (e.vector.empty()) throw Error("embedding '" + e.id + "' has dimension 0");
  for (double v : e.vector) {
    if (!std::isfinite(v)) throw Error("embedding '" + e.id + "' has a non-finite component");
  }
  if (e.bbox && (e.bbox->x1 >= e.bbox->x2 || e.bbox->y1 >= e.bbox->y2)) {
    throw Error("embedding '" + e.id + "' has a degenerate bounding box");
  }
}

std::size_t validate_dataset(std::span<const Embedding> data) {
  if (data.empty()) return 0;
  const std::size_t n = data.front().dimension();
  for (const auto& e : data) {
    validate(e);
    if (e.dimension() != n) {
      throw Error("embedding '" + e.id + "' has dimension " + std::to_string(e.dimension()) +
                  ", expected " + std::to_string(n));
    }
  }
  return n;
}

double squared_euclidean_distance(VectorView a, VectorView b) {
  require_same_dimension(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double euclidean_distance(VectorView a, VectorView b) {
  return std::sqrt(squared_euclidean_distance(a, b));
}

double rmse(VectorView a, VectorView b) {
  if (a.empty()) throw Error("rmse of zero-dimensional vectors");
  return std::sqrt(squared_euclidean_distance(a, b) / static_cast<double>(a.size()));
}

Vector centroid(std::span<const Vector> members) {
  if (members.empty()) throw Error("centroid of an empty member list");
  Vector mean(members.front().size(), 0.0);
  for (const auto& m : members) {
    require_same_dimension(mean, m);
    for (std::size_t i = 0; i < m.size(); ++i) mean[i] += m[i];
  }
  const double count = static_cast<double>(members.size());
  for (double& v : mean) v /= count;
  return mean;
}

Vector centroid(std::span<const Embedding> data, std::span<const std::size_t> indices) {
  if (indices.empty()) throw Error("centroid of an empty member list");
  Vector mean(data[indices.front()].dimension(), 0.0);
  for (std::size_t idx : indices) {
    const Vector& m = data[idx].vector;
    require_same_dimension(mean, m);
    for (std::size_t i = 0; i < m.size(); ++i) mean[i] += m[i];
  }
  const double count = static_cast<double>(indices.size());
  for (double& v : mean) v /= count;
  return mean;
}

DistanceMatrix::DistanceMatrix(std::span<const Vector> points)
    : n_(points.size()), entries_(points.size() * points.size(), 0.0) {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double d = euclidean_distance(points[i], points[j]);
      entries_[i * n_ + j] = d;
      entries_[j * n_ + i] = d;
    }
  }
}

DistanceMatrix::DistanceMatrix(std::span<const Embedding> data)
    : DistanceMatrix(vectors_of(data)) {}

std::vector<Vector> vectors_of(std::span<const Embedding> data) {
  std::vector<Vector> out;
  out.reserve(data.size());
  for (const auto& e : data) out.push_back(e.vector);
  return out;
}

}  // namespace facematch
