#include "facematch/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>

namespace facematch {

namespace {

std::size_t require_data(std::span<const Vector> data) {
  if (data.empty()) throw Error("empty dataset");
  const std::size_t dim = data.front().size();
  if (dim == 0) throw Error("zero-dimensional data");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].size() != dim) {
      throw Error("point " + std::to_string(i) + " has dimension " +
                  std::to_string(data[i].size()) + ", expected " + std::to_string(dim));
    }
    for (double v : data[i]) {
      if (!std::isfinite(v)) throw Error("point " + std::to_string(i) + " is not finite");
    }
  }
  return dim;
}

void require_k(std::size_t k, std::size_t n) {
  if (k == 0) throw Error("number of clusters must be positive");
  if (k > n) {
    throw Error("number of clusters " + std::to_string(k) + " exceeds number of points " +
                std::to_string(n));
  }
}

}  // namespace

// ---------------------------------------------------------------- Clustering

Clustering Clustering::from_labels(std::span<const std::size_t> labels) {
  Clustering c;
  c.assignments_.resize(labels.size());
  std::unordered_map<std::size_t, std::size_t> remap;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(labels[i], remap.size());
    c.assignments_[i] = it->second;
  }
  c.num_clusters_ = remap.size();
  return c;
}

Clustering Clustering::single(std::size_t n_points) {
  Clustering c;
  c.assignments_.assign(n_points, 0);
  c.num_clusters_ = n_points == 0 ? 0 : 1;
  return c;
}

Clustering Clustering::singletons(std::size_t n_points) {
  Clustering c;
  c.assignments_.resize(n_points);
  std::iota(c.assignments_.begin(), c.assignments_.end(), std::size_t{0});
  c.num_clusters_ = n_points;
  return c;
}

std::vector<std::vector<std::size_t>> Clustering::members() const {
  std::vector<std::vector<std::size_t>> out(num_clusters_);
  for (std::size_t i = 0; i < assignments_.size(); ++i) out[assignments_[i]].push_back(i);
  return out;
}

std::vector<std::size_t> Clustering::sizes() const {
  std::vector<std::size_t> out(num_clusters_, 0);
  for (std::size_t a : assignments_) ++out[a];
  return out;
}

// ---------------------------------------------------------------- k-means

namespace {

std::vector<std::size_t> seed_plus_plus(std::span<const Vector> data, std::size_t k,
                                        std::mt19937_64& rng) {
  const std::size_t n = data.size();
  std::vector<std::size_t> chosen;
  std::vector<bool> taken(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  chosen.push_back(first);
  taken[first] = true;

  while (chosen.size() < k) {
    const Vector& last = data[chosen.back()];
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_euclidean_distance(data[i], last));
      if (!taken[i]) total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || d2[i] <= 0.0) continue;
        pick = i;
        target -= d2[i];
        if (target < 0.0) break;
      }
    }
    if (pick == n) {
      // Only duplicates of chosen centres remain.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i)
        if (!taken[i]) free.push_back(i);
      pick = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    }
    chosen.push_back(pick);
    taken[pick] = true;
  }
  return chosen;
}

std::vector<std::size_t> seed_random(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(k);
  return idx;
}

}  // namespace

KMeansResult kmeans_detailed(std::span<const Vector> data, std::size_t k,
                             const KMeansOptions& options) {
  const std::size_t dim = require_data(data);
  const std::size_t n = data.size();
  require_k(k, n);
  if (options.max_iter == 0) throw Error("max_iter must be positive");

  std::mt19937_64 rng(options.seed);
  const auto seeds = options.init == KMeansInit::PlusPlus ? seed_plus_plus(data, k, rng)
                                                          : seed_random(n, k, rng);
  std::vector<Vector> centers;
  centers.reserve(k);
  for (std::size_t s : seeds) centers.push_back(data[s]);

  constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> assign(n, kUnassigned);
  std::vector<double> dist(n, 0.0);
  KMeansResult result;

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = assign[i];
      double best_d = best == kUnassigned ? std::numeric_limits<double>::infinity()
                                          : squared_euclidean_distance(data[i], centers[best]);
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_euclidean_distance(data[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best != assign[i]) changed = true;
      assign[i] = best;
      dist[i] = best_d;
    }

    // Empty-cluster repair: the point farthest from its centre (in a cluster
    // that can spare it) becomes the sole member of the empty cluster.
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t a : assign) ++counts[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[assign[i]] < 2) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      --counts[assign[far]];
      assign[far] = c;
      counts[c] = 1;
      dist[far] = 0.0;
      changed = true;
    }

    for (auto& center : centers) std::fill(center.begin(), center.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim; ++d) centers[assign[i]][d] += data[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (double& v : centers[c]) v /= static_cast<double>(counts[c]);
    }

    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) objective += squared_euclidean_distance(data[i], centers[assign[i]]);
    result.objective_history.push_back(objective);
    result.iterations = iter + 1;
    if (!changed) {
      result.converged = true;
      break;
    }
  }

  result.clustering = Clustering::from_labels(assign);
  result.centroids.resize(k);
  for (std::size_t i = 0; i < n; ++i) result.centroids[result.clustering[i]] = centers[assign[i]];
  return result;
}

Clustering kmeans(std::span<const Vector> data, std::size_t k, std::uint64_t seed,
                  std::size_t max_iter) {
  KMeansOptions options;
  options.seed = seed;
  options.max_iter = max_iter;
  return kmeans_detailed(data, k, options).clustering;
}

// ------------------------------------------------- affinity propagation

AffinityResult affinity_propagation(std::span<const Vector> data, const AffinityOptions& options) {
  require_data(data);
  const std::size_t n = data.size();
  if (n < 2) throw Error("affinity propagation needs at least two points");
  if (!(options.damping >= 0.5 && options.damping < 1.0)) {
    throw Error("damping must lie in [0.5, 1)");
  }
  if (options.max_iter == 0 || options.convergence_iter == 0) {
    throw Error("max_iter and convergence_iter must be positive");
  }

  std::vector<double> S(n * n, 0.0);
  std::vector<double> off;
  off.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (i == k) continue;
      S[i * n + k] = -squared_euclidean_distance(data[i], data[k]);
      off.push_back(S[i * n + k]);
    }
  }
  double preference;
  if (options.preference) {
    preference = *options.preference;
  } else {
    std::sort(off.begin(), off.end());
    const std::size_t m = off.size();
    preference = m % 2 ? off[m / 2] : 0.5 * (off[m / 2 - 1] + off[m / 2]);
  }
  for (std::size_t i = 0; i < n; ++i) S[i * n + i] = preference;

  AffinityResult result;
  const auto [lo, hi] = std::minmax_element(off.begin(), off.end());
  if (*lo == *hi) {
    // Mutually equal similarities: one cluster unless every point prefers itself.
    result.converged = true;
    if (preference > *hi) {
      result.clustering = Clustering::singletons(n);
      result.exemplars.resize(n);
      std::iota(result.exemplars.begin(), result.exemplars.end(), std::size_t{0});
    } else {
      result.clustering = Clustering::single(n);
      result.exemplars = {0};
    }
    return result;
  }

  // Bias-free jitter so symmetric configurations do not oscillate.
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = std::numeric_limits<double>::min();
  for (double& s : S) s += (eps * std::abs(s) + tiny * 100.0) * normal(rng);

  std::vector<double> R(n * n, 0.0), A(n * n, 0.0);
  std::vector<bool> exemplar(n, false), previous(n, false);
  std::size_t stable = 0;
  const double damp = options.damping;

  for (std::size_t it = 0; it < options.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double first = -std::numeric_limits<double>::infinity();
      double second = first;
      std::size_t arg = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const double v = A[i * n + k] + S[i * n + k];
        if (v > first) {
          second = first;
          first = v;
          arg = k;
        } else if (v > second) {
          second = v;
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double fresh = S[i * n + k] - (k == arg ? second : first);
        R[i * n + k] = damp * R[i * n + k] + (1.0 - damp) * fresh;
      }
    }

    for (std::size_t k = 0; k < n; ++k) {
      double column = R[k * n + k];
      for (std::size_t i = 0; i < n; ++i) {
        if (i != k) column += std::max(0.0, R[i * n + k]);
      }
      for (std::size_t i = 0; i < n; ++i) {
        double fresh;
        if (i == k) {
          fresh = column - R[k * n + k];
        } else {
          fresh = std::min(0.0, column - std::max(0.0, R[i * n + k]));
        }
        A[i * n + k] = damp * A[i * n + k] + (1.0 - damp) * fresh;
      }
    }

    std::size_t count = 0;
    for (std::size_t k = 0; k < n; ++k) {
      exemplar[k] = A[k * n + k] + R[k * n + k] > 0.0;
      count += exemplar[k];
    }
    stable = (it > 0 && exemplar == previous) ? stable + 1 : 1;
    previous = exemplar;
    result.iterations = it + 1;
    if (count > 0 && stable >= options.convergence_iter) {
      result.converged = true;
      break;
    }
  }

  std::vector<std::size_t> centers;
  for (std::size_t k = 0; k < n; ++k)
    if (exemplar[k]) centers.push_back(k);

  if (centers.empty()) {
    result.converged = false;
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (A[k * n + k] + R[k * n + k] > A[best * n + best] + R[best * n + best]) best = k;
    }
    result.clustering = Clustering::single(n);
    result.exemplars = {best};
    return result;
  }

  auto nearest_center = [&](std::span<const std::size_t> cs) {
    std::vector<std::size_t> label(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < cs.size(); ++j) {
        if (S[i * n + cs[j]] > S[i * n + cs[best]]) best = j;
      }
      label[i] = best;
    }
    for (std::size_t j = 0; j < cs.size(); ++j) label[cs[j]] = j;
    return label;
  };

  // Refine: each cluster's exemplar becomes the member with the greatest
  // summed similarity from the others.
  auto label = nearest_center(centers);
  for (std::size_t j = 0; j < centers.size(); ++j) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (label[i] == j) members.push_back(i);
    double best_sum = -std::numeric_limits<double>::infinity();
    for (std::size_t m : members) {
      double sum = 0.0;
      for (std::size_t i : members) sum += S[i * n + m];
      if (sum > best_sum) {
        best_sum = sum;
        centers[j] = m;
      }
    }
  }
  label = nearest_center(centers);

  result.clustering = Clustering::from_labels(label);
  result.exemplars.resize(centers.size());
  for (std::size_t j = 0; j < centers.size(); ++j) {
    result.exemplars[result.clustering[centers[j]]] = centers[j];
  }
  return result;
}

// ------------------------------------------------------- Ward linkage

WardDendrogram::WardDendrogram(std::span<const Vector> data) {
  require_data(data);
  n_ = data.size();
  const std::size_t n = n_;
  if (n < 2) return;

  // cost(i, j): within-cluster sum-of-squares increase when merging i and j,
  // n_i n_j / (n_i + n_j) * |c_i - c_j|^2.
  std::vector<double> cost(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = 0.5 * squared_euclidean_distance(data[i], data[j]);
      cost[i * n + j] = c;
      cost[j * n + i] = c;
    }
  }

  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> nn(n, 0);
  std::vector<double> nn_cost(n, 0.0);

  auto refresh = [&](std::size_t i) {
    nn_cost[i] = std::numeric_limits<double>::infinity();
    nn[i] = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      if (cost[i * n + j] < nn_cost[i]) {
        nn_cost[i] = cost[i * n + j];
        nn[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  merges_.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t a = n, b = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const std::size_t lo = std::min(i, nn[i]);
      const std::size_t hi = std::max(i, nn[i]);
      if (nn_cost[i] < best || (nn_cost[i] == best && (lo < a || (lo == a && hi < b)))) {
        best = nn_cost[i];
        a = lo;
        b = hi;
      }
    }

    const double na = static_cast<double>(size[a]);
    const double nb = static_cast<double>(size[b]);
    merges_.push_back({a, b, best, size[a] + size[b]});
    active[b] = false;

    // Lance-Williams update of the Ward cost.
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a) continue;
      const double nk = static_cast<double>(size[k]);
      const double c = ((na + nk) * cost[a * n + k] + (nb + nk) * cost[b * n + k] - nk * best) /
                       (na + nb + nk);
      cost[a * n + k] = c;
      cost[k * n + a] = c;
    }
    size[a] += size[b];

    refresh(a);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a) continue;
      if (nn[k] == a || nn[k] == b) {
        refresh(k);
      } else {
        const double c = cost[k * n + a];
        if (c < nn_cost[k] || (c == nn_cost[k] && a < nn[k])) {
          nn_cost[k] = c;
          nn[k] = a;
        }
      }
    }
  }
}

Clustering WardDendrogram::cut(std::size_t k) const {
  require_k(k, n_);
  std::vector<std::size_t> parent(n_);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t m = 0; m < n_ - k; ++m) parent[find(merges_[m].second)] = find(merges_[m].first);
  std::vector<std::size_t> root(n_);
  for (std::size_t i = 0; i < n_; ++i) root[i] = find(i);
  return Clustering::from_labels(root);
}

Clustering agglomerative_ward(std::span<const Vector> data, std::size_t k) {
  require_data(data);
  require_k(k, data.size());
  return WardDendrogram(data).cut(k);
}

// --------------------------------------------------------- silhouette

SilhouetteReport silhouette(const DistanceMatrix& distances, const Clustering& clustering) {
  const std::size_t n = clustering.num_points();
  if (distances.size() != n) throw Error("distance matrix does not match the clustering");
  const std::size_t k = clustering.num_clusters();
  if (k < 2) throw Error("silhouette coefficient requires at least two clusters");

  const auto sizes = clustering.sizes();
  SilhouetteReport report;
  report.coefficients.resize(n);
  report.intra.resize(n);
  report.nearest.resize(n);
  std::vector<double> sums(k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) sums[clustering[j]] += distances(i, j);
    const std::size_t own = clustering[i];
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    double a = 0.0;
    double s = 0.0;
    if (sizes[own] > 1) {
      a = sums[own] / static_cast<double>(sizes[own] - 1);
      const double denom = std::max(a, b);
      s = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    report.intra[i] = a;
    report.nearest[i] = b;
    report.coefficients[i] = s;
    total += s;
  }
  report.score = total / static_cast<double>(n);
  return report;
}

SilhouetteReport silhouette(std::span<const Vector> data, const Clustering& clustering) {
  require_data(data);
  return silhouette(DistanceMatrix(data), clustering);
}

// ------------------------------------------------- unknown-K search

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::KMeans:
      return "kmeans";
    case Algorithm::Ward:
      return "ward";
    case Algorithm::AffinityPropagation:
      return "ap";
  }
  return "?";
}

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "kmeans" || name == "km") return Algorithm::KMeans;
  if (name == "ward" || name == "agglomerative" || name == "ac") return Algorithm::Ward;
  if (name == "ap" || name == "affinity") return Algorithm::AffinityPropagation;
  throw Error("unknown clustering algorithm '" + std::string(name) + "'");
}

void validate(const KSearchConfig& config) {
  if (config.patience < 1) throw Error("patience must be at least 1");
  if (!(config.min_silhouette >= 0.0 && config.min_silhouette <= 1.0)) {
    throw Error("min_silhouette must lie in [0, 1]");
  }
  if (config.max_clusters && *config.max_clusters == 0) throw Error("max_clusters must be positive");
}

KSearchResult estimate_clustering_detailed(std::span<const Vector> data, Algorithm algorithm,
                                           const KSearchConfig& config) {
  require_data(data);
  validate(config);
  if (algorithm == Algorithm::AffinityPropagation) {
    throw Error("the k search applies to kmeans and ward only");
  }
  const std::size_t n = data.size();
  KSearchResult result;
  result.clustering = Clustering::single(n);
  const std::size_t cap = std::min(config.max_clusters.value_or(n), n);
  if (cap < 2) {
    result.collapsed = n > 1;
    return result;
  }

  const DistanceMatrix distances(data);
  std::optional<WardDendrogram> dendrogram;
  if (algorithm == Algorithm::Ward) dendrogram.emplace(data);

  double best = -std::numeric_limits<double>::infinity();
  Clustering best_clustering;
  std::size_t misses = 0;
  for (std::size_t k = 2; k <= cap; ++k) {
    Clustering c = dendrogram ? dendrogram->cut(k) : kmeans(data, k, config.seed);
    const double score = silhouette(distances, c).score;
    result.trace.push_back({k, score});
    if (score > best) {
      best = score;
      best_clustering = std::move(c);
      result.best_k = k;
      misses = 0;
    } else if (++misses >= config.patience) {
      break;
    }
  }
  result.best_score = best;
  if (best < config.min_silhouette) {
    result.collapsed = true;
  } else {
    result.clustering = std::move(best_clustering);
  }
  return result;
}

Clustering estimate_clustering(std::span<const Vector> data, Algorithm algorithm,
                               const KSearchConfig& config) {
  return estimate_clustering_detailed(data, algorithm, config).clustering;
}

}  // namespace facematch
