#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "facematch/evaluation.hpp"
#include "facematch/matching.hpp"
#include "facematch/pipeline.hpp"
#include "facematch/synth.hpp"
#include "facematch/timeline.hpp"

namespace py = pybind11;
using namespace facematch;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Vector> rows(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d array of shape (n, dim)");
  const auto n = static_cast<std::size_t>(a.shape(0));
  const auto d = static_cast<std::size_t>(a.shape(1));
  std::vector<Vector> out(n);
  const double* p = a.data();
  for (std::size_t i = 0; i < n; ++i) out[i].assign(p + i * d, p + (i + 1) * d);
  return out;
}

Vector row(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-d array");
  return Vector(a.data(), a.data() + a.shape(0));
}

Array to_array(const std::vector<Vector>& vs) {
  const std::size_t d = vs.empty() ? 0 : vs.front().size();
  Array out({vs.size(), d});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = vs[i][j];
  return out;
}

KSearchConfig search_config(std::size_t patience, double min_silhouette,
                            std::optional<std::size_t> max_clusters, std::uint64_t seed) {
  KSearchConfig c;
  c.patience = patience;
  c.min_silhouette = min_silhouette;
  c.max_clusters = max_clusters;
  c.seed = seed;
  return c;
}

LabeledClusterSet gallery_from(const Array& centroids, const std::vector<std::string>& labels) {
  const auto vs = rows(centroids);
  if (vs.size() != labels.size()) throw py::value_error("one label per gallery row");
  std::vector<LabeledCluster> entries;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    LabeledCluster c;
    c.label = labels[i];
    c.member_ids = {labels[i]};
    c.centroid = c.representative = vs[i];
    c.label_histogram[labels[i]] = 1;
    entries.push_back(std::move(c));
  }
  return LabeledClusterSet(vs.empty() ? 0 : vs.front().size(), std::move(entries));
}

}  // namespace

PYBIND11_MODULE(_facematch, m) {
  m.doc() = "Face embedding clustering, open-set matching and evaluation";
  py::register_exception<Error>(m, "FacematchError", PyExc_ValueError);

  m.def(
      "generate_synthetic",
      [](std::size_t identities, std::size_t points, std::size_t dim, double stddev, double separation,
         std::uint64_t seed, double nonregistered) {
        SynthConfig c;
        c.num_identities = identities;
        c.points_per_identity = points;
        c.dimension = dim;
        c.blob_stddev = stddev;
        c.separation = separation;
        c.seed = seed;
        c.fraction_nonregistered = nonregistered;
        const auto d = generate_synthetic(c);
        std::vector<std::string> ids, labels;
        for (const auto& e : d.embeddings) {
          ids.push_back(e.id);
          labels.push_back(*e.true_label);
        }
        py::dict out;
        out["vectors"] = to_array(vectors_of(d.embeddings));
        out["ids"] = ids;
        out["labels"] = labels;
        out["centers"] = to_array(d.centers);
        out["nonregistered"] = d.nonregistered;
        return out;
      },
      py::arg("num_identities") = 10, py::arg("points_per_identity") = 10, py::arg("dimension") = 16,
      py::arg("blob_stddev") = 1.0, py::arg("separation") = 10.0, py::arg("seed") = 0,
      py::arg("fraction_nonregistered") = 0.0);

  m.def(
      "kmeans",
      [](const Array& data, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
        return kmeans(rows(data), k, seed, max_iter).assignments();
      },
      py::arg("data"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 300);

  m.def(
      "agglomerative_ward",
      [](const Array& data, std::size_t k) { return agglomerative_ward(rows(data), k).assignments(); },
      py::arg("data"), py::arg("k"));

  m.def(
      "affinity_propagation",
      [](const Array& data, double damping, std::size_t max_iter, std::size_t convergence_iter,
         std::uint64_t seed) {
        AffinityOptions o;
        o.damping = damping;
        o.max_iter = max_iter;
        o.convergence_iter = convergence_iter;
        o.seed = seed;
        const auto r = affinity_propagation(rows(data), o);
        return py::make_tuple(r.clustering.assignments(), r.exemplars, r.converged);
      },
      py::arg("data"), py::arg("damping") = 0.5, py::arg("max_iter") = 200, py::arg("convergence_iter") = 15,
      py::arg("seed") = 0, "Returns (labels, exemplars, converged).");

  m.def(
      "silhouette",
      [](const Array& data, const std::vector<std::size_t>& labels) {
        const auto r = silhouette(rows(data), Clustering::from_labels(labels));
        return py::make_tuple(r.coefficients, r.score);
      },
      py::arg("data"), py::arg("labels"), "Returns (per-sample coefficients, mean score).");

  m.def(
      "estimate_clustering",
      [](const Array& data, const std::string& algorithm, std::size_t patience, double min_silhouette,
         std::optional<std::size_t> max_clusters, std::uint64_t seed) {
        return estimate_clustering(rows(data), algorithm_from_string(algorithm),
                                   search_config(patience, min_silhouette, max_clusters, seed))
            .assignments();
      },
      py::arg("data"), py::arg("algorithm") = "ward", py::arg("patience") = 5, py::arg("min_silhouette") = 0.2,
      py::arg("max_clusters") = py::none(), py::arg("seed") = 0);

  m.def(
      "v_measure",
      [](const std::vector<std::string>& truth, const std::vector<std::size_t>& clusters, double beta) {
        const auto r = v_measure(contingency(truth, clusters), beta);
        py::dict out;
        out["homogeneity"] = r.homogeneity;
        out["completeness"] = r.completeness;
        out["v_measure"] = r.v_measure;
        return out;
      },
      py::arg("true_labels"), py::arg("clusters"), py::arg("beta") = 1.0);

  m.def(
      "similarity", [](const Array& q, const Array& r, double eps) { return similarity(row(q), row(r), eps); },
      py::arg("query"), py::arg("reference"), py::arg("rmse_epsilon") = 1e-12);
  m.def(
      "truncate_top_alpha",
      [](const std::vector<double>& s, std::size_t alpha) { return truncate_top_alpha(s, alpha); },
      py::arg("similarities"), py::arg("alpha"));
  m.def(
      "match_probabilities", [](const std::vector<double>& s) { return match_probabilities(s); },
      py::arg("truncated"));

  m.def(
      "match",
      [](const Array& query, const Array& gallery, const std::vector<std::string>& labels, std::size_t alpha,
         double threshold) {
        MatchConfig c;
        c.alpha = alpha;
        c.probability_threshold = threshold;
        const auto d = match_embedding(row(query), gallery_from(gallery, labels), c);
        py::object label = d.matched() ? py::object(py::str(d.match->label)) : py::none();
        return py::make_tuple(label, d.probabilities);
      },
      py::arg("query"), py::arg("gallery"), py::arg("labels"), py::arg("alpha") = 5,
      py::arg("threshold") = 0.5, "Returns (label or None, probabilities).");

  m.def(
      "emit_timeline",
      [](const std::vector<std::pair<std::string, std::uint64_t>>& records, double fps) {
        std::vector<TimelineRecord> rs;
        for (const auto& [id, f] : records) rs.push_back({id, f});
        py::list out;
        for (const auto& s : emit_timeline(rs, fps))
          out.append(py::make_tuple(s.identity, s.start_s, s.end_s, s.first_frame, s.last_frame));
        return out;
      },
      py::arg("records"), py::arg("fps") = 1.0,
      "records are (identity, frame) pairs; returns (identity, start_s, end_s, first, last) tuples.");
}
