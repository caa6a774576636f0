#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "facematch/evaluation.hpp"
#include "facematch/io.hpp"
#include "facematch/pipeline.hpp"
#include "facematch/synth.hpp"
#include "facematch/timeline.hpp"
#include "json.hpp"

using namespace facematch;
using nlohmann::json;

namespace {

struct SearchFlags {
  std::size_t patience = 5;
  double min_silhouette = 0.2;
  std::size_t max_clusters = 0;  // 0 = no cap
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--patience", patience, "consecutive non-improving k before the search stops")
        ->check(CLI::PositiveNumber);
    app->add_option("--min-silhouette", min_silhouette, "below this best score everything is one cluster")
        ->check(CLI::Range(-1.0, 1.0));
    app->add_option("--max-clusters", max_clusters, "upper bound on k (0 = n-1)");
    app->add_option("--seed", seed, "seed for k-means and affinity propagation");
  }

  KSearchConfig config() const {
    KSearchConfig c;
    c.patience = patience;
    c.min_silhouette = min_silhouette;
    if (max_clusters) c.max_clusters = max_clusters;
    c.seed = seed;
    return c;
  }
};

struct ClusterFlags {
  std::string algo = "ward";
  std::size_t k = 0;
  bool auto_k = false;
  double damping = 0.5;
  std::size_t ap_iter = 200;
  SearchFlags search;

  void add(CLI::App* app) {
    app->add_option("--algo", algo, "ward, kmeans or ap")->check(CLI::IsMember({"ward", "kmeans", "ap"}));
    auto* k_opt = app->add_option("--k", k, "fixed number of clusters")->check(CLI::PositiveNumber);
    app->add_flag("--auto-k", auto_k, "choose k by silhouette (default without --k)")->excludes(k_opt);
    app->add_option("--damping", damping, "affinity propagation damping")->check(CLI::Range(0.5, 1.0));
    app->add_option("--ap-max-iter", ap_iter, "affinity propagation iterations")->check(CLI::PositiveNumber);
    search.add(app);
  }

  ClusteringParams params() const {
    ClusteringParams p;
    p.algorithm = algorithm_from_string(algo);
    if (k) p.k = k;
    p.search = search.config();
    p.affinity.damping = damping;
    p.affinity.max_iter = ap_iter;
    p.affinity.seed = search.seed;
    return p;
  }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

std::string dump(const json& j) { return j.dump(1) + "\n"; }

// ------------------------------------------------------------------ synth

struct SynthFlags {
  SynthConfig cfg;
  std::size_t gallery_points = 0;
  std::size_t videos = 1;
  std::uint64_t max_offset = 20;
  std::string out, out_gallery, out_video;
};

void run_synth(const SynthFlags& f) {
  auto cfg = f.cfg;
  if (f.gallery_points == 0) {
    if (f.out.empty()) throw Error("synth: --out is required without --gallery-points");
    write_embeddings(f.out, generate_synthetic(cfg).embeddings);
    return;
  }
  if (f.out_gallery.empty() || f.out_video.empty()) {
    throw Error("synth: --gallery-points needs --out-gallery and --out-video");
  }
  if (f.videos == 0) throw Error("synth: --videos must be positive");
  const std::size_t video_points = cfg.points_per_identity;
  cfg.points_per_identity = f.gallery_points + video_points;
  const auto data = generate_synthetic(cfg);

  std::vector<Embedding> gallery;
  std::vector<std::vector<Embedding>> videos(f.videos);
  for (std::size_t i = 0; i < data.identities.size(); ++i) {
    const bool registered = data.registered(data.identities[i]);
    for (std::size_t j = 0; j < cfg.points_per_identity; ++j) {
      const auto& e = data.embeddings[i * cfg.points_per_identity + j];
      if (j < f.gallery_points) {
        if (registered) gallery.push_back(e);
      } else {
        videos[i % f.videos].push_back(e);
      }
    }
  }
  std::vector<Embedding> video;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    tag_frames(videos[v], "video-" + std::to_string(v), f.max_offset, cfg.seed * 1000 + v);
    video.insert(video.end(), videos[v].begin(), videos[v].end());
  }
  write_embeddings(f.out_gallery, gallery);
  write_embeddings(f.out_video, video);
}

// ---------------------------------------------------------------- cluster

void run_cluster(const std::string& in, const std::string& out, const std::string& report,
                 const ClusterFlags& f) {
  const auto faces = read_embeddings(in);
  validate_dataset(faces);
  if (faces.empty()) throw Error("no embeddings in '" + in + "'");
  const auto params = f.params();
  const auto vectors = vectors_of(faces);

  json rep{{"algorithm", to_string(params.algorithm)}, {"faces", faces.size()}};
  Clustering clustering;
  if (params.algorithm == Algorithm::AffinityPropagation) {
    if (f.k) throw Error("affinity propagation chooses its own number of clusters; drop --k");
    const auto r = faces.size() == 1 ? AffinityResult{Clustering::single(1), {0}, true, 0}
                                     : affinity_propagation(vectors, params.affinity);
    clustering = r.clustering;
    rep["converged"] = r.converged;
    rep["iterations"] = r.iterations;
  } else if (!params.k) {
    const auto r = estimate_clustering_detailed(vectors, params.algorithm, params.search);
    clustering = r.clustering;
    json trace = json::array();
    for (const auto& s : r.trace) trace.push_back({{"k", s.k}, {"silhouette", s.score}});
    rep["best_k"] = r.best_k;
    rep["best_silhouette"] = r.best_score;
    rep["collapsed"] = r.collapsed;
    rep["trace"] = trace;
  } else {
    clustering = run_clustering(vectors, params);
  }
  rep["k"] = clustering.num_clusters();
  rep["sizes"] = clustering.sizes();

  std::ostringstream text;
  write_assignments(text, faces, clustering, params.algorithm);
  emit(text.str(), out);
  if (!report.empty()) write_file_atomic(report, dump(rep));
}

// ------------------------------------------------------------------ label

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<std::string> ask_labels(std::span<const Embedding> faces, const Clustering& c) {
  std::vector<std::string> labels;
  const auto members = c.members();
  for (std::size_t k = 0; k < members.size(); ++k) {
    std::cerr << "cluster " << k << " (" << members[k].size() << " faces:";
    for (std::size_t i = 0; i < std::min<std::size_t>(members[k].size(), 5); ++i)
      std::cerr << ' ' << faces[members[k][i]].id;
    std::cerr << (members[k].size() > 5 ? " ...)" : ")") << " label: " << std::flush;
    std::string line;
    if (!std::getline(std::cin, line) || line.empty()) throw Error("no label given for cluster " + std::to_string(k));
    labels.push_back(line);
  }
  return labels;
}

void run_label(const std::string& in, const std::string& store_path, const std::string& clusters_path,
               const std::string& labels_path, bool interactive, const ClusterFlags& f) {
  const auto faces = read_embeddings(in);
  validate_dataset(faces);
  if (faces.empty()) throw Error("no embeddings in '" + in + "'");
  const auto params = f.params();
  const Clustering clustering = clusters_path.empty()
                                    ? run_clustering(vectors_of(faces), params)
                                    : clustering_for(faces, read_assignments(clusters_path));
  std::optional<std::vector<std::string>> labels;
  if (!labels_path.empty()) {
    auto in_file = std::ifstream(labels_path);
    if (!in_file) throw Error("cannot open '" + labels_path + "'");
    labels = read_lines(in_file);
  } else if (interactive) {
    labels = ask_labels(faces, clustering);
  }
  ClusterStore store;
  store.gallery = label_clusters(faces, clustering, labels);
  store.params = params;
  store.num_faces = faces.size();
  write_store(store_path, store);
  std::cerr << store.gallery.size() << " labelled clusters from " << clustering.num_clusters()
            << " clusters\n";
}

// ------------------------------------------------------------------ match

void run_match(const std::string& in, const std::string& store_path, const std::string& out,
               const std::string& report, const MatchConfig& mc, const SearchFlags& search) {
  const auto faces = read_embeddings(in);
  const auto store = read_store(store_path);
  const auto r = recognize(faces, store.gallery, mc, search.config());
  std::ostringstream text;
  write_face_labels(text, face_label_records(faces, r));
  emit(text.str(), out);
  if (!report.empty()) write_file_atomic(report, decisions_to_json(r, faces));
}

// --------------------------------------------------------------- evaluate

using ClusterKey = std::pair<std::string, std::size_t>;  // video, local cluster

std::map<std::string, const FaceLabelRecord*> records_by_id(const std::vector<FaceLabelRecord>& recs) {
  std::map<std::string, const FaceLabelRecord*> out;
  for (const auto& r : recs)
    if (!out.emplace(r.id, &r).second) throw Error("duplicate face '" + r.id + "' in label file");
  return out;
}

const std::string& truth_of(const Embedding& e) {
  if (!e.true_label) throw Error("face '" + e.id + "' has no ground-truth label");
  return *e.true_label;
}

std::string evaluate_vmeasure(const std::vector<Embedding>& faces, const std::string& clusters_path,
                              double beta) {
  if (clusters_path.empty()) throw Error("--mode vmeasure needs --clusters");
  const auto c = clustering_for(faces, read_assignments(clusters_path));
  std::vector<std::string> truth;
  for (const auto& f : faces) truth.push_back(truth_of(f));
  return vmeasure_to_json(v_measure(contingency(truth, c.assignments()), beta));
}

std::string evaluate_match(const std::vector<Embedding>& faces, const std::vector<FaceLabelRecord>& recs,
                           const LabeledClusterSet& gallery) {
  const auto by_id = records_by_id(recs);
  std::map<ClusterKey, std::vector<std::string>> truths;
  std::map<ClusterKey, std::optional<std::string>> predicted;
  for (const auto& f : faces) {
    const auto it = by_id.find(f.id);
    if (it == by_id.end()) throw Error("face '" + f.id + "' missing from the label file");
    const ClusterKey key{it->second->video_id.value_or(""), it->second->cluster};
    truths[key].push_back(truth_of(f));
    auto [p, inserted] = predicted.try_emplace(key, it->second->label);
    if (!inserted && p->second != it->second->label) throw Error("cluster with mixed predicted labels");
  }
  std::vector<RegisteredOutcome> reg;
  std::vector<MatchDecision> unreg;
  for (const auto& [key, labels] : truths) {
    MatchDecision d;
    if (const auto& p = predicted[key]) {
      const auto idx = gallery.find(*p);
      if (!idx) throw Error("predicted label '" + *p + "' is not in the store");
      d.match = Match{*p, *idx, 1.0};
    }
    const auto truth = majority_label(labels).label;
    if (gallery.find(truth)) {
      reg.push_back({truth, std::move(d)});
    } else {
      unreg.push_back(std::move(d));
    }
  }
  return match_metrics_to_json(match_metrics(reg, unreg, gallery));
}

std::string evaluate_video(const std::vector<Embedding>& faces, const std::vector<FaceLabelRecord>& recs,
                           const LabeledClusterSet& gallery) {
  const auto by_id = records_by_id(recs);
  std::map<std::string, std::map<std::uint64_t, FrameFaces>> truth, pred;
  for (const auto& f : faces) {
    if (!f.frame_index) throw Error("face '" + f.id + "' has no frame index");
    const std::string video = f.video_id.value_or("");
    std::optional<std::string> t;
    if (gallery.find(truth_of(f))) t = *f.true_label;
    auto& tf = truth[video][*f.frame_index];
    tf.frame_index = *f.frame_index;
    tf.faces.push_back({f.id, t});
  }
  for (const auto& r : recs) {
    if (!r.frame_index) throw Error("label record '" + r.id + "' has no frame index");
    auto& pf = pred[r.video_id.value_or("")][*r.frame_index];
    pf.frame_index = *r.frame_index;
    pf.faces.push_back({r.id, r.label});
  }
  std::set<std::string> videos;
  for (const auto& [v, _] : truth) videos.insert(v);
  for (const auto& [v, _] : pred) videos.insert(v);

  auto flatten = [](const std::map<std::uint64_t, FrameFaces>& m) {
    std::vector<FrameFaces> out;
    for (const auto& [_, f] : m) out.push_back(f);
    return out;
  };
  json per_video = json::object();
  std::size_t correct = 0, predicted = 0, total = 0, frames = 0, exact = 0;
  for (const auto& v : videos) {
    const auto s = score_video(flatten(truth[v]), flatten(pred[v]));
    per_video[v] = json::parse(video_score_to_json(s));
    correct += s.correct_faces;
    predicted += s.predicted_faces;
    total += s.truth_faces;
    frames += s.frames;
    exact += s.exact_frames;
  }
  const double p = predicted ? static_cast<double>(correct) / static_cast<double>(predicted) : 1.0;
  const double r = total ? static_cast<double>(correct) / static_cast<double>(total) : 1.0;
  return dump({{"videos", per_video},
               {"total",
                {{"precision", p},
                 {"recall", r},
                 {"f1", p + r > 0 ? 2 * p * r / (p + r) : 0.0},
                 {"frames", frames},
                 {"exact_frames", exact},
                 {"truth_faces", total},
                 {"predicted_faces", predicted},
                 {"correct_faces", correct}}}});
}

// --------------------------------------------------------------- timeline

void run_timeline(const std::string& labels_path, const std::string& video, double fps, bool as_json,
                  const std::string& out) {
  const auto recs = read_face_labels(labels_path);
  std::set<std::string> videos;
  for (const auto& r : recs) videos.insert(r.video_id.value_or(""));
  std::string chosen = video;
  if (chosen.empty()) {
    if (videos.size() > 1) throw Error("label file covers " + std::to_string(videos.size()) + " videos; pick one with --video");
    if (!videos.empty()) chosen = *videos.begin();
  } else if (!videos.count(chosen)) {
    throw Error("no faces for video '" + chosen + "'");
  }
  std::vector<TimelineRecord> records;
  for (const auto& r : recs) {
    if (r.video_id.value_or("") != chosen) continue;
    if (!r.frame_index) throw Error("face '" + r.id + "' has no frame index");
    records.push_back({r.label.value_or("unknown-" + std::to_string(r.cluster)), *r.frame_index});
  }
  const auto segments = emit_timeline(records, fps);
  if (as_json) {
    emit(timeline_to_json(segments, fps), out);
  } else {
    std::ostringstream text;
    write_timeline(text, segments);
    emit(text.str(), out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster face embeddings, label the clusters and recognise faces in videos."};
  app.require_subcommand(1, 1);

  // synth
  SynthFlags synth;
  auto* s = app.add_subcommand("synth", "generate Gaussian identity blobs");
  s->add_option("--identities", synth.cfg.num_identities)->check(CLI::PositiveNumber);
  s->add_option("--points", synth.cfg.points_per_identity, "points per identity (video points with --gallery-points)")
      ->check(CLI::PositiveNumber);
  s->add_option("--gallery-points", synth.gallery_points, "extra points per registered identity for the gallery");
  s->add_option("--dim", synth.cfg.dimension)->check(CLI::PositiveNumber);
  s->add_option("--stddev", synth.cfg.blob_stddev)->check(CLI::PositiveNumber);
  s->add_option("--separation", synth.cfg.separation, "minimum centre distance in units of stddev");
  s->add_option("--nonregistered", synth.cfg.fraction_nonregistered, "fraction withheld from the gallery")
      ->check(CLI::Range(0.0, 1.0));
  s->add_option("--seed", synth.cfg.seed);
  s->add_option("--videos", synth.videos, "identities are dealt round-robin to this many videos");
  s->add_option("--max-offset", synth.max_offset, "latest first frame of an identity");
  s->add_option("--out", synth.out, "all points, without a gallery split");
  s->add_option("--out-gallery", synth.out_gallery);
  s->add_option("--out-video", synth.out_video);

  // cluster
  std::string c_in, c_out, c_report;
  ClusterFlags c_flags;
  auto* c = app.add_subcommand("cluster", "cluster an embedding file");
  c->add_option("--in", c_in)->required();
  c->add_option("--out", c_out, "assignment file (stdout when omitted)");
  c->add_option("--report", c_report, "JSON report with the silhouette trace");
  c_flags.add(c);

  // label
  std::string l_in, l_store, l_clusters, l_labels;
  bool l_interactive = false;
  ClusterFlags l_flags;
  auto* l = app.add_subcommand("label", "label clusters and write a cluster store");
  l->add_option("--in", l_in)->required();
  l->add_option("--store,--out", l_store, "cluster store to write")->required();
  l->add_option("--clusters", l_clusters, "existing assignment file instead of clustering again");
  auto* l_labels_opt = l->add_option("--labels", l_labels, "one label per line, in cluster order");
  l->add_flag("--interactive", l_interactive, "prompt for each cluster's label")->excludes(l_labels_opt);
  l_flags.add(l);

  // match
  std::string m_in, m_store, m_out, m_report, m_method = "centroid";
  MatchConfig m_cfg;
  SearchFlags m_search;
  auto* m = app.add_subcommand("match", "recognise video faces against a cluster store");
  m->add_option("--in", m_in, "frame-tagged embeddings")->required();
  m->add_option("--store", m_store)->required();
  m->add_option("--out", m_out, "per-face label file (stdout when omitted)");
  m->add_option("--report", m_report, "JSON report of every cluster decision");
  m->add_option("--alpha", m_cfg.alpha, "similarities kept before the softmax")->check(CLI::PositiveNumber);
  m->add_option("--threshold", m_cfg.probability_threshold, "minimum winning probability (exclusive)")
      ->check(CLI::Range(0.0, 1.0));
  m->add_option("--embedding-method", m_method, "centroid or silhouette")
      ->check(CLI::IsMember({"centroid", "silhouette"}));
  m->add_option("--rmse-epsilon", m_cfg.rmse_epsilon)->check(CLI::PositiveNumber);
  m_search.add(m);

  // evaluate
  std::string e_mode = "vmeasure", e_in, e_clusters, e_labels, e_store, e_out;
  double e_beta = 1.0;
  auto* e = app.add_subcommand("evaluate", "score clusterings or recognition output");
  e->add_option("--mode", e_mode)->check(CLI::IsMember({"vmeasure", "match", "video"}));
  e->add_option("--in", e_in, "embeddings with ground-truth labels")->required();
  e->add_option("--clusters", e_clusters, "assignment file (vmeasure)");
  e->add_option("--labels", e_labels, "label file from match (match, video)");
  e->add_option("--store", e_store, "cluster store (match, video)");
  e->add_option("--beta", e_beta, "V-measure weight")->check(CLI::PositiveNumber);
  e->add_option("--out", e_out, "report file (stdout when omitted)");

  // timeline
  std::string t_labels, t_video, t_out;
  double t_fps = 1.0;
  bool t_json = false;
  auto* t = app.add_subcommand("timeline", "per-identity presence segments of one video");
  t->add_option("--labels", t_labels, "label file from match")->required();
  t->add_option("--video", t_video);
  t->add_option("--fps", t_fps)->check(CLI::PositiveNumber);
  t->add_flag("--json", t_json);
  t->add_option("--out", t_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) {
      run_synth(synth);
    } else if (*c) {
      run_cluster(c_in, c_out, c_report, c_flags);
    } else if (*l) {
      run_label(l_in, l_store, l_clusters, l_labels, l_interactive, l_flags);
    } else if (*m) {
      m_cfg.cluster_embedding_method = embedding_method_from_string(m_method);
      run_match(m_in, m_store, m_out, m_report, m_cfg, m_search);
    } else if (*e) {
      const auto faces = read_embeddings(e_in);
      std::string report;
      if (e_mode == "vmeasure") {
        report = evaluate_vmeasure(faces, e_clusters, e_beta);
      } else {
        if (e_labels.empty() || e_store.empty()) throw Error("--mode " + e_mode + " needs --labels and --store");
        const auto recs = read_face_labels(e_labels);
        const auto store = read_store(e_store);
        report = e_mode == "match" ? evaluate_match(faces, recs, store.gallery)
                                   : evaluate_video(faces, recs, store.gallery);
      }
      emit(report, e_out);
    } else if (*t) {
      run_timeline(t_labels, t_video, t_fps, t_json, t_out);
    }
  } catch (const std::exception& ex) {
    std::cerr << "facematch: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
