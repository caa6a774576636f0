#include "facematch/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace facematch {

using nlohmann::json;

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw Error("line " + std::to_string(line) + ": " + what);
}

std::uint64_t parse_u64(std::string_view text, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    fail_at(line, std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return v;
}

void require_field(const std::string& value, const char* what) {
  if (value.find_first_of("\t\n\r") != std::string::npos) {
    throw Error(std::string(what) + " '" + value + "' contains a tab or newline");
  }
}

void require_optional_field(const std::optional<std::string>& value, const char* what) {
  if (!value) return;
  if (value->empty()) throw Error(std::string("empty ") + what + " (leave it unset instead)");
  require_field(*value, what);
}

std::optional<std::string> opt_string(std::string_view s) {
  if (s.empty()) return std::nullopt;
  return std::string(s);
}

/// Strips a trailing '\r' so files edited on Windows still load.
std::string_view chomp(const std::string& line) {
  std::string_view v = line;
  if (!v.empty() && v.back() == '\r') v.remove_suffix(1);
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

std::string format_double(double value) {
  if (!std::isfinite(value)) throw Error("cannot format a non-finite value");
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
    throw Error("invalid number '" + std::string(text) + "'");
  }
  return v;
}

// ------------------------------------------------------------ embeddings

void write_embeddings(std::ostream& out, std::span<const Embedding> data) {
  const std::size_t dim = validate_dataset(data);
  std::set<std::string> ids;
  out << "#emb v1 dim=" << dim << '\n';
  for (const auto& e : data) {
    if (e.id.empty()) throw Error("embedding with an empty id");
    require_field(e.id, "id");
    if (!ids.insert(e.id).second) throw Error("duplicate embedding id '" + e.id + "'");
    require_optional_field(e.video_id, "video_id");
    require_optional_field(e.true_label, "label");
    out << e.id << '\t' << e.video_id.value_or("") << '\t';
    if (e.frame_index) out << *e.frame_index;
    out << '\t' << e.true_label.value_or("") << '\t';
    for (std::size_t i = 0; i < e.vector.size(); ++i) {
      if (i) out << ',';
      out << format_double(e.vector[i]);
    }
    if (e.bbox) out << '\t' << e.bbox->x1 << ',' << e.bbox->y1 << ',' << e.bbox->x2 << ',' << e.bbox->y2;
    out << '\n';
  }
}

std::vector<Embedding> read_embeddings(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::optional<std::size_t> declared_count;
  bool header = false;
  std::vector<Embedding> out;
  std::set<std::string> ids;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = chomp(raw);
    if (!header) {
      const auto tokens = split(line, ' ');
      if (tokens.size() < 3 || tokens[0] != "#emb") fail_at(line_no, "missing '#emb' header");
      if (tokens[1] != "v1") fail_at(line_no, "unsupported header version '" + std::string(tokens[1]) + "'");
      bool have_dim = false;
      for (std::size_t t = 2; t < tokens.size(); ++t) {
        if (tokens[t].starts_with("dim=")) {
          dim = parse_u64(tokens[t].substr(4), line_no, "dimension");
          have_dim = true;
        } else if (tokens[t].starts_with("count=")) {
          declared_count = parse_u64(tokens[t].substr(6), line_no, "count");
        }
      }
      if (!have_dim) fail_at(line_no, "header lacks dim=<n>");
      header = true;
      continue;
    }
    if (line.empty() || line.front() == '#') continue;

    const auto fields = split(line, '\t');
    if (fields.size() != 5 && fields.size() != 6) {
      fail_at(line_no, "expected 5 or 6 tab-separated fields, got " + std::to_string(fields.size()));
    }
    Embedding e;
    e.id = std::string(fields[0]);
    if (e.id.empty()) fail_at(line_no, "empty id");
    if (!ids.insert(e.id).second) fail_at(line_no, "duplicate id '" + e.id + "'");
    e.video_id = opt_string(fields[1]);
    if (!fields[2].empty()) e.frame_index = parse_u64(fields[2], line_no, "frame index");
    e.true_label = opt_string(fields[3]);
    const auto comps = split(fields[4], ',');
    if (comps.size() != dim) {
      fail_at(line_no, "vector has " + std::to_string(comps.size()) +
                           " components, header declares " + std::to_string(dim));
    }
    e.vector.reserve(dim);
    for (auto c : comps) {
      try {
        e.vector.push_back(parse_double(c));
      } catch (const Error& err) {
        fail_at(line_no, err.what());
      }
    }
    if (fields.size() == 6) {
      const auto b = split(fields[5], ',');
      if (b.size() != 4) fail_at(line_no, "bounding box needs x1,y1,x2,y2");
      BoundingBox box;
      box.x1 = static_cast<std::uint32_t>(parse_u64(b[0], line_no, "bbox"));
      box.y1 = static_cast<std::uint32_t>(parse_u64(b[1], line_no, "bbox"));
      box.x2 = static_cast<std::uint32_t>(parse_u64(b[2], line_no, "bbox"));
      box.y2 = static_cast<std::uint32_t>(parse_u64(b[3], line_no, "bbox"));
      e.bbox = box;
    }
    try {
      validate(e);
    } catch (const Error& err) {
      fail_at(line_no, err.what());
    }
    out.push_back(std::move(e));
  }
  if (!header) throw Error("empty embedding file: missing '#emb' header");
  if (declared_count && *declared_count != out.size()) {
    throw Error("header count=" + std::to_string(*declared_count) + " but found " +
                std::to_string(out.size()) + " records");
  }
  return out;
}

void write_embeddings(const std::filesystem::path& path, std::span<const Embedding> data) {
  std::ostringstream ss;
  write_embeddings(ss, data);
  write_file_atomic(path, ss.str());
}

std::vector<Embedding> read_embeddings(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_embeddings(in);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

// ------------------------------------------------------------ assignments

void write_assignments(std::ostream& out, std::span<const Embedding> data,
                       const Clustering& clustering, Algorithm algorithm) {
  if (data.size() != clustering.num_points()) throw Error("clustering does not match the data");
  out << "#clusters v1 k=" << clustering.num_clusters() << " algo=" << to_string(algorithm) << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) out << data[i].id << '\t' << clustering[i] << '\n';
}

std::vector<Assignment> read_assignments(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<Assignment> out;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = chomp(raw);
    if (!header) {
      if (!line.starts_with("#clusters v1")) fail_at(line_no, "missing '#clusters v1' header");
      header = true;
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2) fail_at(line_no, "expected id<TAB>cluster");
    out.push_back({std::string(fields[0]), parse_u64(fields[1], line_no, "cluster index")});
  }
  if (!header) throw Error("empty assignment file");
  return out;
}

void write_assignments(const std::filesystem::path& path, std::span<const Embedding> data,
                       const Clustering& clustering, Algorithm algorithm) {
  std::ostringstream ss;
  write_assignments(ss, data, clustering, algorithm);
  write_file_atomic(path, ss.str());
}

std::vector<Assignment> read_assignments(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_assignments(in);
}

Clustering clustering_for(std::span<const Embedding> data, std::span<const Assignment> assignments) {
  std::map<std::string, std::size_t> by_id;
  for (const auto& a : assignments) {
    if (!by_id.emplace(a.id, a.cluster).second) throw Error("duplicate assignment for '" + a.id + "'");
  }
  std::vector<std::size_t> labels(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto it = by_id.find(data[i].id);
    if (it == by_id.end()) throw Error("no cluster assignment for face '" + data[i].id + "'");
    labels[i] = it->second;
  }
  return Clustering::from_labels(labels);
}

// ------------------------------------------------------------ store

namespace {

constexpr const char* kStoreFormat = "facematch-store";
constexpr int kStoreVersion = 1;

json optional_size(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::size_t> read_optional_size(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::size_t>();
}

Vector read_vector(const json& j, std::size_t dim, const std::string& what) {
  auto v = j.get<Vector>();
  if (v.size() != dim) throw Error(what + " has dimension " + std::to_string(v.size()));
  return v;
}

}  // namespace

std::string store_to_string(const ClusterStore& store) {
  const auto& p = store.params;
  json params = {
      {"algorithm", to_string(p.algorithm)},
      {"k", optional_size(p.k)},
      {"patience", p.search.patience},
      {"min_silhouette", p.search.min_silhouette},
      {"max_clusters", optional_size(p.search.max_clusters)},
      {"seed", p.search.seed},
      {"affinity",
       {{"damping", p.affinity.damping},
        {"max_iter", p.affinity.max_iter},
        {"convergence_iter", p.affinity.convergence_iter},
        {"preference", p.affinity.preference ? json(*p.affinity.preference) : json(nullptr)},
        {"seed", p.affinity.seed}}},
  };
  json entries = json::array();
  for (const auto& e : store.gallery.entries()) {
    entries.push_back({
        {"label", e.label},
        {"members", e.member_ids},
        {"centroid", e.centroid},
        {"representative", {{"id", e.representative_id}, {"vector", e.representative}}},
        {"histogram", e.label_histogram},
    });
  }
  json doc = {
      {"format", kStoreFormat},   {"version", kStoreVersion},
      {"dimension", store.gallery.dimension()}, {"num_faces", store.num_faces},
      {"clustering", params},     {"entries", entries},
  };
  return doc.dump(1) + "\n";
}

ClusterStore store_from_string(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != kStoreFormat) throw Error("not a facematch store");
    if (doc.at("version") != kStoreVersion) {
      throw Error("unsupported store version " + doc.at("version").dump());
    }
    ClusterStore store;
    const auto dim = doc.at("dimension").get<std::size_t>();
    store.num_faces = doc.at("num_faces").get<std::size_t>();
    const json& p = doc.at("clustering");
    store.params.algorithm = algorithm_from_string(p.at("algorithm").get<std::string>());
    store.params.k = read_optional_size(p.at("k"));
    store.params.search.patience = p.at("patience").get<std::size_t>();
    store.params.search.min_silhouette = p.at("min_silhouette").get<double>();
    store.params.search.max_clusters = read_optional_size(p.at("max_clusters"));
    store.params.search.seed = p.at("seed").get<std::uint64_t>();
    const json& ap = p.at("affinity");
    store.params.affinity.damping = ap.at("damping").get<double>();
    store.params.affinity.max_iter = ap.at("max_iter").get<std::size_t>();
    store.params.affinity.convergence_iter = ap.at("convergence_iter").get<std::size_t>();
    if (!ap.at("preference").is_null()) store.params.affinity.preference = ap.at("preference").get<double>();
    store.params.affinity.seed = ap.at("seed").get<std::uint64_t>();

    std::vector<LabeledCluster> entries;
    for (const json& e : doc.at("entries")) {
      LabeledCluster c;
      c.label = e.at("label").get<std::string>();
      c.member_ids = e.at("members").get<std::vector<std::string>>();
      c.centroid = read_vector(e.at("centroid"), dim, "centroid of '" + c.label + "'");
      c.representative_id = e.at("representative").at("id").get<std::string>();
      c.representative = read_vector(e.at("representative").at("vector"), dim,
                                     "representative of '" + c.label + "'");
      c.label_histogram = e.at("histogram").get<std::map<std::string, std::size_t>>();
      entries.push_back(std::move(c));
    }
    store.gallery = LabeledClusterSet(dim, std::move(entries));
    return store;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed store: ") + e.what());
  }
}

void write_store(const std::filesystem::path& path, const ClusterStore& store) {
  write_file_atomic(path, store_to_string(store));
}

ClusterStore read_store(const std::filesystem::path& path) {
  try {
    return store_from_string(read_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

// ------------------------------------------------------------ face labels

std::vector<FaceLabelRecord> face_label_records(std::span<const Embedding> faces,
                                                const Recognition& recognition) {
  if (recognition.faces.size() != faces.size()) throw Error("recognition does not match the faces");
  std::vector<FaceLabelRecord> out;
  out.reserve(faces.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const auto& r = recognition.faces[i];
    out.push_back({faces[i].id, faces[i].video_id, faces[i].frame_index,
                   recognition.clusters[r.video_cluster].local_index, r.label});
  }
  return out;
}

void write_face_labels(std::ostream& out, std::span<const FaceLabelRecord> records) {
  out << "#labels v1\n";
  for (const auto& r : records) {
    require_field(r.id, "id");
    require_optional_field(r.video_id, "video_id");
    require_optional_field(r.label, "label");
    out << r.id << '\t' << r.video_id.value_or("") << '\t';
    if (r.frame_index) out << *r.frame_index;
    out << '\t' << r.cluster << '\t' << r.label.value_or("") << '\n';
  }
}

std::vector<FaceLabelRecord> read_face_labels(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<FaceLabelRecord> out;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = chomp(raw);
    if (!header) {
      if (line != "#labels v1") fail_at(line_no, "missing '#labels v1' header");
      header = true;
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    const auto f = split(line, '\t');
    if (f.size() != 5) fail_at(line_no, "expected 5 tab-separated fields");
    FaceLabelRecord r;
    r.id = std::string(f[0]);
    r.video_id = opt_string(f[1]);
    if (!f[2].empty()) r.frame_index = parse_u64(f[2], line_no, "frame index");
    r.cluster = parse_u64(f[3], line_no, "cluster index");
    r.label = opt_string(f[4]);
    out.push_back(std::move(r));
  }
  if (!header) throw Error("empty label file");
  return out;
}

void write_face_labels(const std::filesystem::path& path, std::span<const FaceLabelRecord> records) {
  std::ostringstream ss;
  write_face_labels(ss, records);
  write_file_atomic(path, ss.str());
}

std::vector<FaceLabelRecord> read_face_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_face_labels(in);
}

// ------------------------------------------------------------ reports

std::string decisions_to_json(const Recognition& recognition, std::span<const Embedding> faces) {
  json clusters = json::array();
  for (const auto& c : recognition.clusters) {
    std::vector<std::string> ids;
    for (std::size_t f : c.faces) ids.push_back(faces[f].id);
    json d = {
        {"video_id", c.video_id},
        {"cluster", c.local_index},
        {"faces", ids},
        {"matched", c.decision.matched()},
        {"label", c.decision.matched() ? json(c.decision.match->label) : json(nullptr)},
        {"probability", c.decision.matched() ? json(c.decision.match->probability) : json(nullptr)},
        {"probabilities", c.decision.probabilities},
        {"similarities", c.decision.similarities},
    };
    if (c.decision.matched()) d["store_index"] = c.decision.match->cluster;
    clusters.push_back(std::move(d));
  }
  return json({{"clusters", clusters}}).dump(1) + "\n";
}

void write_timeline(std::ostream& out, std::span<const TimelineSegment> segments) {
  for (const auto& s : segments) {
    require_field(s.identity, "identity");
    out << s.identity << '\t' << format_double(s.start_s) << '\t' << format_double(s.end_s) << '\t'
        << s.first_frame << '\t' << s.last_frame << '\n';
  }
}

std::string timeline_to_json(std::span<const TimelineSegment> segments, double fps) {
  json list = json::array();
  for (const auto& s : segments) {
    list.push_back({{"identity", s.identity},
                    {"start_s", s.start_s},
                    {"end_s", s.end_s},
                    {"first_frame", s.first_frame},
                    {"last_frame", s.last_frame}});
  }
  return json({{"fps", fps}, {"segments", list}}).dump(1) + "\n";
}

std::string vmeasure_to_json(const VMeasureReport& r) {
  return json({{"homogeneity", r.homogeneity},
               {"completeness", r.completeness},
               {"v_measure", r.v_measure},
               {"beta", r.beta},
               {"H(C|K)", r.h_class_given_cluster},
               {"H(C)", r.h_class},
               {"H(K|C)", r.h_cluster_given_class},
               {"H(K)", r.h_cluster}})
             .dump(1) +
         "\n";
}

std::string match_metrics_to_json(const MatchMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json({{"m1", opt(m.m1)},
               {"m2", opt(m.m2)},
               {"m3", opt(m.m3)},
               {"m4", opt(m.m4)},
               {"registered_queries", m.registered_queries},
               {"unregistered_queries", m.unregistered_queries}})
             .dump(1) +
         "\n";
}

std::string video_score_to_json(const VideoScore& s) {
  return json({{"precision", s.precision},
               {"recall", s.recall},
               {"f1", s.f1},
               {"frames", s.frames},
               {"exact_frames", s.exact_frames},
               {"truth_faces", s.truth_faces},
               {"predicted_faces", s.predicted_faces},
               {"correct_faces", s.correct_faces}})
             .dump(1) +
         "\n";
}

// ------------------------------------------------------------ files

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    auto out = open_out(tmp);
    out << contents;
    out.flush();
    if (!out) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace facematch
