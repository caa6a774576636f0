#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "facematch/io.hpp"
#include "harness.hpp"

using namespace facematch;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("facematch-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<Embedding> three_records() {
  Embedding a{"a", {0.1, -2.5, 1e-300}, "vid", 3, std::nullopt, "Alice"};
  Embedding b{"b", {1.0 / 3.0, 0.0, -0.0}, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
  Embedding c{"c", {std::numeric_limits<double>::max(), 5e-324, 42.0}, "vid", 4, BoundingBox{1, 2, 30, 40},
              "Bob"};
  return {a, b, c};
}

bool same(const Embedding& x, const Embedding& y) {
  if (x.vector.size() != y.vector.size()) return false;
  for (std::size_t i = 0; i < x.vector.size(); ++i) {
    if (std::signbit(x.vector[i]) != std::signbit(y.vector[i]) || x.vector[i] != y.vector[i]) return false;
  }
  return x.id == y.id && x.video_id == y.video_id && x.frame_index == y.frame_index &&
         x.true_label == y.true_label && x.bbox == y.bbox;
}

std::string embedding_file(std::size_t dim, std::size_t records, std::size_t short_line) {
  std::ostringstream out;
  out << "#emb v1 dim=" << dim << "\n";
  for (std::size_t r = 0; r < records; ++r) {
    const std::size_t line = r + 2;
    out << "f" << r << "\t\t\t\t";
    const std::size_t n = line == short_line ? dim - 1 : dim;
    for (std::size_t i = 0; i < n; ++i) out << (i ? "," : "") << "0.5";
    out << "\n";
  }
  return out.str();
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
  std::mt19937_64 rng(79);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 2000; ++i) {
    double v;
    const auto b = bits(rng);
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK_THROWS_AS(parse_double("1.5x"), Error);
  CHECK_THROWS_AS(parse_double(""), Error);
}

TEST_CASE("embedding file round-trip") {
  const auto data = three_records();
  std::stringstream s;
  write_embeddings(s, data);
  const auto back = read_embeddings(s);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(same(back[i], data[i]));

  TempDir dir;
  write_embeddings(dir.path / "e.emb", data);
  const auto file = read_embeddings(dir.path / "e.emb");
  for (std::size_t i = 0; i < 3; ++i) CHECK(same(file[i], data[i]));
}

TEST_CASE("frame metadata survives the file") {
  auto faces = std::vector<Embedding>{three_records()[0], three_records()[2]};
  std::stringstream s;
  write_embeddings(s, faces);
  auto back = read_embeddings(s);
  CHECK(back[0].frame_index == std::uint64_t{3});
  CHECK(back[1].frame_index == std::uint64_t{4});
  CHECK(back[1].video_id == std::string("vid"));
}

TEST_CASE("short vector in a 2048-dimensional file names its line") {
  std::istringstream in(embedding_file(2048, 3, 3));
  try {
    read_embeddings(in);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("2047") != std::string::npos);
    CHECK(msg.find("2048") != std::string::npos);
  }
  std::istringstream ok(embedding_file(2048, 3, 0));
  CHECK(read_embeddings(ok).size() == 3);
}

TEST_CASE("malformed embedding files") {
  auto fails = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      read_embeddings(in);
    } catch (const Error& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  CHECK(fails("", "header"));
  CHECK(fails("#emb v2 dim=2\n", "header"));
  CHECK(fails("#emb v1 dim=2\na\t\t\t\t1,2\na\t\t\t\t1,2\n", "line 3"));
  CHECK(fails("#emb v1 dim=2\na\t\tx\t\t1,2\n", "line 2"));
  CHECK(fails("#emb v1 dim=2\na\t\t\t1,2\n", "line 2"));
  CHECK(fails("#emb v1 dim=2\na\t\t\t\t1,nan\n", "line 2"));
  CHECK(fails("#emb v1 dim=2 count=2\na\t\t\t\t1,2\n", "count"));
}

TEST_CASE("assignment file round-trip") {
  const auto data = three_records();
  const auto c = Clustering::from_labels(std::vector<std::size_t>{1, 0, 1});
  std::stringstream s;
  write_assignments(s, data, c, Algorithm::Ward);
  const auto back = read_assignments(s);
  CHECK(clustering_for(data, back) == c);
  std::vector<Assignment> missing(back.begin(), back.begin() + 2);
  CHECK_THROWS_AS(clustering_for(data, missing), Error);
}

TEST_CASE("store round-trip is bit exact") {
  SynthConfig cfg;
  cfg.num_identities = 6;
  cfg.dimension = 8;
  cfg.seed = 5;
  cfg.blob_stddev = 0.37;
  auto ds = generate_synthetic(cfg);
  ClusteringParams params;
  params.search.patience = 3;
  params.search.max_clusters = 12;
  auto store = build_labeled_store(ds.embeddings, params);
  const auto text = store_to_string(store);
  const auto back = store_from_string(text);
  CHECK(back == store);
  CHECK(store_to_string(back) == text);

  TempDir dir;
  write_store(dir.path / "gallery.json", store);
  CHECK(read_store(dir.path / "gallery.json") == store);
  // No temporary is left behind.
  CHECK(std::distance(fs::directory_iterator(dir.path), fs::directory_iterator{}) == 1);

  CHECK_THROWS_AS(store_from_string("{\"format\":\"other\"}"), Error);
  CHECK_THROWS_AS(store_from_string("not json"), Error);
}

TEST_CASE("face label file round-trip") {
  std::vector<FaceLabelRecord> recs{{"a", "v", 3, 0, "Alice"}, {"b", std::nullopt, std::nullopt, 2, std::nullopt}};
  std::stringstream s;
  write_face_labels(s, recs);
  CHECK(read_face_labels(s) == recs);
}
