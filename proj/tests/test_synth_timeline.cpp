#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "facematch/synth.hpp"
#include "facematch/timeline.hpp"
#include "oracles.hpp"

using namespace facematch;

TEST_CASE("synthetic data is deterministic per seed") {
  SynthConfig cfg;
  cfg.seed = 99;
  const auto a = generate_synthetic(cfg);
  const auto b = generate_synthetic(cfg);
  REQUIRE(a.embeddings.size() == 100);
  for (std::size_t i = 0; i < a.embeddings.size(); ++i) {
    CHECK(a.embeddings[i].vector == b.embeddings[i].vector);
    CHECK(a.embeddings[i].id == b.embeddings[i].id);
  }
  cfg.seed = 100;
  CHECK(generate_synthetic(cfg).embeddings[0].vector != a.embeddings[0].vector);
}

TEST_CASE("synthetic centres honour the separation") {
  SynthConfig cfg;
  cfg.num_identities = 30;
  cfg.dimension = 4;
  cfg.blob_stddev = 0.5;
  cfg.separation = 6;
  const auto d = generate_synthetic(cfg);
  for (std::size_t i = 0; i < d.centers.size(); ++i)
    for (std::size_t j = i + 1; j < d.centers.size(); ++j)
      CHECK(oracle::dist(d.centers[i], d.centers[j]) >= 3.0);
  for (const auto& e : d.embeddings) CHECK(e.true_label.has_value());
}

TEST_CASE("non-registered identities are withheld") {
  SynthConfig cfg;
  cfg.num_identities = 20;
  cfg.fraction_nonregistered = 0.5;
  const auto d = generate_synthetic(cfg);
  CHECK(d.nonregistered.size() == 10);
  for (std::size_t i = 0; i < 20; ++i) CHECK(d.registered(d.identities[i]) == (i < 10));
}

TEST_CASE("infeasible placement is reported") {
  SynthConfig cfg;
  cfg.num_identities = 200;
  cfg.dimension = 1;
  cfg.max_retries = 1;
  try {
    generate_synthetic(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("separation") != std::string::npos);
  }
  cfg = SynthConfig{};
  cfg.num_identities = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg), Error);
}

TEST_CASE("frame tagging gives each identity a consecutive run") {
  SynthConfig cfg;
  cfg.num_identities = 3;
  cfg.points_per_identity = 5;
  auto faces = generate_synthetic(cfg).embeddings;
  tag_frames(faces, "clip", 10, 4);
  std::map<std::string, std::vector<std::uint64_t>> frames;
  for (const auto& f : faces) {
    CHECK(f.video_id == std::string("clip"));
    frames[*f.true_label].push_back(*f.frame_index);
  }
  for (const auto& [_, fs] : frames) {
    CHECK(fs.front() <= 10);
    for (std::size_t i = 1; i < fs.size(); ++i) CHECK(fs[i] == fs[i - 1] + 1);
  }
}

TEST_CASE("timeline examples") {
  std::vector<TimelineRecord> a;
  for (std::uint64_t f = 0; f < 12; ++f) a.push_back({"A", f});
  auto segs = emit_timeline(a);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0] == TimelineSegment{"A", 0.0, 11.0, 0, 11});

  std::vector<TimelineRecord> gap{{"A", 6}, {"A", 0}, {"A", 5}, {"A", 1}};
  segs = emit_timeline(gap);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0] == TimelineSegment{"A", 0.0, 1.0, 0, 1});
  CHECK(segs[1] == TimelineSegment{"A", 5.0, 6.0, 5, 6});

  std::vector<TimelineRecord> both{{"A", 0}, {"B", 1}, {"A", 1}, {"B", 2}, {"A", 2}};
  segs = emit_timeline(both);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].identity == "A");
  CHECK(segs[1] == TimelineSegment{"B", 1.0, 2.0, 1, 2});

  segs = emit_timeline(a, 4.0);
  CHECK(segs[0].end_s == 2.75);
  CHECK_THROWS_AS(emit_timeline(a, 0.0), Error);
  CHECK(emit_timeline(std::vector<TimelineRecord>{}).empty());
}

TEST_CASE("property: re-expanded timelines reproduce the frame labels") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<std::uint64_t, std::set<std::string>> truth;
    std::vector<TimelineRecord> records;
    const std::size_t frames = 1 + rng() % 80;
    for (std::uint64_t f = 0; f < frames; ++f) {
      for (int id = 0; id < 4; ++id) {
        if (rng() % 3 == 0) continue;
        const std::string name = "id" + std::to_string(id);
        truth[f].insert(name);
        records.push_back({name, f});
        if (rng() % 7 == 0) records.push_back({name, f});  // two faces, same identity
      }
    }
    std::shuffle(records.begin(), records.end(), rng);
    const auto segs = emit_timeline(records, 1.0 + static_cast<double>(trial % 3));
    CHECK(expand_timeline(segs) == truth);
    for (std::size_t i = 1; i < segs.size(); ++i) {
      CHECK(std::pair(segs[i - 1].first_frame, segs[i - 1].identity) <
            std::pair(segs[i].first_frame, segs[i].identity));
    }
  }
}
