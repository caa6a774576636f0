#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "facematch/evaluation.hpp"
#include "oracles.hpp"

using namespace facematch;

namespace {

const std::vector<std::string> kAABB{"A", "A", "B", "B"};

LabeledClusterSet two_entry_gallery() {
  LabeledCluster a;
  a.label = "A";
  a.member_ids = {"a0", "a1", "b9"};
  a.centroid = a.representative = {0.0};
  a.label_histogram = {{"A", 2}, {"B", 1}};
  LabeledCluster c;
  c.label = "C";
  c.member_ids = {"c0"};
  c.centroid = c.representative = {5.0};
  c.label_histogram = {{"C", 1}};
  return LabeledClusterSet(1, {a, c});
}

MatchDecision matched(std::size_t cluster, const LabeledClusterSet& g) {
  MatchDecision d;
  d.match = Match{g[cluster].label, cluster, 0.9};
  return d;
}

std::vector<FrameFaces> frames_of(std::size_t n_frames, std::size_t per_frame) {
  std::vector<FrameFaces> out;
  for (std::size_t f = 0; f < n_frames; ++f) {
    FrameFaces ff{f, {}};
    for (std::size_t i = 0; i < per_frame; ++i) {
      ff.faces.push_back({"f" + std::to_string(f) + "-" + std::to_string(i),
                          i % 3 == 2 ? std::nullopt : std::optional<std::string>("id" + std::to_string(i))});
    }
    out.push_back(std::move(ff));
  }
  return out;
}

}  // namespace

TEST_CASE("contingency examples") {
  const std::vector<std::size_t> k{0, 0, 0, 1};
  auto t = contingency(kAABB, k);
  CHECK(t.counts() == std::vector<std::vector<std::size_t>>{{2, 0}, {1, 1}});
  CHECK(t.total() == 4);

  const std::vector<std::size_t> perfect{4, 4, 9, 9};
  CHECK(contingency(kAABB, perfect).counts() == std::vector<std::vector<std::size_t>>{{2, 0}, {0, 2}});

  const std::vector<std::string> cls{"B", "A", "B", "C", "B"};
  const std::vector<std::size_t> one(5, 3);
  auto s = contingency(cls, one);
  CHECK(s.classes() == std::vector<std::string>{"A", "B", "C"});
  CHECK(s.counts() == std::vector<std::vector<std::size_t>>{{1}, {3}, {1}});

  CHECK_THROWS_AS(contingency(kAABB, std::vector<std::size_t>{0, 1}), Error);
}

TEST_CASE("v-measure examples") {
  auto perfect = v_measure(contingency(kAABB, std::vector<std::size_t>{0, 0, 1, 1}));
  CHECK(perfect.homogeneity == 1.0);
  CHECK(perfect.completeness == 1.0);
  CHECK(perfect.v_measure == 1.0);

  auto lumped = v_measure(contingency(kAABB, std::vector<std::size_t>(4, 0)));
  CHECK(lumped.homogeneity == 0.0);
  CHECK(lumped.completeness == 1.0);
  CHECK(lumped.v_measure == 0.0);

  auto r = v_measure(contingency(kAABB, std::vector<std::size_t>{0, 0, 0, 1}));
  CHECK(r.homogeneity == doctest::Approx(0.3112781).epsilon(1e-7));
  CHECK(r.completeness == doctest::Approx(0.3836885).epsilon(1e-7));
  CHECK(r.v_measure == doctest::Approx(0.3437110).epsilon(1e-7));

  CHECK_THROWS_AS(v_measure(ContingencyTable{}), Error);
  CHECK_THROWS_AS(v_measure(contingency(kAABB, std::vector<std::size_t>{0, 0, 0, 1}), 0.0), Error);
}

TEST_CASE("property: v-measure against a brute-force entropy evaluation") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    const std::size_t nc = 1 + rng() % 4, nk = 1 + rng() % 4;
    std::vector<std::string> cls(n);
    std::vector<std::size_t> k(n);
    for (std::size_t i = 0; i < n; ++i) {
      cls[i] = std::string(1, static_cast<char>('A' + rng() % nc));
      k[i] = rng() % nk;
    }
    auto r = v_measure(contingency(cls, k));
    auto o = oracle::v_measure(cls, k);
    CHECK(std::abs(r.homogeneity - o.h) <= 1e-9);
    CHECK(std::abs(r.completeness - o.c) <= 1e-9);
    CHECK(std::abs(r.v_measure - o.v) <= 1e-9);
  }
}

TEST_CASE("property: v-measure base invariance, transpose symmetry and beta limits") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 20;
    std::vector<std::string> cls(n);
    std::vector<std::size_t> k(n);
    for (std::size_t i = 0; i < n; ++i) {
      cls[i] = "c" + std::to_string(rng() % 4);
      k[i] = rng() % 5;
    }
    const auto t = contingency(cls, k);
    const auto e = v_measure(t);
    for (double base : {2.0, 10.0}) {
      const auto b = v_measure(t, 1.0, base);
      CHECK(std::abs(b.homogeneity - e.homogeneity) <= 1e-12);
      CHECK(std::abs(b.completeness - e.completeness) <= 1e-12);
      CHECK(std::abs(b.v_measure - e.v_measure) <= 1e-12);
    }
    const auto tr = v_measure(t.transposed());
    CHECK(tr.homogeneity == e.completeness);
    CHECK(tr.completeness == e.homogeneity);

    // The limits need the other score to be positive: V is exactly 0 when
    // either h or c is 0, for every beta.
    if (e.homogeneity > 0.0 && e.completeness > 0.0) {
      CHECK(std::abs(v_measure(t, 1e6).v_measure - e.completeness) <= 1e-4);
      CHECK(std::abs(v_measure(t, 1e-6).v_measure - e.homogeneity) <= 1e-4);
    } else {
      CHECK(v_measure(t, 1e6).v_measure == 0.0);
      CHECK(v_measure(t, 1e-6).v_measure == 0.0);
    }
  }
}

TEST_CASE("match metrics examples") {
  const auto g = two_entry_gallery();
  std::vector<RegisteredOutcome> v{{"A", matched(0, g)}, {"C", MatchDecision{}}};
  std::vector<MatchDecision> u{MatchDecision{}};
  auto m = match_metrics(v, u, g);
  CHECK(*m.m1 == 0.5);
  CHECK(*m.m2 == 0.5);
  CHECK(*m.m3 == 0.5);
  CHECK(*m.m4 == 1.0);

  std::vector<RegisteredOutcome> all{{"A", matched(0, g)}, {"C", matched(1, g)}};
  m = match_metrics(all, {}, g);
  CHECK(*m.m1 == 1.0);
  CHECK(*m.m2 == 1.0);
  CHECK(*m.m3 == 1.0);
  CHECK_FALSE(m.m4.has_value());

  // Entry A is labelled A but holds a B face.
  std::vector<RegisteredOutcome> minority{{"B", matched(0, g)}};
  m = match_metrics(minority, {}, g);
  CHECK(*m.m1 == 1.0);
  CHECK(*m.m2 == 0.0);
  CHECK(*m.m3 == 1.0);

  m = match_metrics({}, {}, g);
  CHECK_FALSE(m.m1.has_value());
}

TEST_CASE("property: m2 <= m3 <= m1 on random outcomes") {
  const auto g = two_entry_gallery();
  std::mt19937_64 rng(71);
  const std::vector<std::string> truths{"A", "B", "C", "D"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RegisteredOutcome> v;
    for (int q = 0; q < 1 + trial % 9; ++q) {
      const auto pick = rng() % 3;
      v.push_back({truths[rng() % truths.size()], pick == 2 ? MatchDecision{} : matched(pick, g)});
    }
    auto m = match_metrics(v, {}, g);
    CHECK(*m.m2 <= *m.m3);
    CHECK(*m.m3 <= *m.m1);
    CHECK(*m.m1 <= 1.0);
    CHECK(*m.m2 >= 0.0);
  }
}

TEST_CASE("video score examples") {
  const auto truth = frames_of(20, 5);
  auto s = score_video(truth, truth);
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == 1.0);
  CHECK(s.exact_frames == s.frames);
  CHECK(s.frames == 20);

  auto spurious = truth;
  spurious[3].faces.push_back({"mug", std::string("id0")});
  s = score_video(truth, spurious);
  CHECK(s.precision == doctest::Approx(100.0 / 101.0));
  CHECK(s.recall == 1.0);
  CHECK(s.exact_frames == 19);

  auto missed = truth;
  missed[7].faces.pop_back();
  s = score_video(truth, missed);
  CHECK(s.recall == doctest::Approx(0.99));
  CHECK(s.precision == 1.0);

  auto wrong = truth;
  wrong[0].faces[0].label = std::nullopt;
  s = score_video(truth, wrong);
  CHECK(s.correct_faces == 99);
  CHECK(s.precision == doctest::Approx(0.99));

  auto dup = truth;
  dup[1].faces.push_back(dup[1].faces.front());
  CHECK_THROWS_AS(score_video(dup, truth), Error);
}

TEST_CASE("video score with no faces is vacuous") {
  auto s = score_video({}, {});
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 1.0);
  CHECK(s.frames == 0);
}

TEST_CASE("property: video score ignores frame order") {
  std::mt19937_64 rng(73);
  auto truth = frames_of(30, 4);
  auto pred = truth;
  for (auto& f : pred)
    for (auto& face : f.faces)
      if (rng() % 5 == 0) face.label = "other";
  const auto base = score_video(truth, pred);
  for (int trial = 0; trial < 20; ++trial) {
    auto t = truth, p = pred;
    std::shuffle(t.begin(), t.end(), rng);
    std::shuffle(p.begin(), p.end(), rng);
    const auto s = score_video(t, p);
    CHECK(s.precision == base.precision);
    CHECK(s.recall == base.recall);
    CHECK(s.exact_frames == base.exact_frames);
  }
}
