#include <cmath>
#include <random>

#include "doctest.h"
#include "facematch/geometry.hpp"
#include "oracles.hpp"

using namespace facematch;

TEST_CASE("euclidean distance examples") {
  CHECK(euclidean_distance(Vector{0, 0}, Vector{3, 4}) == 5.0);
  const Vector x{0.25, -1.5, 7.0};
  CHECK(euclidean_distance(x, x) == 0.0);
  CHECK(euclidean_distance(Vector{1, 1, 1}, Vector{2, 2, 2}) == doctest::Approx(1.7320508).epsilon(1e-8));
}

TEST_CASE("dimension mismatch names both dimensions") {
  try {
    euclidean_distance(Vector{1, 2}, Vector{1, 2, 3});
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find('2') != std::string::npos);
    CHECK(msg.find('3') != std::string::npos);
  }
  CHECK_THROWS_AS(rmse(Vector{1}, Vector{1, 2}), Error);
}

TEST_CASE("rmse examples") {
  CHECK(rmse(Vector{0, 0}, Vector{3, 4}) == doctest::Approx(3.5355339).epsilon(1e-8));
  CHECK(rmse(Vector{4, 2}, Vector{4, 2}) == 0.0);
  CHECK(rmse(Vector{5}, Vector{2}) == 3.0);
}

TEST_CASE("centroid examples") {
  CHECK(centroid(std::vector<Vector>{{0, 0}, {2, 2}}) == Vector{1, 1});
  CHECK(centroid(std::vector<Vector>{{3, -1}}) == Vector{3, -1});
  CHECK(centroid(std::vector<Vector>{{0, 0}, {0, 3}, {3, 0}, {3, 3}}) == Vector{1.5, 1.5});
  CHECK_THROWS_AS(centroid(std::vector<Vector>{}), Error);
}

TEST_CASE("property: rmse * sqrt(n) equals the euclidean distance") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + trial % 40;
    auto pts = oracle::random_points(2, n, rng, 10.0);
    const double d = euclidean_distance(pts[0], pts[1]);
    const double r = rmse(pts[0], pts[1]);
    CHECK(std::abs(r * std::sqrt(double(n)) - d) <= 1e-12 * std::max(1.0, d));
  }
}

TEST_CASE("property: centroid minimises the sum of squared distances") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> jitter(0.0, 0.1);
  auto cost = [](const std::vector<Vector>& pts, const Vector& c) {
    double s = 0;
    for (const auto& p : pts) s += squared_euclidean_distance(p, c);
    return s;
  };
  for (int trial = 0; trial < 100; ++trial) {
    auto pts = oracle::random_points(2 + trial % 9, 3, rng);
    const Vector c = centroid(pts);
    const double base = cost(pts, c);
    for (const auto& p : pts) CHECK(base <= cost(pts, p) + 1e-12);
    for (int k = 0; k < 5; ++k) {
      Vector q = c;
      for (double& v : q) v += jitter(rng);
      CHECK(base <= cost(pts, q) + 1e-12);
    }
  }
}

TEST_CASE("operations are pure") {
  std::mt19937_64 rng(3);
  auto pts = oracle::random_points(6, 5, rng);
  const auto c1 = centroid(pts);
  const auto c2 = centroid(pts);
  CHECK(c1 == c2);
  CHECK(rmse(pts[0], pts[1]) == rmse(pts[0], pts[1]));
}

TEST_CASE("distance matrix is symmetric with zero diagonal") {
  std::mt19937_64 rng(5);
  auto pts = oracle::random_points(12, 4, rng);
  DistanceMatrix m(pts);
  REQUIRE(m.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(m(i, i) == 0.0);
    for (std::size_t j = 0; j < 12; ++j) {
      CHECK(m(i, j) == m(j, i));
      for (std::size_t k = 0; k < 12; k += 3) CHECK(m(i, j) <= m(i, k) + m(k, j) + 1e-12);
    }
  }
}

TEST_CASE("embedding validation") {
  Embedding e{"a", {1.0, NAN}};
  CHECK_THROWS_AS(validate(e), Error);
  e.vector = {};
  CHECK_THROWS_AS(validate(e), Error);
  e.vector = {1.0};
  e.bbox = BoundingBox{5, 5, 5, 9};
  CHECK_THROWS_AS(validate(e), Error);
  e.bbox = BoundingBox{1, 2, 3, 4};
  CHECK_NOTHROW(validate(e));

  std::vector<Embedding> data{{"a", {1, 2}}, {"b", {1, 2, 3}}};
  CHECK_THROWS_AS(validate_dataset(data), Error);
}
