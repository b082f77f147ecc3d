#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sheaf/spaces.hpp"
#include "support.hpp"

using namespace sheaf;
using sheaf::testing::error_code_of;

namespace {

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("haversine agrees with the unit-vector angle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lon(-180, 180), lat(-89, 89);
  for (int i = 0; i < 500; ++i) {
    const double a = lon(rng), b = lat(rng), c = lon(rng), d = lat(rng);
    CHECK(haversine_km(a, b, c, d) == doctest::Approx(sheaf::testing::chord_angle_km(a, b, c, d)).epsilon(1e-9));
  }
  // One degree of latitude on the 6371 km sphere.
  CHECK(haversine_km(0, 0, 0, 1) == doctest::Approx(6371.0 * std::numbers::pi / 180.0).epsilon(1e-12));
  CHECK(haversine_km(10, 20, 10, 20) == 0.0);
}

TEST_CASE("circle distance is the shorter arc") {
  const ValueSpace c = ValueSpace::circle();
  CHECK(c.distance(v({350}), v({10})) == doctest::Approx(20));
  CHECK(c.distance(v({0}), v({180})) == doctest::Approx(180));
  CHECK(c.distance(v({-10}), v({350})) == doctest::Approx(0));
  CHECK(wrap_degrees(-10) == doctest::Approx(350));
  CHECK(wrap_degrees(720) == doctest::Approx(0));
  CHECK(c.normalized(v({370}))[0] == doctest::Approx(10));
  CHECK(ValueSpace::circle(25).distance(v({1}), v({3})) == doctest::Approx(50));
}

TEST_CASE("geo3d combines ground and altitude in km") {
  const ValueSpace g = ValueSpace::geo3d();
  CHECK(g.distance(v({-64, 44, 0}), v({-64, 44, 1000})) == doctest::Approx(1.0));
  const double ground = haversine_km(-64, 44, -65, 45);
  CHECK(g.distance(v({-64, 44, 0}), v({-65, 45, 3000})) == doctest::Approx(std::hypot(ground, 3.0)));
  CHECK(error_code_of([&] { g.validate(v({0, 91, 0})); }) == ErrorCode::SpaceMismatch);
}

TEST_CASE("simplex uses total variation and validates probability vectors") {
  const ValueSpace s = ValueSpace::simplex(3);
  CHECK(s.distance(v({1, 0, 0}), v({0, 1, 0})) == doctest::Approx(1));
  CHECK(s.distance(v({0.5, 0.5, 0}), v({0.25, 0.5, 0.25})) == doctest::Approx(0.25));
  CHECK(error_code_of([&] { s.validate(v({0.5, 0.6, 0})); }) == ErrorCode::SpaceMismatch);
  CHECK(error_code_of([&] { s.validate(v({1.5, -0.5, 0})); }) == ErrorCode::SpaceMismatch);
  CHECK_FALSE(error_code_of([&] { s.validate(v({0.2, 0.3, 0.5})); }).has_value());
  CHECK(s.is_vector_like());
  CHECK_FALSE(s.is_euclidean());
}

TEST_CASE("discrete labels are 0/1 apart and must be valid indices") {
  const ValueSpace d = ValueSpace::discrete({"a", "b", "c"}, 2.0);
  CHECK(d.distance(v({1}), v({1})) == 0);
  CHECK(d.distance(v({0}), v({2})) == doctest::Approx(2));
  CHECK(error_code_of([&] { d.validate(v({3})); }) == ErrorCode::SpaceMismatch);
  CHECK(error_code_of([&] { d.validate(v({1.5})); }) == ErrorCode::SpaceMismatch);
}

TEST_CASE("products flatten and take the max of weighted components") {
  const ValueSpace p = ValueSpace::product(
      {ValueSpace::euclidean(2), ValueSpace::product({ValueSpace::time(500), ValueSpace::circle()}, 2.0)});
  REQUIRE(p.dim() == 4);
  REQUIRE(p.components().size() == 3);
  CHECK(p.components()[1].weight == doctest::Approx(1000));
  CHECK(p.components()[2].offset == 3);
  CHECK(p.distance(v({0, 0, 1, 10}), v({3, 4, 1, 10})) == doctest::Approx(5));
  CHECK(p.distance(v({0, 0, 1, 10}), v({0, 0, 1.01, 10})) == doctest::Approx(10));
  CHECK(p.distance(v({0, 0, 1, 10}), v({0, 0, 1, 30})) == doctest::Approx(40));
  CHECK(p.circular_mask() == std::vector<bool>{false, false, false, true});
  CHECK(p.slice(1, 2).dim() == 2);
  CHECK(p.scaled(2).distance(v({0, 0, 0, 0}), v({3, 4, 0, 0})) == doctest::Approx(10));
}

TEST_CASE("wrong-length points are rejected") {
  const ValueSpace e = ValueSpace::euclidean(3);
  CHECK(error_code_of([&] { e.distance(v({1, 2}), v({1, 2, 3})); }) == ErrorCode::SpaceMismatch);
  CHECK(error_code_of([&] { e.validate(v({1, 2, 3, 4})); }) == ErrorCode::SpaceMismatch);
  CHECK(error_code_of([&] { e.validate(v({1, NAN, 3})); }) == ErrorCode::SpaceMismatch);
  CHECK(error_code_of([&] { ValueSpace::euclidean(1).scaled(0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("sample_point lands in the space") {
  std::mt19937_64 rng(3);
  for (const auto& s : {ValueSpace::simplex(4), ValueSpace::geo3d(), ValueSpace::discrete({"x", "y"}),
                        ValueSpace::circle()})
    for (int i = 0; i < 50; ++i) CHECK_FALSE(error_code_of([&] { s.validate(sample_point(s, rng)); }).has_value());
}
