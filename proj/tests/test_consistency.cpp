#include <memory>

#include "doctest.h"
#include "sheaf/consistency.hpp"
#include "sheaf/scenarios.hpp"
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

// X = {a, b} with stalk ℝ², {b} with stalk ℝ (weight w) and the second coordinate.
std::shared_ptr<const Sheaf> pair_sheaf(double scale = 1.0, double w = 1.0) {
  PartialSheaf ps(generate_topology(EntityUniverse({"a", "b"}), {{"b"}}));
  ps.stalk("a+b", ValueSpace::euclidean(2))
      .stalk("b", ValueSpace::euclidean(1, w))
      .restriction("a+b", "b", RestrictionMap::linear((Matrix(1, 2) << 0, scale).finished()));
  return std::make_shared<const Sheaf>(complete_unions(std::move(ps)));
}

}  // namespace

TEST_CASE("radius is the largest disagreement over comparable pairs") {
  auto sh = pair_sheaf();
  Assignment a(sh);
  a.set("a+b", v({1, 2}));
  a.set("b", v({2.5}));
  auto r = consistency_radius(a);
  CHECK(r.radius == doctest::Approx(0.5));
  REQUIRE(r.edges.size() == 1);
  CHECK(r.edges[0].larger == sh->topology().top());
  CHECK(is_epsilon_approximate(a, 0.5));
  CHECK_FALSE(is_epsilon_approximate(a, 0.49));

  a.erase(sh->topology().find_key("b"));
  CHECK(consistency_radius(a).radius == 0.0);
  CHECK(consistency_radius(a).edges.empty());
}

TEST_CASE("stalk weights scale the radius") {
  auto sh = pair_sheaf(1.0, 25.0);
  Assignment a(sh);
  a.set("a+b", v({0, 0}));
  a.set("b", v({0.1}));
  CHECK(consistency_radius(a).radius == doctest::Approx(2.5));
}

TEST_CASE("assignment distance is a sup over the common domain") {
  auto sh = pair_sheaf();
  Assignment a(sh), b(sh);
  a.set("a+b", v({0, 0}));
  a.set("b", v({1}));
  b.set("a+b", v({3, 4}));
  CHECK(assignment_distance(a, b) == doctest::Approx(5));
  b.set("b", v({7}));
  CHECK(assignment_distance(a, b) == doctest::Approx(6));

  Assignment other(pair_sheaf());
  other.set("b", v({1}));
  CHECK(error_code_of([&] { assignment_distance(a, other); }) == ErrorCode::SheafMismatch);
}

TEST_CASE("set validates and wraps values") {
  auto sh = pair_sheaf();
  Assignment a(sh);
  CHECK(error_code_of([&] { a.set("b", v({1, 2})); }) == ErrorCode::SpaceMismatch);
  CHECK(error_code_of([&] { a.at("b"); }).has_value());

  auto sar = std::make_shared<const Sheaf>(build_sar_sheaf());
  Assignment s(sar);
  s.set(SarKeys::U3, v({370, 1}));
  CHECK(s.at(SarKeys::U3)[0] == doctest::Approx(10));
}

TEST_CASE("pullback of a global section has radius zero") {
  auto sh = pair_sheaf(3.0);
  Assignment a = pullback_global(sh, v({1, 2}));
  CHECK(a.size() == 2);
  CHECK(a.at("b")[0] == doctest::Approx(6));
  CHECK(consistency_radius(a).radius == 0.0);
}

TEST_CASE("Lipschitz constant of the composed restrictions") {
  CHECK(lipschitz_constant(*pair_sheaf()) == doctest::Approx(1.0));
  CHECK(lipschitz_constant(*pair_sheaf(2.0)) == doctest::Approx(2.0));
  CHECK(lipschitz_constant(*pair_sheaf(2.0, 3.0)) == doctest::Approx(6.0));
  CHECK_FALSE(lipschitz_constant(build_sar_sheaf()).has_value());
}

TEST_CASE("SAR case assignments cover the five sensors and the field office") {
  auto sar = std::make_shared<const Sheaf>(build_sar_sheaf());
  for (int id = 1; id <= 3; ++id) {
    Assignment a = sar_case_assignment(sar, sar_case(id));
    CHECK(a.size() == 6);
    CHECK(consistency_radius(a).radius > 0);
  }
}
