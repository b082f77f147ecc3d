#include <cmath>
#include <memory>

#include "doctest.h"
#include "sheaf/fusion.hpp"
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

// Two sensors a and b watching the same scalar: X = {a, b} with identities down.
std::shared_ptr<const Sheaf> twin_sensors() {
  PartialSheaf ps(generate_topology(EntityUniverse({"a", "b"}), {{"a"}, {"b"}}));
  ps.stalk("a+b", ValueSpace::euclidean(1))
      .stalk("a", ValueSpace::euclidean(1))
      .stalk("b", ValueSpace::euclidean(1))
      .restriction("a+b", "a", RestrictionMap::identity(1))
      .restriction("a+b", "b", RestrictionMap::identity(1));
  return std::make_shared<const Sheaf>(complete_unions(std::move(ps)));
}

}  // namespace

TEST_CASE("Nelder-Mead finds the minimum of a quadratic") {
  auto f = [](const Vec& x) { return std::pow(x[0] - 1, 2) + 3 * std::pow(x[1] + 2, 2); };
  auto r = nelder_mead(f, v({0, 0}), {false, false});
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1).epsilon(1e-3));
  CHECK(r.x[1] == doctest::Approx(-2).epsilon(1e-3));
  CHECK(r.f <= 1e-7);
}

TEST_CASE("Nelder-Mead handles Rosenbrock") {
  auto f = [](const Vec& x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); };
  NelderMeadOptions o;
  o.max_iterations = 5000;
  o.f_tolerance = 1e-12;
  o.x_tolerance = 1e-10;
  auto r = nelder_mead(f, v({-1.2, 1}), {false, false}, o);
  CHECK(std::fabs(r.x[0] - 1) <= 1e-3);
  CHECK(std::fabs(r.x[1] - 1) <= 1e-3);
}

TEST_CASE("Nelder-Mead wraps circular coordinates") {
  auto f = [](const Vec& x) { return angular_separation(x[0], 355.0); };
  auto r = nelder_mead(f, v({10}), {true});
  CHECK(r.x[0] >= 0);
  CHECK(r.x[0] < 360);
  CHECK(angular_separation(r.x[0], 355.0) <= 1e-4);
}

TEST_CASE("minimax fusion of two readings lands on the midpoint") {
  auto sh = twin_sensors();
  Assignment a(sh);
  a.set("a", v({0}));
  a.set("b", v({4}));
  a.set("a+b", v({1}));
  FusionResult f = fuse(a);
  CHECK(f.section_at_top[0] == doctest::Approx(2).epsilon(1e-4));
  CHECK(f.residual == doctest::Approx(2).epsilon(1e-4));
  CHECK(f.input_radius == doctest::Approx(3));
  REQUIRE(f.lower_bound.has_value());
  CHECK(*f.lower_bound == doctest::Approx(1.5));  // 3 / (1 + 1)
  CHECK(f.residual >= *f.lower_bound);
  CHECK_FALSE(f.exact_projection);

  FusionOptions ls;
  ls.objective = FusionObjective::LeastSquares;
  FusionResult g = fuse(a, ls);
  CHECK(g.exact_projection);
  CHECK(g.section_at_top[0] == doctest::Approx(5.0 / 3.0));  // mean of 0, 4, 1
}

TEST_CASE("a consistent assignment needs no iterations") {
  auto sh = twin_sensors();
  Assignment a = pullback_global(sh, v({7}));
  FusionResult f = fuse(a);
  CHECK(f.iterations == 0);
  CHECK(f.residual == 0.0);
  CHECK(f.section_at_top[0] == 7);
}

TEST_CASE("fusion is deterministic for a fixed seed") {
  auto run = [] {
    FusionOptions o;
    o.solver.seed = 42;
    o.init = FusionOptions::Init::Perturbed;
    return run_sar_case(1, {}, o).fusion->section_at_top;
  };
  Vec first = run(), second = run();
  CHECK(first == second);
}

TEST_CASE("fusion errors") {
  auto sh = twin_sensors();
  CHECK(error_code_of([&] { fuse(Assignment(sh)); }) == ErrorCode::DegenerateAssignment);

  // Circles with no declared stalk on the whole space: nothing to optimize over.
  PartialSheaf ps(generate_topology(EntityUniverse({"a", "b", "c"}), {{"a", "b"}, {"b", "c"}}));
  for (const char* k : {"a+b", "b+c", "b"}) ps.stalk(k, ValueSpace::circle());
  ps.restriction("a+b", "b", RestrictionMap::identity(1)).restriction("b+c", "b", RestrictionMap::identity(1));
  auto circ = std::make_shared<const Sheaf>(complete_unions(std::move(ps)));
  Assignment a(circ);
  a.set("b", v({3}));
  CHECK(error_code_of([&] { fuse(a); }) == ErrorCode::NoTopStalk);

  auto sar = std::make_shared<const Sheaf>(build_sar_sheaf());
  FusionOptions ls;
  ls.objective = FusionObjective::LeastSquares;
  CHECK(error_code_of([&] { fuse(sar_case_assignment(sar, sar_case(1)), ls); }) == ErrorCode::NonlinearSheaf);
  FusionOptions bad;
  bad.init = FusionOptions::Init::Explicit;
  bad.explicit_start = v({1, 2});
  CHECK(error_code_of([&] { fuse(sar_case_assignment(sar, sar_case(1)), bad); }) == ErrorCode::SpaceMismatch);
}
