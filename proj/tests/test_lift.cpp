#include <random>

#include "doctest.h"
#include "sheaf/lift.hpp"
#include "sheaf/scenarios.hpp"
#include "support.hpp"

using namespace sheaf;
using sheaf::testing::error_code_of;

TEST_CASE("finite lifts are 0/1 and compose") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    std::uniform_int_distribution<std::size_t> n(1, 8);
    const std::size_t a = n(rng), b = n(rng), c = n(rng);
    std::vector<std::optional<std::size_t>> f(a), g(b), gf(a);
    for (auto& x : f) x = std::uniform_int_distribution<std::size_t>(0, b - 1)(rng);
    for (auto& x : g) x = std::uniform_int_distribution<std::size_t>(0, c - 1)(rng);
    for (std::size_t k = 0; k < a; ++k) gf[k] = g[*f[k]];
    CHECK(stochastic_lift(gf, c) == stochastic_lift(g, c) * stochastic_lift(f, b));
  }
}

TEST_CASE("unmapped or out-of-range bins are errors") {
  CHECK(error_code_of([] { stochastic_lift({0, std::nullopt}, 2); }) == ErrorCode::UnmappedBin);
  CHECK(error_code_of([] { stochastic_lift({0, 2}, 2); }) == ErrorCode::UnmappedBin);

  BinGrid dom{{0.0}, {1.0}, {false}, 4};
  BinGrid cod{{0.0}, {1.0}, {false}, 4};
  auto shift = [](const Vec& x) -> Vec { return x.array() + 5.0; };
  CHECK(error_code_of([&] { stochastic_lift(shift, dom, cod, 2); }) == ErrorCode::UnmappedBin);
}

TEST_CASE("bin grids locate and centre cells") {
  BinGrid g{{0.0, 0.0}, {1.0, 360.0}, {false, true}, 4};
  CHECK(g.cells() == 16);
  Vec x(2);
  x << 0.3, 100;
  CHECK(g.locate(x) == std::optional<std::size_t>(1 + 4 * 1));
  x << 0.3, 460;  // wraps to 100
  CHECK(g.locate(x) == std::optional<std::size_t>(5));
  x << 1.5, 100;
  CHECK_FALSE(g.locate(x).has_value());
  Vec c = g.center(5);
  CHECK(c[0] == doctest::Approx(0.375));
  CHECK(c[1] == doctest::Approx(135));

  BinGrid huge{std::vector<double>(40, 0.0), std::vector<double>(40, 1.0), std::vector<bool>(40, false), 8};
  CHECK(error_code_of([&] { huge.cells(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("sampled lift of a halving map") {
  BinGrid dom{{0.0}, {1.0}, {false}, 4};
  BinGrid cod{{0.0}, {1.0}, {false}, 4};
  auto half = [](const Vec& x) -> Vec { return x / 2.0; };
  Matrix m(stochastic_lift(half, dom, cod, 4));
  CHECK(column_stochastic_error(m.sparseView()) <= 1e-12);
  // Halving maps [0, 1] into [0, 1/2]: the upper codomain cells stay empty.
  CHECK(m.bottomRows(1).sum() == 0.0);
}

TEST_CASE("lifted SAR sheaf is exactly functorial") {
  LiftedSheaf l = lift_sheaf(build_sar_sheaf(), sar_lift_box(), 3, 800);
  CHECK(l.samples() > 0);
  CHECK(l.max_column_error() == 0.0);
  CochainComplex cx = build_topology_complex(l, l.topology().top(), 2);
  CHECK(cx.max_composite_entry() == 0.0);
  CHECK(l.dim(l.topology().top()) == l.samples());
}
