#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sheaf/cohomology.hpp"
#include "sheaf/scenarios.hpp"
#include "support.hpp"

using namespace sheaf;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("coins: two quarters, a nickel and three pennies are 58 cents") {
  // Slots: q, q, n, p, p, p as one-hot (penny, nickel, dime, quarter).
  const std::vector<int> types{3, 3, 1, 0, 0, 0};
  Vec det = Vec::Zero(4 * 6);
  for (std::size_t s = 0; s < types.size(); ++s) det[static_cast<Eigen::Index>(4 * s + types[s])] = 1;
  Vec counts = coin_counting_map(6, 0, 6) * det;
  CHECK(counts == v({3, 1, 0, 2}));
  CHECK((coin_value_map() * counts)[0] == doctest::Approx(58));
  CHECK(coin_value_map() == (Matrix(1, 4) << 1, 5, 10, 25).finished());

  // Counting only slots 2..3 of four.
  Matrix f = coin_counting_map(4, 2, 2);
  CHECK(f.rows() == 4);
  CHECK(f.cols() == 16);
  CHECK(f.leftCols(8).norm() == 0.0);
}

TEST_CASE("coins: a global section restricts to agreeing overlap counts") {
  auto sh = std::make_shared<const Sheaf>(build_coin_sheaf(CoinVariant::Counts));
  std::mt19937_64 rng(4);
  Assignment a = pullback_global(sh, sh->sample(sh->topology().top(), rng));
  CHECK(consistency_radius(a).radius <= 1e-12);
  CHECK(sh->dim(sh->topology().find_key("o")) == 4);
  auto value = build_coin_sheaf(CoinVariant::Value);
  CHECK(value.dim(value.topology().find_key("o")) == 1);
}

TEST_CASE("dead reckoning follows the flat-earth small-step formula") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lon(-80, -60), lat(30, 55), vel(-600, 600), t(0, 2);
  const double k = 6371.0 * kDeg;
  for (int i = 0; i < 100; ++i) {
    Vec s = v({lon(rng), lat(rng), 11000, vel(rng), vel(rng), t(rng)});
    Vec p = dead_reckon(s);
    CHECK(p[1] == doctest::Approx(s[1] + s[4] * s[5] / k).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(s[0] + s[3] * s[5] / (k * std::cos(s[1] * kDeg))).epsilon(1e-12));
    // Travelled distance matches speed × time up to the drift of the
    // east-west scale between the start and end latitudes.
    const double travelled = sheaf::testing::chord_angle_km(s[0], s[1], p[0], p[1]);
    const double want = std::hypot(s[3], s[4]) * s[5];
    const double drift = std::fabs(std::cos(s[1] * kDeg) / std::cos(p[1] * kDeg) - 1.0);
    CHECK(std::fabs(travelled - want) <= (drift + 0.01) * want + 1e-9);
  }
}

TEST_CASE("bearings are measured clockwise from true north") {
  const GeoPosition here{40.0, -70.0};
  CHECK(rdf_bearing(here, v({-70.0, 41.0})) == doctest::Approx(0).epsilon(1e-9));
  CHECK(rdf_bearing(here, v({-69.0, 40.0})) == doctest::Approx(90));
  CHECK(rdf_bearing(here, v({-70.0, 39.0})) == doctest::Approx(180));
  CHECK(rdf_bearing(here, v({-71.0, 40.0})) == doctest::Approx(270));
}

TEST_CASE("the RDF track map is the bearing of the dead-reckoned position") {
  auto sar = build_sar_sheaf();
  const Topology& t = sar.topology();
  const SarParameters p;
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    Vec x = sar.sample(t.top(), rng);
    Vec u3 = sar.restrict(t.top(), t.find_key(SarKeys::U3), x);
    Vec theta = sar.restrict(t.top(), t.find_key("theta1"), x);
    CHECK(u3[0] == doctest::Approx(rdf_bearing(p.rdf1, dead_reckon(x))));
    CHECK(u3[1] == doctest::Approx(x[5]));
    CHECK(theta[0] == doctest::Approx(u3[0]));
  }
}

TEST_CASE("field state converts the table's west-positive units") {
  const SarCase c = sar_case(1);
  Vec x = sar_field_state(c);
  CHECK(x == v({-70.649, 42.753, 11220, 495, 164, 0.928}));
  CHECK(crash_error_km(SarParameters{}, v({-64.63672, 44.24545})) == 0.0);
}

TEST_CASE("table data and published outcomes") {
  CHECK(sar_case(2).theta2 == 63.2);
  CHECK(sar_case(3).field.vy_n == 311);
  CHECK(sar_expected(1).radius_km == 15.7);
  CHECK(sar_expected(3).error_km == 193);
  CHECK(sheaf::testing::error_code_of([] { sar_case(4); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("obstacle covers") {
  auto ob = build_obstacle_sheaves();
  const Topology& t = ob.mosaic.topology();
  auto cams = obstacle_camera_cover(t);
  auto refined = obstacle_refined_cover(t);
  CHECK(cams.size() == 2);
  CHECK(refined.size() == 3);
  EntityMask all = 0;
  for (OpenId u : cams) all |= t.members(u);
  CHECK(all == t.universe().full_mask());
  // Three colour channels per pixel; the overlap pixels are shared by both images.
  CHECK(ob.mosaic.dim(t.top()) == 3 * (4 + 4) - 3 * (2 + 2));
}
