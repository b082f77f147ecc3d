#include "sheaf/scenarios.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "sheaf/error.hpp"

namespace sheaf {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double param(const Params& p, const char* name, double fallback) {
  auto it = p.find(name);
  return it == p.end() ? fallback : it->second;
}

double km_per_degree(double radius) { return radius * kDeg; }

double bearing_from(double s_lon, double s_lat, double lon, double lat, double radius) {
  const double k = km_per_degree(radius);
  double dlon = lon - s_lon;
  dlon -= 360.0 * std::round(dlon / 360.0);
  const double east = dlon * k * std::cos(s_lat * kDeg);
  const double north = (lat - s_lat) * k;
  return wrap_degrees(std::atan2(east, north) / kDeg);
}

Vec reckon(const Vec& s, double radius) {
  const double k = km_per_degree(radius);
  const double t = s[5];
  Vec out(2);
  out[1] = s[1] + s[4] * t / k;
  out[0] = s[0] + s[3] * t / (k * std::cos(s[1] * kDeg));
  return out;
}

BuiltinFactory bearing_factory(GeoPosition sensor) {
  return [sensor](const Params& p) {
    const double lat = param(p, "rdf_lat", sensor.lat_deg);
    const double lon = param(p, "rdf_lon", sensor.lon_deg);
    const double r = param(p, "earth_radius_km", kEarthRadiusKm);
    return BuiltinMap{2, 1, [=](const Vec& x) {
                        Vec out(1);
                        out[0] = bearing_from(lon, lat, x[0], x[1], r);
                        return out;
                      }};
  };
}

BuiltinFactory track_bearing_factory(GeoPosition sensor) {
  return [sensor](const Params& p) {
    const double lat = param(p, "rdf_lat", sensor.lat_deg);
    const double lon = param(p, "rdf_lon", sensor.lon_deg);
    const double r = param(p, "earth_radius_km", kEarthRadiusKm);
    return BuiltinMap{6, 2, [=](const Vec& x) {
                        Vec pos = reckon(x, r);
                        Vec out(2);
                        out[0] = bearing_from(lon, lat, pos[0], pos[1], r);
                        out[1] = x[5];
                        return out;
                      }};
  };
}

Params sensor_params(const GeoPosition& g, double radius) {
  return {{"rdf_lat", g.lat_deg}, {"rdf_lon", g.lon_deg}, {"earth_radius_km", radius}};
}

}  // namespace

void register_standard_builtins() {
  const SarParameters d;
  register_builtin("A", track_bearing_factory(d.rdf1));
  register_builtin("B", track_bearing_factory(d.rdf2));
  register_builtin("C", bearing_factory(d.rdf1));
  register_builtin("D", bearing_factory(d.rdf2));
  register_builtin("E", [](const Params& p) {
    const double r = param(p, "earth_radius_km", kEarthRadiusKm);
    return BuiltinMap{6, 2, [r](const Vec& x) { return reckon(x, r); }};
  });
}

Vec dead_reckon(const Vec& state, double earth_radius_km) {
  if (state.size() != 6) throw Error(ErrorCode::SpaceMismatch, "dead reckoning needs a 6-coordinate state");
  return reckon(state, earth_radius_km);
}

double rdf_bearing(const GeoPosition& sensor, const Vec& target, double earth_radius_km) {
  return bearing_from(sensor.lon_deg, sensor.lat_deg, target[0], target[1], earth_radius_km);
}

double crash_error_km(const SarParameters& p, const Vec& lonlat) {
  return haversine_km(lonlat[0], lonlat[1], p.true_crash.lon_deg, p.true_crash.lat_deg,
                      p.earth_radius_km);
}

// --- SAR ---------------------------------------------------------------------

SarCase sar_case(int id) {
  SarCase c;
  c.id = id;
  switch (id) {
    case 1:
      c.flight_plan = {70.662, 42.829, 11178};
      c.atc = {70.587, 42.741, 11346, -495, 164};
      c.theta1 = 77.1, c.t1 = 0.943;
      c.theta2 = 61.3, c.t2 = 0.890;
      c.sat_x_w = 64.599, c.sat_y_n = 44.243;
      c.field = {70.649, 42.753, 11220, -495, 164};
      c.field_t = 0.928;
      break;
    case 2:
      c.flight_plan = {70.663, 42.752, 11299};
      c.atc = {70.657, 42.773, 11346, -495, 164};
      c.theta1 = 77.2, c.t1 = 0.930;
      c.theta2 = 63.2, c.t2 = 0.974;
      c.sat_x_w = 64.630, c.sat_y_n = 44.287;
      c.field = {70.668, 42.809, 11431, -495, 164};
      c.field_t = 1.05;
      break;
    case 3:
      c.flight_plan = {70.612, 42.834, 11237};
      c.atc = {70.617, 42.834, 11236, -419, 310};
      c.theta1 = 77.2, c.t1 = 0.985;
      c.theta2 = 63.3, c.t2 = 1.05;
      c.sat_x_w = 62.742, c.sat_y_n = 44.550;
      c.field = {70.626, 42.814, 11239, -419, 311};
      c.field_t = 1.02;
      break;
    default:
      throw Error(ErrorCode::InvalidArgument, fmt::format("no SAR case {}", id));
  }
  return c;
}

SarExpected sar_expected(int id) {
  switch (id) {
    case 1: return {65.0013, 44.1277, 15.7, 16.1, 65.1704, 44.2307, 2.01};
    case 2: return {64.2396, 44.3721, 11.6, 17.3, 65.4553, 44.3069, 8.38};
    case 3: return {65.3745, 45.6703, 152, 193, 71.0939, 44.7919, 74.4};
    default: throw Error(ErrorCode::InvalidArgument, fmt::format("no SAR case {}", id));
  }
}

std::vector<std::string> sar_entities() {
  return {"x", "y", "z", "vx", "vy", "t", "theta1", "theta2", "s"};
}

Sheaf build_sar_sheaf(const SarParameters& p) {
  const auto& w = p.weights;
  Topology top = generate_topology(EntityUniverse(sar_entities()),
                                   {{"x", "y", "z"},
                                    {"x", "y", "z", "vx", "vy"},
                                    {"theta1", "t"},
                                    {"theta2", "t"},
                                    {"theta1", "theta2", "s"},
                                    sar_entities()});
  const ValueSpace velocity = ValueSpace::euclidean(2, w.velocity);
  const ValueSpace time = ValueSpace::time(w.time_km_per_hour);
  const ValueSpace bearing = ValueSpace::circle(w.bearing_km_per_deg);

  PartialSheaf ps(std::move(top));
  ps.stalk(SarKeys::X, ValueSpace::product({ValueSpace::geo3d(), velocity, time}))
      .stalk(SarKeys::U2, ValueSpace::product({ValueSpace::geo3d(), velocity}))
      .stalk(SarKeys::U1, ValueSpace::geo3d())
      .stalk(SarKeys::U3, ValueSpace::product({bearing, time}))
      .stalk(SarKeys::U4, ValueSpace::product({bearing, time}))
      .stalk(SarKeys::U5, ValueSpace::geo2d())
      .stalk("t", time)
      .stalk("theta1", bearing)
      .stalk("theta2", bearing);

  const double r = p.earth_radius_km;
  ps.restriction(SarKeys::X, SarKeys::U2, RestrictionMap::projection({0, 1, 2, 3, 4}, 6))
      .restriction(SarKeys::U2, SarKeys::U1, RestrictionMap::projection({0, 1, 2}, 5))
      .restriction(SarKeys::X, SarKeys::U3, RestrictionMap::builtin("A", sensor_params(p.rdf1, r)))
      .restriction(SarKeys::X, SarKeys::U4, RestrictionMap::builtin("B", sensor_params(p.rdf2, r)))
      .restriction(SarKeys::X, SarKeys::U5, RestrictionMap::builtin("E", {{"earth_radius_km", r}}))
      .restriction(SarKeys::U3, "theta1", RestrictionMap::projection({0}, 2))
      .restriction(SarKeys::U3, "t", RestrictionMap::projection({1}, 2))
      .restriction(SarKeys::U4, "theta2", RestrictionMap::projection({0}, 2))
      .restriction(SarKeys::U4, "t", RestrictionMap::projection({1}, 2))
      .restriction(SarKeys::U5, "theta1", RestrictionMap::builtin("C", sensor_params(p.rdf1, r)))
      .restriction(SarKeys::U5, "theta2", RestrictionMap::builtin("D", sensor_params(p.rdf2, r)));
  return complete_unions(std::move(ps));
}

Vec sar_field_state(const SarCase& c) {
  Vec x(6);
  x << -c.field.x_w, c.field.y_n, c.field.z_m, -c.field.vx_w, c.field.vy_n, c.field_t;
  return x;
}

Assignment sar_case_assignment(std::shared_ptr<const Sheaf> sheaf, const SarCase& c) {
  Assignment a(std::move(sheaf));
  Vec u1(3), u2(5), u3(2), u4(2), u5(2);
  u1 << -c.flight_plan.x_w, c.flight_plan.y_n, c.flight_plan.z_m;
  u2 << -c.atc.x_w, c.atc.y_n, c.atc.z_m, -c.atc.vx_w, c.atc.vy_n;
  u3 << c.theta1, c.t1;
  u4 << c.theta2, c.t2;
  u5 << -c.sat_x_w, c.sat_y_n;
  a.set(SarKeys::U1, u1);
  a.set(SarKeys::U2, u2);
  a.set(SarKeys::U3, u3);
  a.set(SarKeys::U4, u4);
  a.set(SarKeys::U5, u5);
  a.set(SarKeys::X, sar_field_state(c));
  return a;
}

SarRun run_sar_case(int id, const SarParameters& p, const FusionOptions& opts) {
  SarRun run;
  run.case_id = id;
  run.sheaf = std::make_shared<const Sheaf>(build_sar_sheaf(p));
  const SarCase c = sar_case(id);
  Assignment a = sar_case_assignment(run.sheaf, c);
  run.field_state = sar_field_state(c);
  run.crash = dead_reckon(run.field_state, p.earth_radius_km);
  run.crash_error_km = crash_error_km(p, run.crash);
  run.radius = consistency_radius(a);
  run.fusion = fuse(a, opts);
  run.fused_crash = dead_reckon(run.fusion->section_at_top, p.earth_radius_km);
  run.fused_error_km = crash_error_km(p, run.fused_crash);
  return run;
}

std::vector<std::pair<double, double>> sar_lift_box() {
  return {{-72.0, -69.0}, {42.0, 43.5}, {10500.0, 12000.0},
          {400.0, 520.0}, {150.0, 320.0}, {0.8, 1.1}};
}

// --- obstacle ----------------------------------------------------------------

namespace {

Topology obstacle_topology() {
  return generate_topology(EntityUniverse({"L", "R", "V1", "V2"}),
                           {{"L", "V1", "V2"}, {"R", "V1", "V2"}, {"V1"}, {"V2"}});
}

std::vector<std::size_t> iota(std::size_t first, std::size_t count) {
  std::vector<std::size_t> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = first + i;
  return v;
}

}  // namespace

ObstacleSheaves build_obstacle_sheaves(const ObstacleParams& p) {
  if (p.p == 0 || p.q == 0 || p.m < p.p + p.q || p.n < p.p + p.q)
    throw Error(ErrorCode::InvalidArgument,
                "each image must contain both overlap regions, and each region a pixel");
  const std::size_t lm = 3 * p.m, rn = 3 * p.n, up = 3 * p.p, lq = 3 * p.q, ov = up + lq;

  PartialSheaf m(obstacle_topology());
  m.stalk("L+V1+V2", ValueSpace::euclidean(lm))
      .stalk("R+V1+V2", ValueSpace::euclidean(rn))
      .stalk("V1+V2", ValueSpace::euclidean(ov))
      .stalk("V1", ValueSpace::euclidean(up))
      .stalk("V2", ValueSpace::euclidean(lq))
      // The overlap occupies the right edge of the left image and the left
      // edge of the right image.
      .restriction("L+V1+V2", "V1+V2", RestrictionMap::projection(iota(lm - ov, ov), lm))
      .restriction("R+V1+V2", "V1+V2", RestrictionMap::projection(iota(0, ov), rn))
      .restriction("V1+V2", "V1", RestrictionMap::projection(iota(0, up), ov))
      .restriction("V1+V2", "V2", RestrictionMap::projection(iota(up, lq), ov));

  // (side, middle) probabilities on each camera; the middle value is seen
  // in both overlap regions.
  Matrix to_overlap(2, 2);
  to_overlap << 0, 1, 0, 1;
  PartialSheaf q(obstacle_topology());
  q.stalk("L+V1+V2", ValueSpace::euclidean(2))
      .stalk("R+V1+V2", ValueSpace::euclidean(2))
      .stalk("V1+V2", ValueSpace::euclidean(2))
      .stalk("V1", ValueSpace::euclidean(1))
      .stalk("V2", ValueSpace::euclidean(1))
      .restriction("L+V1+V2", "V1+V2", RestrictionMap::linear(to_overlap))
      .restriction("R+V1+V2", "V1+V2", RestrictionMap::linear(to_overlap))
      .restriction("V1+V2", "V1", RestrictionMap::projection({0}, 2))
      .restriction("V1+V2", "V2", RestrictionMap::projection({1}, 2));

  return {complete_unions(std::move(m)), complete_unions(std::move(q))};
}

std::vector<OpenId> obstacle_camera_cover(const Topology& t) {
  return {t.find_key("L+V1+V2"), t.find_key("R+V1+V2")};
}

std::vector<OpenId> obstacle_refined_cover(const Topology& t) {
  return {t.find_key("V1+V2"), t.find_key("V1"), t.find_key("V2")};
}

// --- coins -------------------------------------------------------------------

Matrix coin_counting_map(std::size_t slots, std::size_t first, std::size_t count) {
  if (first + count > slots) throw Error(ErrorCode::InvalidArgument, "counted slots out of range");
  Matrix f = Matrix::Zero(4, static_cast<Eigen::Index>(4 * slots));
  for (std::size_t s = first; s < first + count; ++s)
    for (Eigen::Index k = 0; k < 4; ++k) f(k, static_cast<Eigen::Index>(4 * s) + k) = 1.0;
  return f;
}

Matrix coin_value_map() {
  Matrix g(1, 4);
  g << kCoinCents[0], kCoinCents[1], kCoinCents[2], kCoinCents[3];
  return g;
}

Sheaf build_coin_sheaf(CoinVariant variant, const CoinParams& p) {
  PartialSheaf ps(generate_topology(EntityUniverse({"l", "o", "r"}), {{"l", "o"}, {"o", "r"}}));
  switch (variant) {
    case CoinVariant::Mosaic: {
      const std::size_t a = p.left_pixels, b = p.right_pixels, o = p.overlap_pixels;
      if (o > a || o > b) throw Error(ErrorCode::InvalidArgument, "overlap larger than an image");
      ps.stalk("l+o", ValueSpace::euclidean(a))
          .stalk("o+r", ValueSpace::euclidean(b))
          .stalk("o", ValueSpace::euclidean(o))
          .restriction("l+o", "o", RestrictionMap::projection(iota(a - o, o), a))
          .restriction("o+r", "o", RestrictionMap::projection(iota(0, o), b));
      break;
    }
    case CoinVariant::Counts:
    case CoinVariant::Value: {
      const std::size_t a = p.left_slots, b = p.right_slots, o = p.overlap_slots;
      if (o > a || o > b) throw Error(ErrorCode::InvalidArgument, "overlap larger than an image");
      Matrix fl = coin_counting_map(a, a - o, o), fr = coin_counting_map(b, 0, o);
      ps.stalk("l+o", ValueSpace::euclidean(4 * a)).stalk("o+r", ValueSpace::euclidean(4 * b));
      if (variant == CoinVariant::Counts) {
        ps.stalk("o", ValueSpace::euclidean(4))
            .restriction("l+o", "o", RestrictionMap::linear(fl))
            .restriction("o+r", "o", RestrictionMap::linear(fr));
      } else {
        ps.stalk("o", ValueSpace::euclidean(1))
            .restriction("l+o", "o", RestrictionMap::linear(coin_value_map() * fl))
            .restriction("o+r", "o", RestrictionMap::linear(coin_value_map() * fr));
      }
      break;
    }
  }
  return complete_unions(std::move(ps));
}

// --- small fixtures ----------------------------------------------------------

Sheaf build_gluing_counterexample() {
  PartialSheaf ps(generate_topology(EntityUniverse({"p", "q", "r"}),
                                    {{"p", "q"}, {"q", "r"}, {"p", "q", "r"}}));
  Matrix f(2, 1), g(1, 2);
  f << 1, 0;
  g << 1, 1;
  ps.stalk("p+q+r", ValueSpace::euclidean(1))
      .stalk("p+q", ValueSpace::euclidean(2))
      .stalk("q+r", ValueSpace::euclidean(1))
      .stalk("q", ValueSpace::euclidean(1))
      .restriction("p+q+r", "p+q", RestrictionMap::linear(f))
      .restriction("p+q+r", "q+r", RestrictionMap::identity(1))
      .restriction("p+q", "q", RestrictionMap::linear(g))
      .restriction("q+r", "q", RestrictionMap::identity(1));
  return complete_unions(std::move(ps));
}

std::pair<Sheaf, std::vector<OpenId>> build_circle_constant_sheaf() {
  // Arcs a_i with overlaps w_i between arc i-1 and arc i.
  std::vector<std::string> names;
  for (int i = 0; i < 4; ++i) names.push_back(fmt::format("a{}", i));
  for (int i = 0; i < 4; ++i) names.push_back(fmt::format("w{}", i));
  std::vector<std::vector<std::string>> arcs;
  for (int i = 0; i < 4; ++i)
    arcs.push_back({fmt::format("a{}", i), fmt::format("w{}", i), fmt::format("w{}", (i + 1) % 4)});
  PartialSheaf ps(generate_topology(EntityUniverse(names), arcs));
  const Topology& t = ps.topology;
  std::vector<OpenId> cover;
  for (const auto& arc : arcs) {
    OpenId u = *t.find(t.universe().mask_of(arc));
    cover.push_back(u);
    ps.stalks[u] = ValueSpace::euclidean(1);
  }
  for (int i = 0; i < 4; ++i) ps.stalk(fmt::format("w{}", i), ValueSpace::euclidean(1));
  for (std::size_t i = 0; i < 4; ++i)
    for (const auto& w : {arcs[i][1], arcs[i][2]})
      ps.restrictions.push_back({cover[i], t.find_key(w), RestrictionMap::identity(1)});
  return {complete_unions(std::move(ps)), cover};
}

std::pair<Sheaf, std::vector<OpenId>> build_non_leray_fixture() {
  // a, b open points; c, d closed points over both: the smallest finite circle.
  PartialSheaf ps(generate_topology(
      EntityUniverse({"a", "b", "c", "d", "x", "y"}),
      {{"a"}, {"b"}, {"a", "b", "c"}, {"a", "b", "d"}, {"a", "b", "c", "d", "x"}, {"a", "b", "c", "d", "y"}}));
  Matrix both(2, 1);
  both << 1, 1;
  const auto r1 = ValueSpace::euclidean(1);
  ps.stalk("a+b+c+d+x", r1)
      .stalk("a+b+c+d+y", r1)
      .stalk("a+b+c+d", r1)
      .stalk("a+b+c", r1)
      .stalk("a+b+d", r1)
      .stalk("a+b", ValueSpace::euclidean(2))
      .stalk("a", r1)
      .stalk("b", r1)
      .restriction("a+b+c+d+x", "a+b+c+d", RestrictionMap::identity(1))
      .restriction("a+b+c+d+y", "a+b+c+d", RestrictionMap::identity(1))
      .restriction("a+b+c+d", "a+b+c", RestrictionMap::identity(1))
      .restriction("a+b+c+d", "a+b+d", RestrictionMap::identity(1))
      .restriction("a+b+c", "a+b", RestrictionMap::linear(both))
      .restriction("a+b+d", "a+b", RestrictionMap::linear(both))
      .restriction("a+b", "a", RestrictionMap::projection({0}, 2))
      .restriction("a+b", "b", RestrictionMap::projection({1}, 2));
  Sheaf sh = complete_unions(std::move(ps));
  const Topology& t = sh.topology();
  std::vector<OpenId> cover{t.find_key("a+b+c+d+x"), t.find_key("a+b+c+d+y")};
  return {std::move(sh), cover};
}

}  // namespace sheaf
