#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sheaf/consistency.hpp"
#include "sheaf/fusion.hpp"
#include "sheaf/sheaf.hpp"

namespace sheaf {

struct GeoPosition {
  double lat_deg = 0.0;  // north-positive
  double lon_deg = 0.0;  // east-positive
};

/// Unit-mixing weights that turn every SAR stalk distance into km.
struct SarWeights {
  double bearing_km_per_deg = 25.0;
  double time_km_per_hour = 500.0;
  double velocity = 1.0;  // km/h are compared as km
};

struct SarParameters {
  GeoPosition rdf1{42.7338328, -73.662574};
  GeoPosition rdf2{38.9352387, -77.0897374};
  GeoPosition true_crash{44.24545, -64.63672};
  double earth_radius_km = kEarthRadiusKm;
  SarWeights weights;
};

/// One column of the observation table, in the table's own units:
/// longitudes in °W, latitudes in °N, altitudes in m, velocities in km/h
/// (v_x measured westward), times in hours, bearings in degrees.
struct SarCase {
  int id = 1;
  struct Position {
    double x_w = 0, y_n = 0, z_m = 0;
  };
  struct Track {
    double x_w = 0, y_n = 0, z_m = 0, vx_w = 0, vy_n = 0;
  };
  Position flight_plan;
  Track atc;
  double theta1 = 0, t1 = 0;
  double theta2 = 0, t2 = 0;
  double sat_x_w = 0, sat_y_n = 0;
  Track field;
  double field_t = 0;
};

/// Published outcomes for a case: dead reckoning from the field office and
/// the fused section.
struct SarExpected {
  double crash_x_w = 0, crash_y_n = 0;
  double radius_km = 0;
  double error_km = 0;
  double fused_crash_x_w = 0, fused_crash_y_n = 0;
  double fused_error_km = 0;
};

/// Cases 1–3; throws InvalidArgument otherwise.
SarCase sar_case(int id);
SarExpected sar_expected(int id);

/// Entities x, y, z, vx, vy, t, theta1, theta2, s; sensors U1 (flight plan),
/// U2 (ATC), U3 (RDF 1), U4 (RDF 2), U5 (satellite) and X (field office).
std::vector<std::string> sar_entities();
struct SarKeys {
  static constexpr const char* U1 = "x+y+z";
  static constexpr const char* U2 = "vx+vy+x+y+z";
  static constexpr const char* U3 = "t+theta1";
  static constexpr const char* U4 = "t+theta2";
  static constexpr const char* U5 = "s+theta1+theta2";
  static constexpr const char* X = "s+t+theta1+theta2+vx+vy+x+y+z";
};

Sheaf build_sar_sheaf(const SarParameters& p = {});
Assignment sar_case_assignment(std::shared_ptr<const Sheaf> sheaf, const SarCase& c);

/// Top-stalk point (lon, lat, alt, v_east, v_north, t) of the field office column.
Vec sar_field_state(const SarCase& c);
/// Restriction E: position reached after t hours at constant velocity.
Vec dead_reckon(const Vec& state, double earth_radius_km = kEarthRadiusKm);
/// Bearing in degrees from a sensor to a (lon, lat) target.
double rdf_bearing(const GeoPosition& sensor, const Vec& target_lonlat,
                   double earth_radius_km = kEarthRadiusKm);
double crash_error_km(const SarParameters& p, const Vec& lonlat);

/// End-to-end run of one case: dead reckoning from the field office,
/// consistency radius of the table data, and the fused section.
struct SarRun {
  int case_id = 1;
  std::shared_ptr<const Sheaf> sheaf;
  Vec field_state;
  Vec crash;  // (lon, lat)
  double crash_error_km = 0;
  RadiusReport radius;
  std::optional<FusionResult> fusion;
  Vec fused_crash;
  double fused_error_km = 0;
};

SarRun run_sar_case(int id, const SarParameters& p = {}, const FusionOptions& opts = {});

/// Box around the case data for lifting the SAR sheaf (one interval per
/// top-stalk coordinate).
std::vector<std::pair<double, double>> sar_lift_box();

// --- image-mosaic obstacle sheaves -------------------------------------------

/// Pixel counts: m left image, n right image, p upper overlap, q lower overlap.
struct ObstacleParams {
  std::size_t m = 4, n = 4, p = 2, q = 2;
};

struct ObstacleSheaves {
  Sheaf mosaic;       // RGB pixel vectors
  Sheaf presence;     // object-presence probabilities
};

/// Entities L, R, V1, V2; opens U_L = {L,V1,V2}, U_R = {R,V1,V2}, {V1,V2},
/// {V1}, {V2}, X.
ObstacleSheaves build_obstacle_sheaves(const ObstacleParams& p = {});
std::vector<OpenId> obstacle_camera_cover(const Topology& t);   // {U_L, U_R}
std::vector<OpenId> obstacle_refined_cover(const Topology& t);  // {{V1,V2}, {V1}, {V2}}

// --- coin-counting sheaves ---------------------------------------------------

enum class CoinVariant { Mosaic, Counts, Value };

/// Two overlapping camera views; entities l, o, r with U1 = {l,o},
/// U2 = {o,r}. Detection vectors hold one-hot coin types (penny, nickel,
/// dime, quarter) per detection slot; the last `overlap_slots` of U1 and the
/// first of U2 lie in the overlap.
struct CoinParams {
  std::size_t left_slots = 3, right_slots = 3, overlap_slots = 2;
  std::size_t left_pixels = 6, right_pixels = 6, overlap_pixels = 3;
};

Sheaf build_coin_sheaf(CoinVariant variant, const CoinParams& p = {});
/// f: detection slots → coin counts per type.
Matrix coin_counting_map(std::size_t slots, std::size_t first, std::size_t count);
/// g: coin counts → value in cents.
Matrix coin_value_map();
inline constexpr std::array<double, 4> kCoinCents{1, 5, 10, 25};

// --- small fixtures ----------------------------------------------------------

/// Two sensors whose union admits fewer observations than the pair of them
/// agreeing on the overlap: gluing existence fails on {U1, U2}.
Sheaf build_gluing_counterexample();

/// Constant sheaf ℝ on a circle covered by four arcs; returns the arcs.
std::pair<Sheaf, std::vector<OpenId>> build_circle_constant_sheaf();

/// Constant sheaf whose two-set cover {A, B} meets in a finite circle, so
/// the cover is not Leray.
std::pair<Sheaf, std::vector<OpenId>> build_non_leray_fixture();

}  // namespace sheaf
