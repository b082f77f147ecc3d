#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sheaf {

using Vec = Eigen::VectorXd;

inline constexpr double kEarthRadiusKm = 6371.0;

enum class SpaceKind { Euclidean, Circle, Geo2D, Geo3D, Time, Discrete, Simplex };

std::string_view to_string(SpaceKind kind);

/// One factor of a (possibly trivial) product. Coordinates:
///   Euclidean(n): n reals.        Circle: one angle in degrees, wrapped to [0, 360).
///   Geo2D: (lon, lat) degrees.    Geo3D: (lon, lat, altitude in metres).
///   Time: hours.                  Discrete: label index.   Simplex(n): n masses.
/// Longitudes are east-positive.
struct SpaceComponent {
  SpaceKind kind = SpaceKind::Euclidean;
  std::size_t dim = 1;
  double weight = 1.0;
  std::vector<std::string> labels;  // Discrete only
  std::size_t offset = 0;           // first coordinate inside the owning space

  bool operator==(const SpaceComponent& o) const {
    return kind == o.kind && dim == o.dim && weight == o.weight && labels == o.labels &&
           offset == o.offset;
  }
};

/// A pseudometric space with a flat real-vector parameterization. Every space
/// is a flattened product of components; the metric is the max of the
/// weighted component distances, which for a single component is just that
/// component's metric.
class ValueSpace {
 public:
  ValueSpace() = default;

  static ValueSpace euclidean(std::size_t n, double weight = 1.0);
  static ValueSpace circle(double weight = 1.0);
  static ValueSpace geo2d(double weight = 1.0);
  static ValueSpace geo3d(double weight = 1.0);
  static ValueSpace time(double weight = 1.0);
  static ValueSpace discrete(std::vector<std::string> labels, double weight = 1.0);
  static ValueSpace simplex(std::size_t n, double weight = 1.0);
  /// Flattens nested products; an outer weight multiplies the leaf weights.
  static ValueSpace product(const std::vector<ValueSpace>& factors, double weight = 1.0);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<SpaceComponent>& components() const noexcept { return components_; }
  bool is_product() const noexcept { return components_.size() > 1; }
  /// True for a single Euclidean component, the only stalks linear algebra accepts.
  bool is_euclidean() const noexcept;
  /// Euclidean or Simplex single component: a vector space for cohomology purposes.
  bool is_vector_like() const noexcept;
  std::vector<bool> circular_mask() const;

  /// Throws SpaceMismatch when either point has the wrong length.
  double distance(const Vec& x, const Vec& y) const;
  double component_distance(std::size_t c, const Vec& x, const Vec& y) const;

  /// Wraps circular coordinates into [0, 360).
  void normalize(Vec& x) const;
  Vec normalized(Vec x) const {
    normalize(x);
    return x;
  }
  /// Throws SpaceMismatch on wrong length, out-of-range simplex masses, etc.
  void validate(const Vec& x) const;

  ValueSpace scaled(double lambda) const;
  ValueSpace slice(std::size_t first_component, std::size_t count) const;

  std::string describe() const;
  bool operator==(const ValueSpace& o) const { return components_ == o.components_; }

 private:
  explicit ValueSpace(std::vector<SpaceComponent> comps);
  std::vector<SpaceComponent> components_;
  std::size_t dim_ = 0;
};

/// Random point for property tests and sampling checks: plausible ranges per
/// kind (latitudes within ±80°, altitudes 0–12 km, times 0–5 h).
Vec sample_point(const ValueSpace& space, std::mt19937_64& rng);

double wrap_degrees(double deg);
/// Shortest-arc separation of two angles in degrees, in [0, 180].
double angular_separation(double a_deg, double b_deg);
/// Great-circle distance in km between (lon, lat) pairs given in degrees.
double haversine_km(double lon1, double lat1, double lon2, double lat2,
                    double radius_km = kEarthRadiusKm);

}  // namespace sheaf
