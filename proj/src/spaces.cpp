#include "sheaf/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "sheaf/error.hpp"

namespace sheaf {

std::string_view to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Euclidean: return "euclidean";
    case SpaceKind::Circle: return "circle";
    case SpaceKind::Geo2D: return "geo2d";
    case SpaceKind::Geo3D: return "geo3d";
    case SpaceKind::Time: return "time";
    case SpaceKind::Discrete: return "discrete";
    case SpaceKind::Simplex: return "simplex";
  }
  return "unknown";
}

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0) w += 360.0;
  if (w >= 360.0) w = 0.0;  // fmod of tiny negatives rounds up to 360
  return w;
}

double angular_separation(double a, double b) {
  double d = std::fabs(wrap_degrees(a) - wrap_degrees(b));
  return std::min(d, 360.0 - d);
}

double haversine_km(double lon1, double lat1, double lon2, double lat2, double radius_km) {
  constexpr double rad = std::numbers::pi / 180.0;
  double p1 = lat1 * rad, p2 = lat2 * rad;
  double dp = p2 - p1, dl = (lon2 - lon1) * rad;
  double h = std::sin(dp / 2) * std::sin(dp / 2) +
             std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * radius_km * std::asin(std::sqrt(h));
}

namespace {

SpaceComponent leaf(SpaceKind kind, std::size_t dim, double weight) {
  if (!(weight > 0) || !std::isfinite(weight))
    throw Error(ErrorCode::InvalidArgument, fmt::format("space weight must be positive, got {}", weight));
  SpaceComponent c;
  c.kind = kind;
  c.dim = dim;
  c.weight = weight;
  return c;
}

}  // namespace

ValueSpace::ValueSpace(std::vector<SpaceComponent> comps) : components_(std::move(comps)) {
  dim_ = 0;
  for (auto& c : components_) {
    c.offset = dim_;
    dim_ += c.dim;
  }
}

ValueSpace ValueSpace::euclidean(std::size_t n, double w) {
  return ValueSpace({leaf(SpaceKind::Euclidean, n, w)});
}
ValueSpace ValueSpace::circle(double w) { return ValueSpace({leaf(SpaceKind::Circle, 1, w)}); }
ValueSpace ValueSpace::geo2d(double w) { return ValueSpace({leaf(SpaceKind::Geo2D, 2, w)}); }
ValueSpace ValueSpace::geo3d(double w) { return ValueSpace({leaf(SpaceKind::Geo3D, 3, w)}); }
ValueSpace ValueSpace::time(double w) { return ValueSpace({leaf(SpaceKind::Time, 1, w)}); }

ValueSpace ValueSpace::discrete(std::vector<std::string> labels, double w) {
  if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "discrete space needs labels");
  auto c = leaf(SpaceKind::Discrete, 1, w);
  c.labels = std::move(labels);
  return ValueSpace({c});
}

ValueSpace ValueSpace::simplex(std::size_t n, double w) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "simplex needs at least one bin");
  return ValueSpace({leaf(SpaceKind::Simplex, n, w)});
}

ValueSpace ValueSpace::product(const std::vector<ValueSpace>& factors, double w) {
  if (factors.empty()) throw Error(ErrorCode::InvalidArgument, "product of no spaces");
  if (!(w > 0)) throw Error(ErrorCode::InvalidArgument, "product weight must be positive");
  std::vector<SpaceComponent> comps;
  for (const auto& f : factors)
    for (auto c : f.components_) {
      c.weight *= w;
      comps.push_back(std::move(c));
    }
  return ValueSpace(std::move(comps));
}

bool ValueSpace::is_euclidean() const noexcept {
  return components_.size() == 1 && components_[0].kind == SpaceKind::Euclidean;
}

bool ValueSpace::is_vector_like() const noexcept {
  return components_.size() == 1 && (components_[0].kind == SpaceKind::Euclidean ||
                                     components_[0].kind == SpaceKind::Simplex);
}

std::vector<bool> ValueSpace::circular_mask() const {
  std::vector<bool> m(dim_, false);
  for (const auto& c : components_)
    if (c.kind == SpaceKind::Circle) m[c.offset] = true;
  return m;
}

double ValueSpace::component_distance(std::size_t i, const Vec& x, const Vec& y) const {
  const auto& c = components_.at(i);
  const auto o = static_cast<Eigen::Index>(c.offset);
  const auto n = static_cast<Eigen::Index>(c.dim);
  double d = 0;
  switch (c.kind) {
    case SpaceKind::Euclidean:
      d = (x.segment(o, n) - y.segment(o, n)).norm();
      break;
    case SpaceKind::Circle:
      d = angular_separation(x[o], y[o]);
      break;
    case SpaceKind::Geo2D:
      d = haversine_km(x[o], x[o + 1], y[o], y[o + 1]);
      break;
    case SpaceKind::Geo3D: {
      double g = haversine_km(x[o], x[o + 1], y[o], y[o + 1]);
      double dz = (x[o + 2] - y[o + 2]) / 1000.0;
      d = std::sqrt(g * g + dz * dz);
      break;
    }
    case SpaceKind::Time:
      d = std::fabs(x[o] - y[o]);
      break;
    case SpaceKind::Discrete:
      d = std::lround(x[o]) == std::lround(y[o]) ? 0.0 : 1.0;
      break;
    case SpaceKind::Simplex:
      d = 0.5 * (x.segment(o, n) - y.segment(o, n)).lpNorm<1>();
      break;
  }
  return c.weight * d;
}

double ValueSpace::distance(const Vec& x, const Vec& y) const {
  if (static_cast<std::size_t>(x.size()) != dim_ || static_cast<std::size_t>(y.size()) != dim_)
    throw Error(ErrorCode::SpaceMismatch,
                fmt::format("expected points of dimension {}, got {} and {}", dim_, x.size(), y.size()));
  double d = 0;
  for (std::size_t i = 0; i < components_.size(); ++i) d = std::max(d, component_distance(i, x, y));
  return d;
}

void ValueSpace::normalize(Vec& x) const {
  for (const auto& c : components_)
    if (c.kind == SpaceKind::Circle) x[static_cast<Eigen::Index>(c.offset)] = wrap_degrees(x[static_cast<Eigen::Index>(c.offset)]);
}

void ValueSpace::validate(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_)
    throw Error(ErrorCode::SpaceMismatch,
                fmt::format("expected {} coordinates, got {}", dim_, x.size()));
  if (!x.allFinite()) throw Error(ErrorCode::SpaceMismatch, "non-finite coordinate");
  for (const auto& c : components_) {
    const auto o = static_cast<Eigen::Index>(c.offset);
    if (c.kind == SpaceKind::Simplex) {
      auto seg = x.segment(o, static_cast<Eigen::Index>(c.dim));
      if (seg.minCoeff() < -1e-12 || std::fabs(seg.sum() - 1.0) > 1e-9)
        throw Error(ErrorCode::SpaceMismatch, "simplex coordinates must be a probability vector");
    } else if (c.kind == SpaceKind::Discrete) {
      double v = x[o];
      if (v != std::round(v) || v < 0 || v >= static_cast<double>(c.labels.size()))
        throw Error(ErrorCode::SpaceMismatch, fmt::format("label index {} out of range", v));
    } else if (c.kind == SpaceKind::Geo2D || c.kind == SpaceKind::Geo3D) {
      if (std::fabs(x[o + 1]) > 90.0)
        throw Error(ErrorCode::SpaceMismatch, fmt::format("latitude {} out of range", x[o + 1]));
    }
  }
}

ValueSpace ValueSpace::scaled(double lambda) const {
  if (!(lambda > 0)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  auto comps = components_;
  for (auto& c : comps) c.weight *= lambda;
  return ValueSpace(std::move(comps));
}

ValueSpace ValueSpace::slice(std::size_t first, std::size_t count) const {
  if (first + count > components_.size() || count == 0)
    throw Error(ErrorCode::InvalidArgument, "component slice out of range");
  return ValueSpace(std::vector<SpaceComponent>(components_.begin() + static_cast<std::ptrdiff_t>(first),
                                                components_.begin() + static_cast<std::ptrdiff_t>(first + count)));
}

std::string ValueSpace::describe() const {
  std::vector<std::string> parts;
  for (const auto& c : components_) {
    std::string s;
    switch (c.kind) {
      case SpaceKind::Euclidean: s = fmt::format("R^{}", c.dim); break;
      case SpaceKind::Simplex: s = fmt::format("Simplex({})", c.dim); break;
      case SpaceKind::Discrete: s = fmt::format("Discrete({})", c.labels.size()); break;
      default: s = std::string(to_string(c.kind));
    }
    if (c.weight != 1.0) s += fmt::format("*{}", c.weight);
    parts.push_back(std::move(s));
  }
  return fmt::format("{}", fmt::join(parts, " x "));
}

Vec sample_point(const ValueSpace& space, std::mt19937_64& rng) {
  Vec x(static_cast<Eigen::Index>(space.dim()));
  std::normal_distribution<double> normal(0.0, 1.0);
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  for (const auto& c : space.components()) {
    const auto o = static_cast<Eigen::Index>(c.offset);
    switch (c.kind) {
      case SpaceKind::Euclidean:
        for (std::size_t i = 0; i < c.dim; ++i) x[o + static_cast<Eigen::Index>(i)] = normal(rng);
        break;
      case SpaceKind::Circle: x[o] = uniform(0.0, 360.0); break;
      case SpaceKind::Geo2D:
      case SpaceKind::Geo3D:
        x[o] = uniform(-180.0, 180.0);
        x[o + 1] = uniform(-80.0, 80.0);
        if (c.kind == SpaceKind::Geo3D) x[o + 2] = uniform(0.0, 12000.0);
        break;
      case SpaceKind::Time: x[o] = uniform(0.0, 5.0); break;
      case SpaceKind::Discrete:
        x[o] = static_cast<double>(std::uniform_int_distribution<std::size_t>(0, c.labels.size() - 1)(rng));
        break;
      case SpaceKind::Simplex: {
        std::exponential_distribution<double> e(1.0);
        double sum = 0;
        for (std::size_t i = 0; i < c.dim; ++i) sum += x[o + static_cast<Eigen::Index>(i)] = e(rng);
        x.segment(o, static_cast<Eigen::Index>(c.dim)) /= sum;
        break;
      }
    }
  }
  return x;
}

}  // namespace sheaf
