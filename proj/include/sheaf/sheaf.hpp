#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sheaf/restriction.hpp"
#include "sheaf/spaces.hpp"
#include "sheaf/topology.hpp"

namespace sheaf {

struct DeclaredRestriction {
  OpenId from = 0;
  OpenId to = 0;
  RestrictionMap map;
};

/// User-supplied part of a sheaf: stalks and restrictions on some opens
/// (typically the basis). complete_unions() fills in the rest.
struct PartialSheaf {
  Topology topology;
  std::map<OpenId, ValueSpace> stalks;
  std::vector<DeclaredRestriction> restrictions;

  PartialSheaf() = default;
  explicit PartialSheaf(Topology t) : topology(std::move(t)) {}

  PartialSheaf& stalk(std::string_view key, ValueSpace space);
  PartialSheaf& restriction(std::string_view from, std::string_view to, RestrictionMap map);
};

/// A presheaf on every open set. Declared opens keep their stalk; every other
/// nonempty open U is glued from its components (the maximal declared opens
/// inside U). For nonlinear sheaves a union value is the tuple of component
/// values; for linear sheaves it is the coordinate vector c of the tuple Q·c
/// in an orthonormal basis Q of the agreement subspace.
class Sheaf {
 public:
  const Topology& topology() const noexcept { return decl_.topology; }
  const PartialSheaf& declaration() const noexcept { return decl_; }

  const ValueSpace& stalk(OpenId id) const { return stalks_.at(id); }
  const ValueSpace& stalk(std::string_view key) const { return stalk(topology().find_key(key)); }
  std::size_t dim(OpenId id) const { return stalks_.at(id).dim(); }
  bool declared(OpenId id) const { return decl_.stalks.count(id) > 0; }
  const std::vector<OpenId>& components(OpenId id) const { return components_.at(id); }

  /// Every declared stalk is a vector space and every declared map is linear.
  bool is_linear() const noexcept { return linear_; }
  /// Q for a linear union open (tuple = Q * coords). Identity-free: empty for declared opens.
  const Matrix& union_basis(OpenId id) const { return union_basis_.at(id); }

  /// Restriction attached to a Hasse edge (parent covers child).
  const RestrictionMap& edge(OpenId parent, OpenId child) const;
  std::vector<std::pair<OpenId, OpenId>> hasse_edges() const;

  /// S(to ⊆ from), composed along the canonical Hasse path and memoized.
  /// Throws NotComparable unless `to` ⊆ `from`.
  RestrictionMap restriction(OpenId from, OpenId to) const;
  Vec restrict(OpenId from, OpenId to, const Vec& value) const;
  /// Linear sheaves only.
  Matrix restriction_matrix(OpenId from, OpenId to) const;
  std::vector<OpenId> canonical_path(OpenId from, OpenId to) const;

  /// Largest disagreement between component values on pairwise overlaps of a
  /// nonlinear union tuple; 0 for declared opens and linear unions.
  double agreement_residual(OpenId id, const Vec& value) const;
  static constexpr double kAgreementTolerance = 1e-6;

  /// A random point of S(U); union points are drawn so their components agree.
  Vec sample(OpenId id, std::mt19937_64& rng) const;

  /// Every nonempty open declared with its current stalk and every Hasse edge
  /// with its current map; complete_unions() of this is the same sheaf.
  PartialSheaf as_declared() const;

  friend Sheaf complete_unions(PartialSheaf partial);

 private:
  RestrictionMap declared_map(OpenId from, OpenId to) const;
  Matrix declared_matrix(OpenId from, OpenId to) const;
  Vec tuple_of(OpenId id, const Vec& value) const;

  PartialSheaf decl_;
  bool linear_ = true;
  std::vector<ValueSpace> stalks_;
  std::vector<std::vector<OpenId>> components_;
  std::vector<Matrix> union_basis_;
  std::map<std::pair<OpenId, OpenId>, RestrictionMap> declared_paths_;
  std::map<std::pair<OpenId, OpenId>, RestrictionMap> edges_;

  struct PairHash {
    std::size_t operator()(const std::pair<OpenId, OpenId>& p) const noexcept {
      return std::hash<std::uint64_t>()(static_cast<std::uint64_t>(p.first) * 1000003u + p.second);
    }
  };
  struct Memo {
    std::shared_mutex mu;
    std::unordered_map<std::pair<OpenId, OpenId>, RestrictionMap, PairHash> maps;
  };
  std::unique_ptr<Memo> memo_ = std::make_unique<Memo>();
};

/// Builds stalks and Hasse-edge restrictions for every open set. Throws
/// MissingIntersectionStalk when two overlapping components have no declared
/// stalk on their intersection, and MissingRestriction when a needed declared
/// restriction path does not exist.
Sheaf complete_unions(PartialSheaf partial);

struct FunctorialityReport {
  std::size_t pairs_checked = 0;  // pairs reachable by at least two Hasse paths
  double max_discrepancy = 0.0;
  std::optional<std::pair<OpenId, OpenId>> witness;  // (larger, smaller)
  bool pass = true;
};

FunctorialityReport verify_functoriality(const Sheaf& sheaf, std::size_t samples = 256,
                                         std::uint64_t seed = 1, double tol = 1e-9);

struct GluingFailure {
  OpenId first = 0;
  OpenId second = 0;
  bool existence = true;
  bool uniqueness = true;
  std::size_t joint_rank = 0;
  std::size_t agreement_dim = 0;
  std::size_t union_dim = 0;
};

struct GluingReport {
  std::size_t pairs_checked = 0;
  std::vector<GluingFailure> failures;
  bool pass() const noexcept { return failures.empty(); }
};

/// Rank test of both gluing conditions for every pair of nonempty opens.
/// Throws NonlinearSheaf for sheaves with nonlinear maps or stalks.
GluingReport verify_gluing(const Sheaf& sheaf);

}  // namespace sheaf
