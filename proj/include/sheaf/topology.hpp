#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sheaf {

/// Bitset over the entity universe. v1 supports at most 64 entities.
using EntityMask = std::uint64_t;
using OpenId = std::size_t;

inline constexpr std::size_t kMaxEntities = 64;

/// Ordered list of unique entity names; the position of a name is its bit.
class EntityUniverse {
 public:
  EntityUniverse() = default;
  explicit EntityUniverse(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  EntityMask full_mask() const noexcept;
  /// Throws UnknownEntity for names outside the universe.
  EntityMask mask_of(std::span<const std::string> names) const;
  std::vector<std::string> names_in(EntityMask mask) const;

  /// Canonical key: member names sorted lexicographically, joined by '+'.
  std::string key(EntityMask mask) const;
  EntityMask parse_key(std::string_view key) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct OpenSet {
  EntityMask members = 0;
  OpenId id = 0;

  bool contains(const OpenSet& other) const noexcept {
    return (other.members & ~members) == 0;
  }
  bool empty() const noexcept { return members == 0; }
};

struct TopologyOptions {
  std::size_t max_open_sets = 4096;
};

/// A finite topology with its open sets in canonical order (by cardinality,
/// then by bit pattern), so the empty set has id 0 and X is last.
class Topology {
 public:
  const EntityUniverse& universe() const noexcept { return universe_; }
  std::size_t size() const noexcept { return opens_.size(); }
  const OpenSet& open(OpenId id) const { return opens_.at(id); }
  std::span<const OpenSet> opens() const noexcept { return opens_; }
  EntityMask members(OpenId id) const { return opens_.at(id).members; }

  std::optional<OpenId> find(EntityMask mask) const;
  /// Throws UnknownEntity / InvalidArgument when the key does not name an open set.
  OpenId find_key(std::string_view key) const;
  std::string key(OpenId id) const { return universe_.key(members(id)); }

  OpenId empty_set() const noexcept { return 0; }
  OpenId top() const noexcept { return opens_.size() - 1; }

  /// Closure of the subbase under pairwise intersection (plus X when the
  /// subbase does not cover it). Every open set is a union of basis sets.
  std::span<const OpenId> basis() const noexcept { return basis_; }
  bool is_basis(OpenId id) const { return is_basis_.at(id); }
  std::span<const EntityMask> subbase() const noexcept { return subbase_; }

  /// Hasse diagram of inclusion: children are the maximal proper open subsets.
  std::span<const OpenId> children(OpenId id) const { return children_.at(id); }
  std::span<const OpenId> parents(OpenId id) const { return parents_.at(id); }

  bool subset(OpenId a, OpenId b) const { return open(b).contains(open(a)); }

  /// Distinct minimal open neighbourhoods U_x = intersection of all opens containing x.
  std::vector<OpenId> minimal_neighborhoods() const;
  OpenId minimal_neighborhood(std::size_t entity) const;

  /// Subspace topology on the entities of an open set. The returned vector maps
  /// every open of the subspace back to its id in this topology.
  std::pair<Topology, std::vector<OpenId>> subspace(OpenId id) const;

  friend Topology generate_topology(const EntityUniverse&, std::span<const EntityMask>,
                                    TopologyOptions);

 private:
  EntityUniverse universe_;
  std::vector<EntityMask> subbase_;
  std::vector<OpenSet> opens_;
  std::unordered_map<EntityMask, OpenId> index_;
  std::vector<OpenId> basis_;
  std::vector<bool> is_basis_;
  std::vector<std::vector<OpenId>> children_;
  std::vector<std::vector<OpenId>> parents_;
};

/// Smallest topology containing the subbase. Throws TopologyTooLarge rather
/// than truncating when the open-set count exceeds the cap.
Topology generate_topology(const EntityUniverse& universe, std::span<const EntityMask> subbase,
                           TopologyOptions options = {});
Topology generate_topology(const EntityUniverse& universe,
                           const std::vector<std::vector<std::string>>& subbase,
                           TopologyOptions options = {});

/// All (smaller, larger) pairs with smaller a proper nonempty subset of larger,
/// found by walking the Hasse diagram downward.
std::vector<std::pair<OpenId, OpenId>> comparable_pairs(const Topology& topology);

struct TopologyViolation {
  enum class Kind { MissingEmpty, MissingWhole, UnionNotClosed, IntersectionNotClosed };
  Kind kind;
  EntityMask first = 0;
  EntityMask second = 0;
  EntityMask witness = 0;  // the missing union/intersection
};

struct TopologyReport {
  std::vector<TopologyViolation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

std::string_view to_string(TopologyViolation::Kind kind);

/// Checks the closure axioms of a family of subsets of an n-entity universe.
TopologyReport verify_topology(std::size_t universe_size, std::span<const EntityMask> family);

}  // namespace sheaf
