#include "sheaf/topology.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include <fmt/format.h>

#include "sheaf/error.hpp"

namespace sheaf {

EntityUniverse::EntityUniverse(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() > kMaxEntities)
    throw Error(ErrorCode::TopologyTooLarge,
                fmt::format("{} entities exceeds the limit of {}", names_.size(), kMaxEntities));
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const auto& n = names_[i];
    if (n.empty() || n.find('+') != std::string::npos)
      throw Error(ErrorCode::InvalidArgument, fmt::format("invalid entity name '{}'", n));
    if (!index_.emplace(n, i).second)
      throw Error(ErrorCode::InvalidArgument, fmt::format("duplicate entity '{}'", n));
  }
}

std::optional<std::size_t> EntityUniverse::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EntityMask EntityUniverse::full_mask() const noexcept {
  return names_.size() == 64 ? ~EntityMask{0} : ((EntityMask{1} << names_.size()) - 1);
}

EntityMask EntityUniverse::mask_of(std::span<const std::string> names) const {
  EntityMask m = 0;
  for (const auto& n : names) {
    auto i = index_of(n);
    if (!i) throw Error(ErrorCode::UnknownEntity, fmt::format("unknown entity '{}'", n));
    m |= EntityMask{1} << *i;
  }
  return m;
}

std::vector<std::string> EntityUniverse::names_in(EntityMask mask) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (mask >> i & 1) out.push_back(names_[i]);
  return out;
}

std::string EntityUniverse::key(EntityMask mask) const {
  auto names = names_in(mask);
  std::sort(names.begin(), names.end());
  return fmt::format("{}", fmt::join(names, "+"));
}

EntityMask EntityUniverse::parse_key(std::string_view key) const {
  EntityMask m = 0;
  if (key.empty()) return m;
  std::size_t pos = 0;
  while (true) {
    auto next = key.find('+', pos);
    auto part = key.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    auto i = index_of(part);
    if (!i) throw Error(ErrorCode::UnknownEntity, fmt::format("unknown entity '{}'", part));
    m |= EntityMask{1} << *i;
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return m;
}

std::optional<OpenId> Topology::find(EntityMask mask) const {
  auto it = index_.find(mask);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

OpenId Topology::find_key(std::string_view key) const {
  auto m = universe_.parse_key(key);
  auto id = find(m);
  if (!id) throw Error(ErrorCode::InvalidArgument, fmt::format("'{}' is not an open set", key));
  return *id;
}

OpenId Topology::minimal_neighborhood(std::size_t entity) const {
  EntityMask bit = EntityMask{1} << entity;
  EntityMask m = universe_.full_mask();
  for (const auto& o : opens_)
    if (o.members & bit) m &= o.members;
  return index_.at(m);
}

std::vector<OpenId> Topology::minimal_neighborhoods() const {
  std::set<OpenId> ids;
  for (std::size_t e = 0; e < universe_.size(); ++e) ids.insert(minimal_neighborhood(e));
  return {ids.begin(), ids.end()};
}

namespace {

// Compress the bits of `mask` selected by `domain` into consecutive low bits.
EntityMask compress(EntityMask mask, EntityMask domain) {
  EntityMask out = 0;
  int k = 0;
  for (int i = 0; i < 64; ++i) {
    if (domain >> i & 1) {
      if (mask >> i & 1) out |= EntityMask{1} << k;
      ++k;
    }
  }
  return out;
}

EntityMask expand(EntityMask mask, EntityMask domain) {
  EntityMask out = 0;
  int k = 0;
  for (int i = 0; i < 64; ++i) {
    if (domain >> i & 1) {
      if (mask >> k & 1) out |= EntityMask{1} << i;
      ++k;
    }
  }
  return out;
}

}  // namespace

std::pair<Topology, std::vector<OpenId>> Topology::subspace(OpenId id) const {
  EntityMask dom = members(id);
  std::vector<std::string> names = universe_.names_in(dom);
  EntityUniverse sub(names);
  std::vector<EntityMask> gens;
  for (OpenId b : basis_)
    if ((members(b) & ~dom) == 0 && members(b) != 0) gens.push_back(compress(members(b), dom));
  TopologyOptions opts;
  opts.max_open_sets = std::max<std::size_t>(opens_.size(), 1);
  Topology t = generate_topology(sub, gens, opts);
  std::vector<OpenId> back(t.size());
  for (OpenId i = 0; i < t.size(); ++i) back[i] = index_.at(expand(t.members(i), dom));
  return {std::move(t), std::move(back)};
}

Topology generate_topology(const EntityUniverse& universe, std::span<const EntityMask> subbase,
                           TopologyOptions options) {
  const EntityMask full = universe.full_mask();
  Topology t;
  t.universe_ = universe;
  for (EntityMask s : subbase) {
    if (s & ~full)
      throw Error(ErrorCode::UnknownEntity, "subbase set references entities outside the universe");
    t.subbase_.push_back(s);
  }

  // Basis: subbase closed under pairwise intersection.
  std::set<EntityMask> basis;
  EntityMask covered = 0;
  for (EntityMask s : subbase) {
    if (s) basis.insert(s);
    covered |= s;
  }
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<EntityMask> cur(basis.begin(), basis.end());
    for (std::size_t i = 0; i < cur.size(); ++i)
      for (std::size_t j = i + 1; j < cur.size(); ++j) {
        EntityMask m = cur[i] & cur[j];
        if (m && basis.insert(m).second) grew = true;
      }
  }
  if (covered != full && full != 0) basis.insert(full);

  // Opens: every union of basis sets, grown one basis set at a time.
  std::set<EntityMask> opens{0};
  for (EntityMask b : basis) {
    std::vector<EntityMask> add;
    for (EntityMask o : opens)
      if (!opens.count(o | b)) add.push_back(o | b);
    opens.insert(add.begin(), add.end());
    if (opens.size() > options.max_open_sets)
      throw Error(ErrorCode::TopologyTooLarge,
                  fmt::format("topology exceeds {} open sets", options.max_open_sets));
  }
  opens.insert(full);
  if (opens.size() > options.max_open_sets)
    throw Error(ErrorCode::TopologyTooLarge,
                fmt::format("topology exceeds {} open sets", options.max_open_sets));

  std::vector<EntityMask> sorted(opens.begin(), opens.end());
  std::sort(sorted.begin(), sorted.end(), [](EntityMask a, EntityMask b) {
    int pa = std::popcount(a), pb = std::popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    t.opens_.push_back({sorted[i], i});
    t.index_.emplace(sorted[i], i);
  }
  t.is_basis_.assign(sorted.size(), false);
  for (EntityMask b : basis) {
    OpenId id = t.index_.at(b);
    t.is_basis_[id] = true;
  }
  for (OpenId i = 0; i < sorted.size(); ++i)
    if (t.is_basis_[i]) t.basis_.push_back(i);

  // Hasse diagram: children of U are its maximal proper open subsets.
  const std::size_t n = sorted.size();
  t.children_.assign(n, {});
  t.parents_.assign(n, {});
  for (OpenId u = 0; u < n; ++u) {
    std::vector<OpenId> below;
    for (OpenId v = 0; v < u; ++v)
      if (sorted[v] != sorted[u] && (sorted[v] & ~sorted[u]) == 0) below.push_back(v);
    // Larger sets first so a candidate is rejected by any strictly larger one.
    for (auto it = below.rbegin(); it != below.rend(); ++it) {
      bool maximal = true;
      for (OpenId c : t.children_[u])
        if ((sorted[*it] & ~sorted[c]) == 0) {
          maximal = false;
          break;
        }
      if (maximal) t.children_[u].push_back(*it);
    }
    std::sort(t.children_[u].begin(), t.children_[u].end());
    for (OpenId c : t.children_[u]) t.parents_[c].push_back(u);
  }
  return t;
}

Topology generate_topology(const EntityUniverse& universe,
                           const std::vector<std::vector<std::string>>& subbase,
                           TopologyOptions options) {
  std::vector<EntityMask> masks;
  masks.reserve(subbase.size());
  for (const auto& s : subbase) masks.push_back(universe.mask_of(s));
  return generate_topology(universe, masks, options);
}

std::vector<std::pair<OpenId, OpenId>> comparable_pairs(const Topology& topology) {
  std::vector<std::pair<OpenId, OpenId>> out;
  const std::size_t n = topology.size();
  std::vector<char> seen(n);
  std::vector<OpenId> stack;
  for (OpenId u = 1; u < n; ++u) {
    std::fill(seen.begin(), seen.end(), 0);
    stack.assign(topology.children(u).begin(), topology.children(u).end());
    while (!stack.empty()) {
      OpenId v = stack.back();
      stack.pop_back();
      if (seen[v]) continue;
      seen[v] = 1;
      for (OpenId c : topology.children(v)) stack.push_back(c);
    }
    for (OpenId v = 1; v < n; ++v)
      if (seen[v]) out.emplace_back(v, u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string_view to_string(TopologyViolation::Kind kind) {
  switch (kind) {
    case TopologyViolation::Kind::MissingEmpty: return "missing empty set";
    case TopologyViolation::Kind::MissingWhole: return "missing whole space";
    case TopologyViolation::Kind::UnionNotClosed: return "not closed under union";
    case TopologyViolation::Kind::IntersectionNotClosed: return "not closed under intersection";
  }
  return "unknown";
}

TopologyReport verify_topology(std::size_t universe_size, std::span<const EntityMask> family) {
  TopologyReport r;
  const EntityMask full =
      universe_size >= 64 ? ~EntityMask{0} : ((EntityMask{1} << universe_size) - 1);
  std::set<EntityMask> fam(family.begin(), family.end());
  if (!fam.count(0)) r.violations.push_back({TopologyViolation::Kind::MissingEmpty, 0, 0, 0});
  if (!fam.count(full))
    r.violations.push_back({TopologyViolation::Kind::MissingWhole, 0, 0, full});
  std::vector<EntityMask> v(fam.begin(), fam.end());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (!fam.count(v[i] | v[j]))
        r.violations.push_back({TopologyViolation::Kind::UnionNotClosed, v[i], v[j], v[i] | v[j]});
      if (!fam.count(v[i] & v[j]))
        r.violations.push_back(
            {TopologyViolation::Kind::IntersectionNotClosed, v[i], v[j], v[i] & v[j]});
    }
  return r;
}

}  // namespace sheaf
