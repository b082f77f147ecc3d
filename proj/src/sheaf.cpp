#include "sheaf/sheaf.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>
#include <set>

#include <fmt/format.h>

#include "sheaf/error.hpp"

namespace sheaf {

PartialSheaf& PartialSheaf::stalk(std::string_view key, ValueSpace space) {
  stalks[topology.find_key(key)] = std::move(space);
  return *this;
}

PartialSheaf& PartialSheaf::restriction(std::string_view from, std::string_view to,
                                        RestrictionMap map) {
  restrictions.push_back({topology.find_key(from), topology.find_key(to), std::move(map)});
  return *this;
}

namespace {

std::vector<std::vector<OpenId>> declared_adjacency(const PartialSheaf& p) {
  std::vector<std::vector<OpenId>> adj(p.topology.size());
  for (std::size_t i = 0; i < p.restrictions.size(); ++i) adj[p.restrictions[i].from].push_back(i);
  for (auto& a : adj)
    std::sort(a.begin(), a.end(), [&](std::size_t x, std::size_t y) {
      return p.restrictions[x].to < p.restrictions[y].to;
    });
  return adj;
}

}  // namespace

Sheaf complete_unions(PartialSheaf partial) {
  Sheaf sh;
  sh.decl_ = std::move(partial);
  const PartialSheaf& d = sh.decl_;
  const Topology& t = d.topology;
  const std::size_t n = t.size();

  // Validate declarations.
  for (const auto& [id, space] : d.stalks)
    if (id == t.empty_set() && space.dim() != 0)
      throw Error(ErrorCode::SpaceMismatch, "the empty set must carry a zero-dimensional stalk");
  std::set<std::pair<OpenId, OpenId>> seen;
  for (const auto& r : d.restrictions) {
    const std::string from = t.key(r.from), to = t.key(r.to);
    if (r.from == r.to || !t.subset(r.to, r.from))
      throw Error(ErrorCode::NotComparable,
                  fmt::format("restriction from '{}' to '{}' is not a proper inclusion", from, to));
    if (!d.stalks.count(r.from) || !d.stalks.count(r.to))
      throw Error(ErrorCode::MissingRestriction,
                  fmt::format("restriction '{}' -> '{}' references an open set without a stalk", from, to));
    if (!seen.insert({r.from, r.to}).second)
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("restriction '{}' -> '{}' declared twice", from, to));
    if (r.map.in_dim() != d.stalks.at(r.from).dim() || r.map.out_dim() != d.stalks.at(r.to).dim())
      throw Error(ErrorCode::SpaceMismatch,
                  fmt::format("restriction '{}' -> '{}' maps {} -> {} coordinates but stalks have {} -> {}",
                              from, to, r.map.in_dim(), r.map.out_dim(), d.stalks.at(r.from).dim(),
                              d.stalks.at(r.to).dim()));
    sh.linear_ = sh.linear_ && r.map.is_linear();
  }
  for (const auto& [id, space] : d.stalks)
    if (id != t.empty_set()) sh.linear_ = sh.linear_ && space.is_vector_like();

  // Shortest declared path between every pair of declared opens.
  auto adj = declared_adjacency(d);
  for (const auto& [src, space] : d.stalks) {
    sh.declared_paths_[{src, src}] = RestrictionMap::identity(space.dim());
    std::vector<std::vector<RestrictionMap>> via(n);
    std::vector<char> visited(n, 0);
    std::deque<OpenId> queue{src};
    visited[src] = 1;
    while (!queue.empty()) {
      OpenId u = queue.front();
      queue.pop_front();
      for (std::size_t ri : adj[u]) {
        const auto& r = d.restrictions[ri];
        if (visited[r.to]) continue;
        visited[r.to] = 1;
        via[r.to] = via[u];
        via[r.to].push_back(r.map);
        sh.declared_paths_[{src, r.to}] = RestrictionMap::composite(via[r.to]);
        queue.push_back(r.to);
      }
    }
  }

  sh.stalks_.resize(n);
  sh.components_.assign(n, {});
  sh.union_basis_.assign(n, Matrix());
  sh.stalks_[t.empty_set()] = ValueSpace::euclidean(0);

  for (OpenId u = 1; u < n; ++u) {
    if (d.stalks.count(u)) {
      sh.stalks_[u] = d.stalks.at(u);
      continue;
    }
    const EntityMask um = t.members(u);
    std::vector<OpenId> inside;
    for (const auto& [id, space] : d.stalks)
      if (id != t.empty_set() && (t.members(id) & ~um) == 0) inside.push_back(id);
    std::vector<OpenId> comps;
    EntityMask covered = 0;
    for (OpenId a : inside) {
      bool maximal = true;
      for (OpenId b : inside)
        if (a != b && t.subset(a, b)) maximal = false;
      if (maximal) {
        comps.push_back(a);
        covered |= t.members(a);
      }
    }
    if (covered != um)
      throw Error(ErrorCode::MissingIntersectionStalk,
                  fmt::format("open set '{}' has no stalk and is not a union of open sets with stalks",
                              t.key(u)));
    for (std::size_t i = 0; i < comps.size(); ++i)
      for (std::size_t j = i + 1; j < comps.size(); ++j) {
        EntityMask m = t.members(comps[i]) & t.members(comps[j]);
        if (!m) continue;
        OpenId w = *t.find(m);
        if (!d.stalks.count(w))
          throw Error(ErrorCode::MissingIntersectionStalk,
                      fmt::format("'{}' and '{}' overlap on '{}', which has no stalk", t.key(comps[i]),
                                  t.key(comps[j]), t.key(w)));
      }
    sh.components_[u] = comps;

    if (sh.linear_) {
      std::size_t total = 0;
      std::vector<std::size_t> off;
      for (OpenId c : comps) {
        off.push_back(total);
        total += d.stalks.at(c).dim();
      }
      std::vector<Matrix> rows;
      std::size_t nrows = 0;
      for (std::size_t i = 0; i < comps.size(); ++i)
        for (std::size_t j = i + 1; j < comps.size(); ++j) {
          EntityMask m = t.members(comps[i]) & t.members(comps[j]);
          if (!m) continue;
          OpenId w = *t.find(m);
          Matrix ri = sh.declared_matrix(comps[i], w), rj = sh.declared_matrix(comps[j], w);
          Matrix row = Matrix::Zero(ri.rows(), static_cast<Eigen::Index>(total));
          row.block(0, static_cast<Eigen::Index>(off[i]), ri.rows(), ri.cols()) = ri;
          row.block(0, static_cast<Eigen::Index>(off[j]), rj.rows(), rj.cols()) -= rj;
          nrows += static_cast<std::size_t>(row.rows());
          rows.push_back(std::move(row));
        }
      Matrix constraints(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(total));
      Eigen::Index at = 0;
      for (const auto& r : rows) {
        constraints.middleRows(at, r.rows()) = r;
        at += r.rows();
      }
      Matrix q = nrows == 0 ? Matrix(Matrix::Identity(static_cast<Eigen::Index>(total),
                                                      static_cast<Eigen::Index>(total)))
                            : nullspace(constraints);
      sh.stalks_[u] = ValueSpace::euclidean(static_cast<std::size_t>(q.cols()));
      sh.union_basis_[u] = std::move(q);
    } else {
      std::vector<ValueSpace> factors;
      for (OpenId c : comps) factors.push_back(d.stalks.at(c));
      sh.stalks_[u] = ValueSpace::product(factors);
    }
  }

  // One restriction per Hasse edge.
  for (OpenId p = 1; p < n; ++p) {
    const bool pd = sh.declared(p);
    const std::size_t pdim = sh.dim(p);
    std::vector<std::size_t> poff;
    if (!pd) {
      std::size_t acc = 0;
      for (OpenId c : sh.components_[p]) {
        poff.push_back(acc);
        acc += d.stalks.at(c).dim();
      }
    }
    // Which declared piece of p feeds a declared target dd, and where it sits.
    auto source_of = [&](OpenId dd) -> std::size_t {
      const auto& comps = sh.components_[p];
      for (std::size_t i = 0; i < comps.size(); ++i)
        if (t.subset(dd, comps[i])) return i;
      throw Error(ErrorCode::MissingRestriction, "internal: no component contains target");
    };
    for (OpenId c : t.children(p)) {
      std::vector<OpenId> targets;
      if (c != t.empty_set()) {
        if (sh.declared(c)) targets = {c};
        else targets = sh.components_[c];
      }
      if (sh.linear_) {
        const Eigen::Index in_tuple =
            pd ? static_cast<Eigen::Index>(pdim) : sh.union_basis_[p].rows();
        std::vector<Matrix> parts;
        Eigen::Index out_tuple = 0;
        for (OpenId dd : targets) {
          Matrix blk;
          if (pd) {
            blk = sh.declared_matrix(p, dd);
          } else {
            std::size_t i = source_of(dd);
            Matrix r = sh.declared_matrix(sh.components_[p][i], dd);
            blk = Matrix::Zero(r.rows(), in_tuple);
            blk.block(0, static_cast<Eigen::Index>(poff[i]), r.rows(), r.cols()) = r;
          }
          out_tuple += blk.rows();
          parts.push_back(std::move(blk));
        }
        Matrix b(out_tuple, in_tuple);
        Eigen::Index at = 0;
        for (const auto& m : parts) {
          b.middleRows(at, m.rows()) = m;
          at += m.rows();
        }
        if (!pd) b = b * sh.union_basis_[p];
        if (c != t.empty_set() && !sh.declared(c)) b = sh.union_basis_[c].transpose() * b;
        if (c == t.empty_set()) b = Matrix(0, static_cast<Eigen::Index>(pdim));
        sh.edges_[{p, c}] = RestrictionMap::linear(std::move(b));
      } else {
        std::vector<RestrictionMap::Block> blocks;
        for (OpenId dd : targets) {
          if (pd) {
            blocks.push_back({0, pdim, std::make_shared<RestrictionMap>(sh.declared_map(p, dd))});
          } else {
            std::size_t i = source_of(dd);
            OpenId src = sh.components_[p][i];
            blocks.push_back({poff[i], d.stalks.at(src).dim(),
                              std::make_shared<RestrictionMap>(sh.declared_map(src, dd))});
          }
        }
        if (blocks.size() == 1 && blocks[0].offset == 0 && blocks[0].length == pdim)
          sh.edges_[{p, c}] = *blocks[0].map;
        else
          sh.edges_[{p, c}] = RestrictionMap::blocks(pdim, std::move(blocks));
      }
    }
  }
  return sh;
}

RestrictionMap Sheaf::declared_map(OpenId from, OpenId to) const {
  auto it = declared_paths_.find({from, to});
  if (it == declared_paths_.end())
    throw Error(ErrorCode::MissingRestriction,
                fmt::format("no declared restriction path from '{}' to '{}'", topology().key(from),
                            topology().key(to)));
  return it->second;
}

Matrix Sheaf::declared_matrix(OpenId from, OpenId to) const { return declared_map(from, to).matrix(); }

const RestrictionMap& Sheaf::edge(OpenId parent, OpenId child) const {
  auto it = edges_.find({parent, child});
  if (it == edges_.end())
    throw Error(ErrorCode::NotComparable,
                fmt::format("'{}' does not cover '{}'", topology().key(parent), topology().key(child)));
  return it->second;
}

std::vector<std::pair<OpenId, OpenId>> Sheaf::hasse_edges() const {
  std::vector<std::pair<OpenId, OpenId>> out;
  for (const auto& [k, v] : edges_) out.push_back(k);
  return out;
}

std::vector<OpenId> Sheaf::canonical_path(OpenId from, OpenId to) const {
  const Topology& t = topology();
  if (!t.subset(to, from))
    throw Error(ErrorCode::NotComparable,
                fmt::format("'{}' is not contained in '{}'", t.key(to), t.key(from)));
  std::vector<OpenId> path{from};
  OpenId cur = from;
  while (cur != to) {
    for (OpenId c : t.children(cur))
      if (t.subset(to, c)) {
        cur = c;
        break;
      }
    path.push_back(cur);
  }
  return path;
}

RestrictionMap Sheaf::restriction(OpenId from, OpenId to) const {
  if (from == to) {
    if (from >= stalks_.size()) throw Error(ErrorCode::NotComparable, "unknown open set");
    return RestrictionMap::identity(dim(from));
  }
  {
    std::shared_lock lock(memo_->mu);
    auto it = memo_->maps.find({from, to});
    if (it != memo_->maps.end()) return it->second;
  }
  auto path = canonical_path(from, to);
  RestrictionMap result;
  if (linear_) {
    Matrix m = edge(path[0], path[1]).matrix();
    for (std::size_t i = 2; i < path.size(); ++i) m = edge(path[i - 1], path[i]).matrix() * m;
    result = RestrictionMap::linear(std::move(m));
  } else {
    std::vector<RestrictionMap> parts;
    for (std::size_t i = 1; i < path.size(); ++i) parts.push_back(edge(path[i - 1], path[i]));
    result = RestrictionMap::composite(std::move(parts));
  }
  std::unique_lock lock(memo_->mu);
  return memo_->maps.emplace(std::make_pair(from, to), result).first->second;
}

Vec Sheaf::restrict(OpenId from, OpenId to, const Vec& value) const {
  if (static_cast<std::size_t>(value.size()) != dim(from))
    throw Error(ErrorCode::SpaceMismatch,
                fmt::format("value for '{}' has {} coordinates, stalk has {}", topology().key(from),
                            value.size(), dim(from)));
  Vec out = restriction(from, to).apply(value);
  stalks_[to].normalize(out);
  return out;
}

Matrix Sheaf::restriction_matrix(OpenId from, OpenId to) const {
  if (!linear_) throw Error(ErrorCode::NonlinearSheaf, "sheaf has nonlinear restrictions");
  return restriction(from, to).matrix();
}

Vec Sheaf::tuple_of(OpenId id, const Vec& value) const {
  if (declared(id) || !linear_) return value;
  return union_basis_[id] * value;
}

double Sheaf::agreement_residual(OpenId id, const Vec& value) const {
  if (declared(id) || linear_ || id == topology().empty_set()) return 0.0;
  const auto& comps = components_[id];
  const Topology& t = topology();
  std::vector<Vec> parts;
  Eigen::Index at = 0;
  for (OpenId c : comps) {
    auto k = static_cast<Eigen::Index>(dim(c));
    parts.push_back(value.segment(at, k));
    at += k;
  }
  double worst = 0;
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (std::size_t j = i + 1; j < comps.size(); ++j) {
      EntityMask m = t.members(comps[i]) & t.members(comps[j]);
      if (!m) continue;
      OpenId w = *t.find(m);
      Vec a = declared_map(comps[i], w).apply(parts[i]);
      Vec b = declared_map(comps[j], w).apply(parts[j]);
      stalks_[w].normalize(a);
      stalks_[w].normalize(b);
      worst = std::max(worst, stalks_[w].distance(a, b));
    }
  return worst;
}

Vec Sheaf::sample(OpenId id, std::mt19937_64& rng) const {
  if (declared(id) || id == topology().empty_set()) return sample_point(stalk(id), rng);
  if (linear_) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec x(static_cast<Eigen::Index>(dim(id)));
    for (auto& v : x) v = normal(rng);
    return x;
  }
  // Draw on the smallest declared open above, so the components agree.
  for (OpenId u = id + 1; u < topology().size(); ++u)
    if (declared(u) && topology().subset(id, u)) return restrict(u, id, sample_point(stalk(u), rng));
  return sample_point(stalk(id), rng);
}

PartialSheaf Sheaf::as_declared() const {
  PartialSheaf p(topology());
  for (OpenId u = 1; u < stalks_.size(); ++u) p.stalks[u] = stalks_[u];
  for (const auto& [k, m] : edges_)
    if (k.second != topology().empty_set()) p.restrictions.push_back({k.first, k.second, m});
  return p;
}

FunctorialityReport verify_functoriality(const Sheaf& sheaf, std::size_t samples,
                                         std::uint64_t seed, double tol) {
  FunctorialityReport rep;
  const Topology& t = sheaf.topology();
  const std::size_t n = t.size();
  std::mt19937_64 rng(seed);
  for (OpenId v = 1; v < n; ++v) {
    // Number of Hasse paths from each open down to v.
    std::vector<double> paths(n, 0.0);
    paths[v] = 1.0;
    for (OpenId u = v + 1; u < n; ++u) {
      if (!t.subset(v, u)) continue;
      for (OpenId c : t.children(u))
        if (t.subset(v, c)) paths[u] += paths[c];
    }
    for (OpenId u = v + 1; u < n; ++u) {
      if (paths[u] < 2.0) continue;
      ++rep.pairs_checked;
      for (std::size_t s = 0; s < samples; ++s) {
        Vec x = sheaf.sample(u, rng);
        if (sheaf.agreement_residual(u, x) > tol) continue;
        Vec ref = sheaf.restrict(u, v, x);
        for (OpenId c : t.children(u)) {
          if (!t.subset(v, c)) continue;
          Vec y = sheaf.edge(u, c).apply(x);
          sheaf.stalk(c).normalize(y);
          Vec z = sheaf.restrict(c, v, y);
          double dd = sheaf.stalk(v).distance(ref, z);
          if (!(dd <= rep.max_discrepancy)) {
            rep.max_discrepancy = std::isnan(dd) ? INFINITY : dd;
            rep.witness = std::make_pair(u, v);
          }
        }
      }
    }
  }
  rep.pass = rep.max_discrepancy <= tol;
  if (rep.pass && rep.max_discrepancy == 0.0) rep.witness.reset();
  return rep;
}

GluingReport verify_gluing(const Sheaf& sheaf) {
  if (!sheaf.is_linear())
    throw Error(ErrorCode::NonlinearSheaf, "gluing is certified only for linear sheaves");
  GluingReport rep;
  const Topology& t = sheaf.topology();
  const std::size_t n = t.size();
  for (OpenId u = 1; u < n; ++u)
    for (OpenId v = u + 1; v < n; ++v) {
      if (t.subset(u, v) || t.subset(v, u)) continue;
      ++rep.pairs_checked;
      OpenId w = *t.find(t.members(u) | t.members(v));
      OpenId i = *t.find(t.members(u) & t.members(v));
      const auto du = static_cast<Eigen::Index>(sheaf.dim(u));
      const auto dv = static_cast<Eigen::Index>(sheaf.dim(v));
      const auto dw = static_cast<Eigen::Index>(sheaf.dim(w));
      const auto di = static_cast<Eigen::Index>(sheaf.dim(i));
      Matrix joint(du + dv, dw);
      joint.topRows(du) = sheaf.restriction_matrix(w, u);
      joint.bottomRows(dv) = sheaf.restriction_matrix(w, v);
      Matrix agree(di, du + dv);
      if (di > 0) {
        agree.leftCols(du) = sheaf.restriction_matrix(u, i);
        agree.rightCols(dv) = -sheaf.restriction_matrix(v, i);
      }
      GluingFailure g;
      g.first = u;
      g.second = v;
      g.joint_rank = rank(joint);
      g.agreement_dim = static_cast<std::size_t>(du + dv) - (di > 0 ? rank(agree) : 0);
      g.union_dim = static_cast<std::size_t>(dw);
      g.existence = g.joint_rank == g.agreement_dim;
      g.uniqueness = g.joint_rank == g.union_dim;
      if (!g.existence || !g.uniqueness) rep.failures.push_back(g);
    }
  return rep;
}

}  // namespace sheaf
