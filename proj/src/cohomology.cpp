#include "sheaf/cohomology.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include <fmt/format.h>

#include "sheaf/error.hpp"
#include "sheaf/parallel.hpp"

namespace sheaf {

SheafCoefficients::SheafCoefficients(const Sheaf& sheaf) : sheaf_(sheaf) {
  if (!sheaf.is_linear())
    throw Error(ErrorCode::NonlinearSheaf,
                "cohomology needs linear restrictions between vector-space stalks; "
                "lift the sheaf onto bins first");
}

SparseMatrix SheafCoefficients::map(OpenId from, OpenId to) const {
  return sheaf_.restriction(from, to).sparse_matrix();
}

std::size_t CochainComplex::dim(std::size_t k) const {
  if (k >= degrees.size()) return 0;
  std::size_t d = 0;
  for (const auto& c : degrees[k]) d += c.dim;
  return d;
}

double CochainComplex::max_composite_entry() const {
  double worst = 0;
  for (std::size_t k = 0; k + 1 < coboundaries.size(); ++k) {
    SparseMatrix dd = coboundaries[k + 1] * coboundaries[k];
    worst = std::max(worst, max_abs(dd));
  }
  return worst;
}

std::vector<std::size_t> BettiTable::betti() const {
  std::vector<std::size_t> out;
  for (const auto& r : rows) out.push_back(r.betti);
  return out;
}

std::size_t matrix_rank(const SparseMatrix& m) {
  const double cells = static_cast<double>(m.rows()) * static_cast<double>(m.cols());
  if (cells <= 4e6) return rank(Matrix(m));
  return rank(m);
}

namespace {

void assign_offsets(std::vector<Cell>& cells) {
  std::size_t off = 0;
  for (auto& c : cells) {
    c.offset = off;
    off += c.dim;
  }
}

void add_block(std::vector<Eigen::Triplet<double>>& t, std::size_t row, std::size_t col,
               const SparseMatrix& block, double sign) {
  for (Eigen::Index k = 0; k < block.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(block, k); it; ++it)
      t.emplace_back(static_cast<Eigen::Index>(row) + it.row(), static_cast<Eigen::Index>(col) + it.col(),
                     sign * it.value());
}

SparseMatrix identity_block(std::size_t n) {
  SparseMatrix s(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.setIdentity();
  return s;
}

void check_cover(const Topology& t, const std::vector<OpenId>& cover) {
  if (cover.empty()) throw Error(ErrorCode::InvalidArgument, "cover has no sets");
  std::set<OpenId> seen;
  for (OpenId u : cover) {
    if (u >= t.size()) throw Error(ErrorCode::InvalidArgument, "cover set is not an open set");
    if (u == t.empty_set()) throw Error(ErrorCode::InvalidArgument, "cover contains the empty set");
    if (!seen.insert(u).second)
      throw Error(ErrorCode::InvalidArgument, fmt::format("cover repeats '{}'", t.key(u)));
  }
}

// Every increasing index list with nonempty intersection, grouped by length.
std::vector<std::vector<std::pair<std::vector<std::size_t>, EntityMask>>> nerve(
    const Topology& t, const std::vector<OpenId>& cover, std::size_t max_len) {
  std::vector<std::vector<std::pair<std::vector<std::size_t>, EntityMask>>> out(max_len);
  std::vector<std::size_t> cur;
  std::function<void(std::size_t, EntityMask)> rec = [&](std::size_t next, EntityMask m) {
    for (std::size_t i = next; i < cover.size(); ++i) {
      EntityMask mi = cur.empty() ? t.members(cover[i]) : (m & t.members(cover[i]));
      if (!mi) continue;
      cur.push_back(i);
      out[cur.size() - 1].emplace_back(cur, mi);
      if (cur.size() < max_len) rec(i + 1, mi);
      cur.pop_back();
    }
  };
  rec(0, 0);
  return out;
}

}  // namespace

CochainComplex build_complex(const LinearCoefficients& coeffs, const std::vector<OpenId>& cover,
                             std::size_t max_degree) {
  const Topology& t = coeffs.topology();
  check_cover(t, cover);
  CochainComplex cx;
  cx.kind = CochainComplex::Kind::Cech;
  cx.cover = cover;
  EntityMask all = 0;
  for (OpenId u : cover) all |= t.members(u);
  cx.covered = *t.find(all);

  const std::size_t levels = std::min(max_degree + 2, cover.size());
  auto simplices = nerve(t, cover, levels);
  cx.degrees.resize(max_degree + 2);
  std::vector<std::map<std::vector<std::size_t>, std::size_t>> where(max_degree + 2);
  for (std::size_t k = 0; k < simplices.size(); ++k) {
    for (auto& [idx, mask] : simplices[k]) {
      auto open = t.find(mask);
      if (!open)
        throw Error(ErrorCode::IntersectionNotOpen,
                    fmt::format("intersection of cover sets {} is not open", fmt::join(idx, ",")));
      where[k][idx] = cx.degrees[k].size();
      cx.degrees[k].push_back({idx, *open, coeffs.dim(*open), 0});
    }
    assign_offsets(cx.degrees[k]);
  }

  cx.coboundaries.resize(max_degree + 1);
  std::vector<std::size_t> ks(max_degree + 1);
  for (std::size_t k = 0; k <= max_degree; ++k) ks[k] = k;
  parallel_for(ks.size(), [&](std::size_t k) {
    std::vector<Eigen::Triplet<double>> trip;
    for (const Cell& s : cx.degrees[k + 1]) {
      for (std::size_t j = 0; j < s.indices.size(); ++j) {
        std::vector<std::size_t> face = s.indices;
        face.erase(face.begin() + static_cast<std::ptrdiff_t>(j));
        const Cell& f = cx.degrees[k][where[k].at(face)];
        add_block(trip, s.offset, f.offset, coeffs.map(f.open, s.open), (j % 2 == 0) ? 1.0 : -1.0);
      }
    }
    SparseMatrix d(static_cast<Eigen::Index>(cx.dim(k + 1)), static_cast<Eigen::Index>(cx.dim(k)));
    d.setFromTriplets(trip.begin(), trip.end());
    cx.coboundaries[k] = std::move(d);
  });
  return cx;
}

CochainComplex build_complex(const Sheaf& sheaf, const std::vector<OpenId>& cover, std::size_t max_degree) {
  return build_complex(SheafCoefficients(sheaf), cover, max_degree);
}

CochainComplex build_topology_complex(const LinearCoefficients& coeffs, OpenId root,
                                      std::size_t max_degree) {
  const Topology& t = coeffs.topology();
  if (root == t.empty_set() || root >= t.size())
    throw Error(ErrorCode::InvalidArgument, "topology complex needs a nonempty open set");
  CochainComplex cx;
  cx.kind = CochainComplex::Kind::Topology;
  cx.covered = root;
  std::set<OpenId> poset;
  for (std::size_t e = 0; e < t.universe().size(); ++e)
    if (t.members(root) >> e & 1) poset.insert(t.minimal_neighborhood(e));
  cx.cover.assign(poset.begin(), poset.end());
  const auto& p = cx.cover;

  cx.degrees.resize(max_degree + 2);
  std::vector<std::map<std::vector<std::size_t>, std::size_t>> where(max_degree + 2);
  std::vector<std::size_t> chain;
  std::function<void()> rec = [&] {
    const std::size_t k = chain.size() - 1;
    where[k][chain] = cx.degrees[k].size();
    OpenId last = p[chain.back()];
    cx.degrees[k].push_back({chain, last, coeffs.dim(last), 0});
    if (chain.size() == max_degree + 2) return;
    for (std::size_t q = 0; q < p.size(); ++q)
      if (p[q] != last && t.subset(p[q], last)) {
        chain.push_back(q);
        rec();
        chain.pop_back();
      }
  };
  for (std::size_t q = 0; q < p.size(); ++q) {
    chain = {q};
    rec();
  }
  for (auto& d : cx.degrees) assign_offsets(d);

  cx.coboundaries.resize(max_degree + 1);
  for (std::size_t k = 0; k <= max_degree; ++k) {
    std::vector<Eigen::Triplet<double>> trip;
    for (const Cell& s : cx.degrees[k + 1]) {
      for (std::size_t j = 0; j <= k + 1; ++j) {
        std::vector<std::size_t> face = s.indices;
        face.erase(face.begin() + static_cast<std::ptrdiff_t>(j));
        const Cell& f = cx.degrees[k][where[k].at(face)];
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        if (j <= k) add_block(trip, s.offset, f.offset, identity_block(s.dim), sign);
        else add_block(trip, s.offset, f.offset, coeffs.map(f.open, s.open), sign);
      }
    }
    SparseMatrix d(static_cast<Eigen::Index>(cx.dim(k + 1)), static_cast<Eigen::Index>(cx.dim(k)));
    d.setFromTriplets(trip.begin(), trip.end());
    cx.coboundaries[k] = std::move(d);
  }
  return cx;
}

BettiTable betti(const CochainComplex& cx, std::size_t max_degree) {
  std::size_t top = 0;
  for (std::size_t k = 0; k < cx.degrees.size() && k <= max_degree; ++k)
    if (!cx.degrees[k].empty()) top = k;
  std::vector<std::size_t> ranks(top + 1);
  parallel_for(top + 1, [&](std::size_t k) {
    ranks[k] = k < cx.coboundaries.size() ? matrix_rank(cx.coboundaries[k]) : 0;
  });
  BettiTable table;
  for (std::size_t k = 0; k <= top; ++k) {
    BettiRow r;
    r.degree = k;
    r.cochain_dim = cx.dim(k);
    r.rank = ranks[k];
    const std::size_t prev = k > 0 ? ranks[k - 1] : 0;
    if (r.rank + prev > r.cochain_dim)
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("ranks around degree {} exceed the cochain dimension; d∘d is not zero", k));
    r.betti = r.cochain_dim - r.rank - prev;
    table.rows.push_back(r);
  }
  return table;
}

BettiTable betti(const Sheaf& sheaf, const std::vector<OpenId>& cover, std::size_t max_degree) {
  return betti(build_complex(sheaf, cover, max_degree), max_degree);
}

BettiTable topology_betti(const LinearCoefficients& coeffs, OpenId root, std::size_t max_degree) {
  return betti(build_topology_complex(coeffs, root, max_degree), max_degree);
}

Matrix global_sections_via_h0(const Sheaf& sheaf) {
  std::vector<OpenId> all;
  for (OpenId u = 1; u < sheaf.topology().size(); ++u) all.push_back(u);
  CochainComplex cx = build_complex(sheaf, all, 0);
  return nullspace(Matrix(cx.coboundaries[0]));
}

LerayReport leray_check(const LinearCoefficients& coeffs, const std::vector<OpenId>& cover,
                        std::size_t max_degree) {
  const Topology& t = coeffs.topology();
  check_cover(t, cover);
  LerayReport rep;
  auto simplices = nerve(t, cover, cover.size());
  for (const auto& level : simplices)
    for (const auto& [idx, mask] : level) {
      LerayIntersection li;
      li.indices = idx;
      li.open = *t.find(mask);
      // Chains in the neighbourhood poset are no longer than the entity count.
      std::size_t height = static_cast<std::size_t>(std::popcount(mask));
      li.betti = topology_betti(coeffs, li.open, height).betti();
      for (std::size_t k = 1; k < li.betti.size(); ++k)
        if (li.betti[k] != 0) li.acyclic = false;
      if (!li.acyclic && !rep.witness) rep.witness = rep.intersections.size();
      rep.verdict = rep.verdict && li.acyclic;
      rep.intersections.push_back(std::move(li));
    }
  rep.cover_betti = betti(build_complex(coeffs, cover, max_degree), max_degree);
  EntityMask all = 0;
  for (OpenId u : cover) all |= t.members(u);
  rep.topology_betti = topology_betti(coeffs, *t.find(all), max_degree);
  auto a = rep.cover_betti.betti(), b = rep.topology_betti.betti();
  a.resize(std::max(a.size(), b.size()), 0);
  b.resize(a.size(), 0);
  rep.tables_equal = a == b;
  return rep;
}

LerayReport leray_check(const Sheaf& sheaf, const std::vector<OpenId>& cover, std::size_t max_degree) {
  return leray_check(SheafCoefficients(sheaf), cover, max_degree);
}

}  // namespace sheaf
