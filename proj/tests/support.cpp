#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "sheaf/error.hpp"

namespace sheaf::testing {

std::vector<EntityMask> random_subbase(std::mt19937_64& rng, std::size_t n, std::size_t max_sets) {
  std::uniform_int_distribution<std::size_t> count(1, max_sets);
  std::uniform_int_distribution<EntityMask> mask(1, (EntityMask{1} << n) - 1);
  std::vector<EntityMask> out(count(rng));
  for (auto& m : out) m = mask(rng);
  return out;
}

std::set<EntityMask> closure_oracle(std::size_t n, const std::vector<EntityMask>& subbase) {
  std::set<EntityMask> s(subbase.begin(), subbase.end());
  s.insert(0);
  s.insert((EntityMask{1} << n) - 1);
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<EntityMask> cur(s.begin(), s.end());
    for (auto a : cur)
      for (auto b : cur) {
        grew |= s.insert(a | b).second;
        grew |= s.insert(a & b).second;
      }
  }
  return s;
}

namespace {

// Orthonormal basis of the intersection of the row spaces of several
// matrices (all with the same column count).
Eigen::MatrixXd row_space_intersection(const std::vector<Eigen::MatrixXd>& ms, Eigen::Index cols) {
  // x ∈ ∩ row(M_i)  ⇔  x ⊥ ker(M_i) for all i.
  std::vector<Eigen::MatrixXd> kernels;
  Eigen::Index total = 0;
  for (const auto& m : ms) {
    Eigen::MatrixXd k = m.rows() == 0 ? Eigen::MatrixXd::Identity(cols, cols) : svd_nullspace(m);
    total += k.cols();
    kernels.push_back(k);
  }
  Eigen::MatrixXd stacked(total, cols);
  Eigen::Index at = 0;
  for (const auto& k : kernels) {
    stacked.middleRows(at, k.cols()) = k.transpose();
    at += k.cols();
  }
  if (total == 0) return Eigen::MatrixXd::Identity(cols, cols);
  return svd_nullspace(stacked);  // columns span the intersection
}

}  // namespace

Sheaf random_linear_sheaf(std::mt19937_64& rng, std::size_t max_entities, std::size_t max_opens,
                          std::size_t max_ambient) {
  std::uniform_int_distribution<std::size_t> nent(1, max_entities);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (true) {
    const std::size_t n = nent(rng);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
    auto sub = random_subbase(rng, n, 4);
    Topology t = generate_topology(EntityUniverse(names), sub);
    if (t.size() > max_opens) continue;

    const auto amb = static_cast<Eigen::Index>(std::uniform_int_distribution<std::size_t>(1, max_ambient)(rng));
    // Row spaces, assigned from X downward so every parent is done first.
    std::map<OpenId, Eigen::MatrixXd> rows;
    for (OpenId u = t.size() - 1; u >= 1; --u) {
      std::vector<Eigen::MatrixXd> parents;
      for (OpenId p : t.parents(u)) parents.push_back(rows.at(p));
      Eigen::MatrixXd basis = parents.empty() ? Eigen::MatrixXd::Identity(amb, amb)
                                              : row_space_intersection(parents, amb);
      const auto avail = basis.cols();
      const auto d = static_cast<Eigen::Index>(
          std::uniform_int_distribution<Eigen::Index>(avail > 0 ? 1 : 0, avail)(rng));
      // Orthonormal rows keep every restriction well conditioned.
      Eigen::MatrixXd g(avail, d);
      for (auto& v : g.reshaped()) v = normal(rng);
      Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() * Eigen::MatrixXd::Identity(avail, d);
      rows[u] = q.transpose() * basis.transpose();
    }
    PartialSheaf ps(t);
    for (OpenId u = 1; u < t.size(); ++u) ps.stalks[u] = ValueSpace::euclidean(static_cast<std::size_t>(rows[u].rows()));
    for (OpenId u = 1; u < t.size(); ++u)
      for (OpenId c : t.children(u)) {
        if (c == t.empty_set()) continue;
        // R P_u = P_c; P_u has orthonormal rows.
        Eigen::MatrixXd r = rows[c] * rows[u].transpose();
        ps.restrictions.push_back({u, c, RestrictionMap::linear(r)});
      }
    return complete_unions(std::move(ps));
  }
}

std::size_t brute_force_global_sections(const Sheaf& sh) {
  const Topology& t = sh.topology();
  std::vector<Eigen::Index> off(t.size() + 1, 0);
  for (OpenId u = 1; u < t.size(); ++u) off[u + 1] = off[u] + static_cast<Eigen::Index>(sh.dim(u));
  const Eigen::Index total = off[t.size()];
  std::vector<Eigen::MatrixXd> blocks;
  for (auto [v, u] : comparable_pairs(t)) {
    Eigen::MatrixXd r = sh.restriction_matrix(u, v);
    Eigen::MatrixXd row = Eigen::MatrixXd::Zero(r.rows(), total);
    row.block(0, off[u], r.rows(), r.cols()) = r;
    row.block(0, off[v], r.rows(), r.rows()) -= Eigen::MatrixXd::Identity(r.rows(), r.rows());
    blocks.push_back(row);
  }
  Eigen::Index nrows = 0;
  for (auto& b : blocks) nrows += b.rows();
  if (nrows == 0) return static_cast<std::size_t>(total);
  Eigen::MatrixXd c(nrows, total);
  Eigen::Index at = 0;
  for (auto& b : blocks) {
    c.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(c);
  lu.setThreshold(1e-9);
  return static_cast<std::size_t>(total - lu.rank());
}

Eigen::MatrixXd svd_nullspace(const Eigen::MatrixXd& m, double tol) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = tol * std::max(1.0, s.size() ? s[0] : 0.0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > cut) ++r;
  return svd.matrixV().rightCols(n - r);
}

double chord_angle_km(double lon1, double lat1, double lon2, double lat2, double radius) {
  const double k = std::numbers::pi / 180.0;
  auto unit = [&](double lon, double lat) {
    return Eigen::Vector3d(std::cos(lat * k) * std::cos(lon * k), std::cos(lat * k) * std::sin(lon * k),
                           std::sin(lat * k));
  };
  Eigen::Vector3d a = unit(lon1, lat1), b = unit(lon2, lat2);
  // atan2 of |a×b| and a·b is well conditioned at all separations.
  return radius * std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace sheaf::testing
