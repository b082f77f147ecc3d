#include "sheaf/consistency.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sheaf/error.hpp"
#include "sheaf/parallel.hpp"

namespace sheaf {

Assignment::Assignment(std::shared_ptr<const Sheaf> sheaf) : sheaf_(std::move(sheaf)) {
  if (!sheaf_) throw Error(ErrorCode::InvalidArgument, "assignment needs a sheaf");
}

void Assignment::set(OpenId id, Vec value) {
  const auto& t = sheaf_->topology();
  if (id >= t.size()) throw Error(ErrorCode::InvalidArgument, "open set id out of range");
  const ValueSpace& s = sheaf_->stalk(id);
  s.validate(value);
  s.normalize(value);
  double r = sheaf_->agreement_residual(id, value);
  if (r > Sheaf::kAgreementTolerance)
    throw Error(ErrorCode::SpaceMismatch,
                fmt::format("components of the value on '{}' disagree by {}", t.key(id), r));
  values_[id] = std::move(value);
}

const Vec& Assignment::at(OpenId id) const {
  auto it = values_.find(id);
  if (it == values_.end())
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("assignment has no value on '{}'", sheaf_->topology().key(id)));
  return it->second;
}

std::vector<OpenId> Assignment::domain() const {
  std::vector<OpenId> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

double assignment_distance(const Assignment& a, const Assignment& b) {
  if (a.sheaf_ptr() != b.sheaf_ptr())
    throw Error(ErrorCode::SheafMismatch, "assignments belong to different sheaves");
  double d = 0;
  for (OpenId u : a.domain())
    if (b.defined(u)) d = std::max(d, a.sheaf().stalk(u).distance(a.at(u), b.at(u)));
  return d;
}

RadiusReport consistency_radius(const Assignment& a) {
  RadiusReport rep;
  const Sheaf& sh = a.sheaf();
  const Topology& t = sh.topology();
  std::vector<std::pair<OpenId, OpenId>> pairs;
  for (const auto& [v, u] : comparable_pairs(t))
    if (a.defined(u) && a.defined(v)) pairs.emplace_back(v, u);
  rep.edges.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    auto [v, u] = pairs[i];
    double e = sh.stalk(v).distance(a.at(v), sh.restrict(u, v, a.at(u)));
    rep.edges[i] = {v, u, e};
  });
  std::stable_sort(rep.edges.begin(), rep.edges.end(),
                   [](const EdgeError& x, const EdgeError& y) { return x.error > y.error; });
  for (const auto& e : rep.edges) rep.radius = std::max(rep.radius, e.error);
  return rep;
}

bool is_epsilon_approximate(const Assignment& a, double eps) {
  if (eps < 0) throw Error(ErrorCode::InvalidArgument, "epsilon must be nonnegative");
  return consistency_radius(a).radius <= eps + 1e-12;
}

Assignment pullback_global(std::shared_ptr<const Sheaf> sheaf, const Vec& s) {
  Assignment a(sheaf);
  const OpenId top = sheaf->topology().top();
  for (OpenId u = 1; u < sheaf->topology().size(); ++u) a.set(u, sheaf->restrict(top, u, s));
  return a;
}

std::optional<double> lipschitz_constant(const Sheaf& sh) {
  if (!sh.is_linear()) return std::nullopt;
  const Topology& t = sh.topology();
  for (OpenId u = 1; u < t.size(); ++u)
    if (!sh.stalk(u).is_euclidean()) return std::nullopt;
  double k = 0;
  for (const auto& [v, u] : comparable_pairs(t)) {
    double wu = sh.stalk(u).components()[0].weight, wv = sh.stalk(v).components()[0].weight;
    k = std::max(k, wv / wu * spectral_norm(sh.restriction_matrix(u, v)));
  }
  return k;
}

}  // namespace sheaf
