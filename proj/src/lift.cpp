#include "sheaf/lift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sheaf/error.hpp"

namespace sheaf {

std::size_t BinGrid::cells() const {
  std::size_t n = 1;
  for (std::size_t a = 0; a < axes(); ++a) {
    if (bins != 0 && n > std::numeric_limits<std::size_t>::max() / bins)
      throw Error(ErrorCode::InvalidArgument, "grid has too many cells");
    n *= bins;
  }
  return n;
}

std::optional<std::size_t> BinGrid::locate(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != axes())
    throw Error(ErrorCode::SpaceMismatch, "point dimension differs from grid");
  std::size_t cell = 0;
  for (std::size_t a = 0; a < axes(); ++a) {
    double v = x[static_cast<Eigen::Index>(a)];
    const double width = hi[a] - lo[a];
    if (a < circular.size() && circular[a]) v = lo[a] + std::fmod(std::fmod(v - lo[a], width) + width, width);
    if (!(v >= lo[a] && v <= hi[a])) return std::nullopt;
    auto b = static_cast<std::size_t>(std::floor((v - lo[a]) / width * static_cast<double>(bins)));
    b = std::min(b, bins - 1);
    cell = cell * bins + b;
  }
  return cell;
}

Vec BinGrid::center(std::size_t cell) const {
  Vec c(static_cast<Eigen::Index>(axes()));
  for (std::size_t a = axes(); a-- > 0;) {
    std::size_t b = cell % bins;
    cell /= bins;
    c[static_cast<Eigen::Index>(a)] = lo[a] + (static_cast<double>(b) + 0.5) * (hi[a] - lo[a]) / static_cast<double>(bins);
  }
  return c;
}

Matrix stochastic_lift(const std::vector<std::optional<std::size_t>>& f, std::size_t codomain_bins) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(codomain_bins), static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f[i] || *f[i] >= codomain_bins)
      throw Error(ErrorCode::UnmappedBin, fmt::format("domain bin {} has no image", i));
    m(static_cast<Eigen::Index>(*f[i]), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return m;
}

SparseMatrix stochastic_lift(const std::function<Vec(const Vec&)>& f, const BinGrid& domain,
                             const BinGrid& codomain, std::size_t subsamples) {
  if (subsamples == 0) throw Error(ErrorCode::InvalidArgument, "need at least one sub-sample");
  const std::size_t n = domain.cells(), m = codomain.cells();
  BinGrid sub = domain;
  sub.bins = subsamples;
  const std::size_t per = sub.cells();
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < n; ++i) {
    Vec c = domain.center(i);
    std::map<std::size_t, double> mass;
    for (std::size_t s = 0; s < per; ++s) {
      // Sub-grid point inside cell i.
      Vec x = c;
      std::size_t rest = s;
      for (std::size_t a = domain.axes(); a-- > 0;) {
        std::size_t b = rest % subsamples;
        rest /= subsamples;
        double w = (domain.hi[a] - domain.lo[a]) / static_cast<double>(domain.bins);
        x[static_cast<Eigen::Index>(a)] += ((static_cast<double>(b) + 0.5) / static_cast<double>(subsamples) - 0.5) * w;
      }
      auto j = codomain.locate(f(x));
      if (!j) throw Error(ErrorCode::UnmappedBin, fmt::format("domain bin {} maps outside the codomain grid", i));
      mass[*j] += 1.0 / static_cast<double>(per);
    }
    for (auto [j, v] : mass)
      trip.emplace_back(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i), v);
  }
  SparseMatrix out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

double column_stochastic_error(const SparseMatrix& m) {
  double worst = 0;
  for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
    double sum = 0;
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      if (it.value() < 0) worst = std::max(worst, -it.value());
      sum += it.value();
    }
    worst = std::max(worst, std::fabs(sum - 1.0));
  }
  return worst;
}

SparseMatrix LiftedSheaf::map(OpenId from, OpenId to) const {
  if (!topology_.subset(to, from))
    throw Error(ErrorCode::NotComparable,
                fmt::format("'{}' is not contained in '{}'", topology_.key(to), topology_.key(from)));
  const auto& kf = keys_.at(from);
  const auto& kt = keys_.at(to);
  std::vector<std::size_t> pick;  // positions of kt inside kf
  for (std::size_t d : kt) pick.push_back(static_cast<std::size_t>(std::find(kf.begin(), kf.end(), d) - kf.begin()));
  const auto& cf = cells_.at(from);
  const auto& ct = cells_.at(to);
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<std::uint64_t> key(pick.size());
  for (std::size_t i = 0; i < cf.size(); ++i) {
    for (std::size_t j = 0; j < pick.size(); ++j) key[j] = cf[i][pick[j]];
    auto it = std::lower_bound(ct.begin(), ct.end(), key);
    trip.emplace_back(static_cast<Eigen::Index>(it - ct.begin()), static_cast<Eigen::Index>(i), 1.0);
  }
  SparseMatrix m(static_cast<Eigen::Index>(ct.size()), static_cast<Eigen::Index>(cf.size()));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

double LiftedSheaf::max_column_error() const {
  double worst = 0;
  for (OpenId u = 1; u < topology_.size(); ++u)
    for (OpenId c : topology_.children(u))
      if (c != topology_.empty_set()) worst = std::max(worst, column_stochastic_error(map(u, c)));
  return worst;
}

LiftedSheaf lift_sheaf(const Sheaf& sheaf, const std::vector<std::pair<double, double>>& box,
                       std::size_t bins, std::size_t max_samples) {
  const Topology& t = sheaf.topology();
  const OpenId top = t.top();
  if (!sheaf.declared(top)) throw Error(ErrorCode::NoTopStalk, "lifting needs a declared stalk on X");
  const std::size_t dim = sheaf.dim(top);
  if (box.size() != dim)
    throw Error(ErrorCode::SpaceMismatch,
                fmt::format("lift box has {} intervals, the top stalk has {} coordinates", box.size(), dim));
  if (bins == 0) throw Error(ErrorCode::InvalidArgument, "need at least one bin per axis");
  for (const auto& [lo, hi] : box)
    if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, "lift box intervals must have hi > lo");

  LiftedSheaf ls;
  ls.topology_ = t;
  for (OpenId u = 1; u < t.size(); ++u)
    if (sheaf.declared(u)) ls.declared_.push_back(u);

  // Grid points of the top box.
  std::size_t per_axis = bins;
  while (per_axis > 1 && std::pow(static_cast<double>(per_axis), static_cast<double>(dim)) > static_cast<double>(max_samples))
    --per_axis;
  BinGrid sampler;
  for (const auto& [lo, hi] : box) {
    sampler.lo.push_back(lo);
    sampler.hi.push_back(hi);
  }
  sampler.bins = per_axis;
  const std::size_t n = sampler.cells();
  ls.samples_ = n;

  // Values of every sample on every declared open.
  const std::size_t nd = ls.declared_.size();
  std::vector<std::vector<Vec>> values(nd, std::vector<Vec>(n));
  for (std::size_t s = 0; s < n; ++s) {
    Vec x = sheaf.stalk(top).normalized(sampler.center(s));
    for (std::size_t d = 0; d < nd; ++d) values[d][s] = sheaf.restrict(top, ls.declared_[d], x);
  }
  // Each declared open bins its own values on a grid fitted to their range.
  std::vector<std::vector<std::uint64_t>> bin_of(nd, std::vector<std::uint64_t>(n));
  for (std::size_t d = 0; d < nd; ++d) {
    const ValueSpace& sp = sheaf.stalk(ls.declared_[d]);
    BinGrid g;
    g.bins = bins;
    auto circ = sp.circular_mask();
    for (std::size_t a = 0; a < sp.dim(); ++a) {
      const auto ai = static_cast<Eigen::Index>(a);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t s = 0; s < n; ++s) {
        lo = std::min(lo, values[d][s][ai]);
        hi = std::max(hi, values[d][s][ai]);
      }
      if (circ[a]) {
        lo = 0.0;
        hi = 360.0;
      } else {
        double pad = 1e-9 * std::max(1.0, hi - lo);
        lo -= pad;
        hi += pad;
      }
      g.lo.push_back(lo);
      g.hi.push_back(hi);
      g.circular.push_back(circ[a]);
    }
    if (g.axes() > 0 && std::pow(static_cast<double>(bins), static_cast<double>(g.axes())) > 1.8e19)
      throw Error(ErrorCode::InvalidArgument, "too many bins for a lifted stalk");
    for (std::size_t s = 0; s < n; ++s) bin_of[d][s] = g.axes() == 0 ? 0 : *g.locate(values[d][s]);
  }

  // Cells per open: distinct tuples over the declared opens inside it.
  ls.keys_.assign(t.size(), {});
  ls.cells_.assign(t.size(), {});
  for (OpenId u = 1; u < t.size(); ++u) {
    for (std::size_t d = 0; d < nd; ++d)
      if (t.subset(ls.declared_[d], u)) ls.keys_[u].push_back(d);
    auto& cells = ls.cells_[u];
    cells.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<std::uint64_t> key;
      for (std::size_t d : ls.keys_[u]) key.push_back(bin_of[d][s]);
      cells.push_back(std::move(key));
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  }
  return ls;
}

}  // namespace sheaf
