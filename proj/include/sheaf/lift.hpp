#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sheaf/cohomology.hpp"

namespace sheaf {

/// Regular grid over a box; `bins` cells per axis. Circular axes wrap into
/// [lo, hi) before binning.
struct BinGrid {
  std::vector<double> lo, hi;
  std::vector<bool> circular;
  std::size_t bins = 8;

  std::size_t axes() const noexcept { return lo.size(); }
  /// bins^axes; throws InvalidArgument on overflow.
  std::size_t cells() const;
  std::optional<std::size_t> locate(const Vec& x) const;
  Vec center(std::size_t cell) const;
};

/// Markov matrix of a map between finite bin sets: M(f(i), i) = 1.
/// Throws UnmappedBin when some f(i) is missing or out of range.
Matrix stochastic_lift(const std::vector<std::optional<std::size_t>>& f, std::size_t codomain_bins);

/// M(j, i) = fraction of the sub-sample points of domain cell i (a regular
/// sub-grid with `subsamples` points per axis) that f sends into codomain cell j.
SparseMatrix stochastic_lift(const std::function<Vec(const Vec&)>& f, const BinGrid& domain,
                             const BinGrid& codomain, std::size_t subsamples = 1);

/// Largest |column sum − 1| plus a penalty for negative entries.
double column_stochastic_error(const SparseMatrix& m);

/// Linearization of a (possibly nonlinear) sheaf with a declared top stalk.
/// Grid points of the top-stalk box are pushed to every declared open and
/// binned there. A cell of open U is a distinct tuple of the bins of all
/// declared opens inside U, and restriction forgets the bins outside the
/// smaller set. Every restriction is therefore a 0/1 column-stochastic matrix
/// and composition holds exactly.
class LiftedSheaf final : public LinearCoefficients {
 public:
  const Topology& topology() const override { return topology_; }
  std::size_t dim(OpenId id) const override { return cells_.at(id).size(); }
  SparseMatrix map(OpenId from, OpenId to) const override;

  std::size_t samples() const noexcept { return samples_; }
  /// Worst column-stochastic error over the Hasse edges.
  double max_column_error() const;

  friend LiftedSheaf lift_sheaf(const Sheaf&, const std::vector<std::pair<double, double>>&,
                                std::size_t, std::size_t);

 private:
  Topology topology_;
  std::size_t samples_ = 0;
  std::vector<OpenId> declared_;                         // declared nonempty opens
  std::vector<std::vector<std::size_t>> keys_;           // per open: positions into declared_
  std::vector<std::vector<std::vector<std::uint64_t>>> cells_;  // per open: sorted distinct tuples
};

/// `box` gives [lo, hi] per coordinate of the top stalk; the grid uses
/// min(bins, floor(max_samples^(1/dim))) points per axis.
LiftedSheaf lift_sheaf(const Sheaf& sheaf, const std::vector<std::pair<double, double>>& box,
                       std::size_t bins = 8, std::size_t max_samples = 20000);

}  // namespace sheaf
