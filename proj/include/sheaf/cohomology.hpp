#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "sheaf/linalg.hpp"
#include "sheaf/sheaf.hpp"

namespace sheaf {

/// Vector-space data over a topology: a dimension per open set and a matrix
/// per inclusion. Cohomology only sees this interface, so lifted (stochastic)
/// sheaves and ordinary linear sheaves are handled alike.
class LinearCoefficients {
 public:
  virtual ~LinearCoefficients() = default;
  virtual const Topology& topology() const = 0;
  virtual std::size_t dim(OpenId id) const = 0;
  /// Matrix of S(to ⊆ from).
  virtual SparseMatrix map(OpenId from, OpenId to) const = 0;
};

/// Adapter for a linear Sheaf. Throws NonlinearSheaf otherwise.
class SheafCoefficients final : public LinearCoefficients {
 public:
  explicit SheafCoefficients(const Sheaf& sheaf);
  const Topology& topology() const override { return sheaf_.topology(); }
  std::size_t dim(OpenId id) const override { return sheaf_.dim(id); }
  SparseMatrix map(OpenId from, OpenId to) const override;

 private:
  const Sheaf& sheaf_;
};

/// One basis cell of a cochain space. For a Čech complex `indices` are
/// increasing cover positions and `open` their intersection; for the
/// topology-level complex `indices` is a strictly decreasing chain of minimal
/// neighbourhoods (as positions in `CochainComplex::poset`) ending at `open`.
struct Cell {
  std::vector<std::size_t> indices;
  OpenId open = 0;
  std::size_t dim = 0;
  std::size_t offset = 0;
};

struct CochainComplex {
  enum class Kind { Cech, Topology };
  Kind kind = Kind::Cech;
  std::vector<OpenId> cover;  // Čech: the cover; Topology: the poset of minimal neighbourhoods
  OpenId covered = 0;         // union of the cover / the root open
  std::vector<std::vector<Cell>> degrees;  // C^0 .. C^{K+1}
  std::vector<SparseMatrix> coboundaries;  // d^0 .. d^K

  std::size_t dim(std::size_t k) const;
  /// Largest |entry| of d^{k+1} d^k over all k.
  double max_composite_entry() const;
};

struct BettiRow {
  std::size_t degree = 0;
  std::size_t cochain_dim = 0;
  std::size_t rank = 0;  // rank of d^k
  std::size_t betti = 0;
};

struct BettiTable {
  std::vector<BettiRow> rows;
  std::vector<std::size_t> betti() const;
};

/// Throws InvalidArgument for empty covers, empty or repeated sets.
CochainComplex build_complex(const LinearCoefficients& coeffs, const std::vector<OpenId>& cover,
                             std::size_t max_degree);
CochainComplex build_complex(const Sheaf& sheaf, const std::vector<OpenId>& cover, std::size_t max_degree);

/// Sheaf cohomology of the subspace `root` computed on its poset of minimal
/// open neighbourhoods: cochains on chains p0 ⊋ … ⊋ pk with values in S(pk).
CochainComplex build_topology_complex(const LinearCoefficients& coeffs, OpenId root,
                                      std::size_t max_degree);

/// Betti numbers for degrees 0..min(max_degree, last nonzero cochain degree).
BettiTable betti(const CochainComplex& complex, std::size_t max_degree);
BettiTable betti(const Sheaf& sheaf, const std::vector<OpenId>& cover, std::size_t max_degree);
BettiTable topology_betti(const LinearCoefficients& coeffs, OpenId root, std::size_t max_degree);

/// Columns span the compatible families on the cover made of every nonempty
/// open set, i.e. ker d^0; the count equals betti_0 of that cover.
Matrix global_sections_via_h0(const Sheaf& sheaf);

struct LerayIntersection {
  std::vector<std::size_t> indices;  // cover positions
  OpenId open = 0;
  std::vector<std::size_t> betti;
  bool acyclic = true;
};

struct LerayReport {
  std::vector<LerayIntersection> intersections;
  bool verdict = true;  // every intersection acyclic
  BettiTable cover_betti;
  BettiTable topology_betti;
  bool tables_equal = false;
  std::optional<std::size_t> witness;  // first non-acyclic intersection
};

LerayReport leray_check(const LinearCoefficients& coeffs, const std::vector<OpenId>& cover,
                        std::size_t max_degree);
LerayReport leray_check(const Sheaf& sheaf, const std::vector<OpenId>& cover, std::size_t max_degree);

/// Rank with the dense eliminator for moderate sizes and the sparse one beyond.
std::size_t matrix_rank(const SparseMatrix& m);

}  // namespace sheaf
