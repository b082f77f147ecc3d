#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sheaf/linalg.hpp"
#include "sheaf/spaces.hpp"

namespace sheaf {

using Params = std::map<std::string, double>;

/// A registered nonlinear map. Dimensions may depend on the parameters, so
/// the catalog stores factories.
struct BuiltinMap {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::function<Vec(const Vec&)> fn;
};
using BuiltinFactory = std::function<BuiltinMap(const Params&)>;

void register_builtin(const std::string& name, BuiltinFactory factory);
bool has_builtin(const std::string& name);
std::vector<std::string> builtin_names();

/// Body of a restriction S(V ⊆ U): a map from the coordinates of S(U) to
/// those of S(V). Cheap to copy (shared immutable body).
class RestrictionMap {
 public:
  enum class Kind { Identity, Projection, Linear, Sparse, Affine, Builtin, Composite, Blocks };

  /// One output block of a Blocks map: `map` applied to input[offset, offset+length).
  struct Block {
    std::size_t offset = 0;
    std::size_t length = 0;
    std::shared_ptr<const RestrictionMap> map;
  };

  RestrictionMap();  // identity on 0 coordinates

  static RestrictionMap identity(std::size_t dim);
  static RestrictionMap projection(std::vector<std::size_t> indices, std::size_t in_dim);
  static RestrictionMap linear(Matrix m);
  static RestrictionMap sparse(SparseMatrix m);
  static RestrictionMap affine(Matrix m, Vec offset);
  /// Throws UnknownBuiltin when `name` is not registered.
  static RestrictionMap builtin(const std::string& name, Params params = {});
  /// parts[0] is applied first.
  static RestrictionMap composite(std::vector<RestrictionMap> parts);
  static RestrictionMap blocks(std::size_t in_dim, std::vector<Block> blocks);

  Kind kind() const noexcept;
  std::size_t in_dim() const noexcept;
  std::size_t out_dim() const noexcept;

  Vec apply(const Vec& x) const;
  Vec operator()(const Vec& x) const { return apply(x); }

  /// Linear in the strict sense (no offset, no builtin anywhere inside).
  bool is_linear() const noexcept;
  /// Throws NonlinearSheaf for non-linear maps.
  Matrix matrix() const;
  SparseMatrix sparse_matrix() const;

  // Inspection for serialization.
  const std::vector<std::size_t>& indices() const;
  const Matrix& dense() const;
  const Vec& offset() const;
  const std::string& builtin_name() const;
  const Params& params() const;
  const std::vector<RestrictionMap>& parts() const;
  const std::vector<Block>& block_list() const;

  std::string describe() const;

 private:
  struct Impl;
  explicit RestrictionMap(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

}  // namespace sheaf
