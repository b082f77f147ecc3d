#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sheaf/consistency.hpp"
#include "sheaf/sheaf.hpp"

namespace sheaf {

/// Serializable description of a sheaf:
///
///   { "entities": ["x", ...],
///     "subbase": [["x", "y"], ...],
///     "stalks": { "x+y": <space>, ... },
///     "restrictions": [ { "from": "x+y", "to": "x", "kind": "projection",
///                         "payload": { "indices": [0], "in_dim": 2 } }, ... ],
///     "weights": { "bearing_km_per_deg": 25, ... },      optional, informational
///     "lift_box": [[lo, hi], ...],                       optional
///     "covers": { "default": ["x+y", ...], ... } }       optional
///
/// A <space> is {"kind": "euclidean"|"circle"|"geo2d"|"geo3d"|"time"|
/// "discrete"|"simplex"|"product", "dim", "weight", "labels", "factors"}.
/// Restriction kinds: identity {dim}, projection {indices, in_dim},
/// linear {matrix}, sparse {rows, cols, entries: [[i, j, v], ...]},
/// affine {matrix, offset}, builtin {name, params}, composite {parts},
/// blocks {in_dim, blocks: [{offset, length, map}]}; nested maps are
/// {kind, payload} objects.
struct SheafSpec {
  PartialSheaf partial;
  std::map<std::string, double> weights;
  std::vector<std::pair<double, double>> lift_box;
  std::map<std::string, std::vector<std::string>> covers;

  /// complete_unions(partial)
  Sheaf build() const;
  /// covers["default"] when present, otherwise the subbase.
  std::vector<OpenId> default_cover() const;
};

/// Throws Error(Parse) on malformed JSON or schema violations; library
/// errors (unknown entities, dimension mismatches) propagate unchanged.
SheafSpec parse_sheaf_spec(std::string_view json_text);
SheafSpec load_sheaf_spec(const std::string& path);
std::string dump_sheaf_spec(const SheafSpec& spec);
/// Spec of the declared part of an existing sheaf.
SheafSpec spec_of(const Sheaf& sheaf);

/// CSV with a mandatory header "open_set,c0,c1,..."; one row per open set,
/// trailing cells may be empty. Throws Error(Parse) on malformed rows or a
/// value count that differs from the stalk dimension.
Assignment parse_assignment_csv(std::shared_ptr<const Sheaf> sheaf, std::string_view text);
Assignment load_assignment_csv(std::shared_ptr<const Sheaf> sheaf, const std::string& path);
std::string dump_assignment_csv(const Assignment& a);

/// Columns smaller, larger, error_km.
std::string dump_radius_csv(const Sheaf& sheaf, const RadiusReport& report);

/// 17 significant digits.
std::string format_number(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace sheaf
