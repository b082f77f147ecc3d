#pragma once

// Random fixtures and independent oracles shared by the test binaries.

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "sheaf/error.hpp"
#include "sheaf/sheaf.hpp"

namespace sheaf::testing {

/// Random family of nonempty subsets of an n-entity universe.
std::vector<EntityMask> random_subbase(std::mt19937_64& rng, std::size_t n, std::size_t max_sets);

/// Fixpoint closure under pairwise union and intersection, plus ∅ and X.
std::set<EntityMask> closure_oracle(std::size_t n, const std::vector<EntityMask>& subbase);

/// Random linear presheaf with a stalk on every nonempty open. Each stalk is
/// a random row space of a common ambient space, nested so that every
/// restriction exists; this makes composition exact by construction.
/// `max_opens` bounds the topology size (including ∅); generation retries
/// until it fits.
Sheaf random_linear_sheaf(std::mt19937_64& rng, std::size_t max_entities, std::size_t max_opens,
                          std::size_t max_ambient = 4);

/// Kernel dimension of the constraints s_V = S(V ⊆ U) s_U over all
/// comparable pairs, by Eigen's FullPivLU.
std::size_t brute_force_global_sections(const Sheaf& sheaf);

/// Orthonormal nullspace basis by Eigen's JacobiSVD.
Eigen::MatrixXd svd_nullspace(const Eigen::MatrixXd& m, double tol = 1e-10);

/// Great-circle distance via the dot product of unit vectors.
double chord_angle_km(double lon1, double lat1, double lon2, double lat2, double radius = 6371.0);

/// Code of the sheaf::Error thrown by `f`, or nullopt when it returns normally.
template <class F>
std::optional<ErrorCode> error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace sheaf::testing
