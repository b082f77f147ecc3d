#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sheaf/consistency.hpp"

namespace sheaf {

struct NelderMeadOptions {
  std::size_t max_iterations = 2000;  // per restart, polishing included
  double f_tolerance = 1e-8;          // spread of simplex values
  double x_tolerance = 1e-8;          // spread of simplex vertices (max-norm)
  std::size_t restarts = 5;           // total runs; run 0 starts exactly at x0
  std::uint64_t seed = 0;
  double restart_noise = 0.1;         // Gaussian sd as a fraction of max(|x0_i|, 1)
};

struct NelderMeadResult {
  Vec x;
  double f = 0.0;
  std::size_t iterations = 0;   // summed over restarts
  std::size_t evaluations = 0;
  bool converged = true;        // false: the winning run hit max_iterations
  std::size_t best_restart = 0;
};

/// Derivative-free minimization. Coordinates flagged circular are wrapped to
/// [0, 360) before every evaluation and in the returned point.
NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& objective, const Vec& x0,
                             const std::vector<bool>& circular, const NelderMeadOptions& opts = {});

enum class FusionObjective {
  Minimax,      // sup-distance, the fusion problem proper
  LeastSquares  // weighted sum of squares; exact projection on linear sheaves
};

struct FusionOptions {
  enum class Init { FromAssignmentAtTop, Explicit, Perturbed };
  NelderMeadOptions solver;
  Init init = Init::FromAssignmentAtTop;
  Vec explicit_start;          // Init::Explicit
  double perturb_scale = 0.1;  // Init::Perturbed: relative Gaussian noise on the default start
  FusionObjective objective = FusionObjective::Minimax;
};

struct FusionResult {
  Vec section_at_top;
  Assignment fused;
  double residual = 0.0;  // D(fused, input)
  double input_radius = 0.0;
  std::optional<double> lipschitz;
  std::optional<double> lower_bound;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = true;
  bool exact_projection = false;
};

/// D(pullback_global(s), a) for a point s of the top stalk.
double fusion_objective(const Assignment& a, const Vec& section_at_top);

/// Nearest global section to `a`, searched over the stalk at X.
/// Throws DegenerateAssignment for an empty assignment and NoTopStalk when the
/// stalk at X is a glued tuple of a nonlinear sheaf.
FusionResult fuse(const Assignment& a, const FusionOptions& opts = {});

double fusion_lower_bound(double radius, double lipschitz);

}  // namespace sheaf
