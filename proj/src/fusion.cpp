#include "sheaf/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/QR>

#include "sheaf/error.hpp"
#include "sheaf/parallel.hpp"

namespace sheaf {

namespace {

struct Run {
  Vec x;
  double f = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

class Simplex {
 public:
  Simplex(const std::function<double(const Vec&)>& objective, const std::vector<bool>& circular)
      : objective_(objective), circular_(circular) {}

  double eval(const Vec& x) {
    ++evaluations;
    Vec w = wrapped(x);
    double f = objective_(w);
    return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
  }

  Vec wrapped(Vec x) const {
    for (std::size_t i = 0; i < circular_.size(); ++i)
      if (circular_[i]) x[static_cast<Eigen::Index>(i)] = wrap_degrees(x[static_cast<Eigen::Index>(i)]);
    return x;
  }

  // One Nelder-Mead descent from `start` with a fresh axis-aligned simplex.
  Run descend(const Vec& start, std::size_t budget, const NelderMeadOptions& o) {
    const Eigen::Index n = start.size();
    std::vector<Vec> v(static_cast<std::size_t>(n + 1), start);
    std::vector<double> f(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = start[i] != 0.0 ? 0.05 * std::fabs(start[i]) : 0.025;
      v[static_cast<std::size_t>(i + 1)][i] += s;
    }
    for (std::size_t i = 0; i < v.size(); ++i) f[i] = eval(v[i]);

    Run r;
    std::vector<std::size_t> order(v.size());
    while (true) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
      std::vector<Vec> sv;
      std::vector<double> sf;
      for (auto i : order) {
        sv.push_back(v[i]);
        sf.push_back(f[i]);
      }
      v.swap(sv);
      f.swap(sf);

      double fspread = f.back() - f.front();
      double xspread = 0;
      for (std::size_t i = 1; i < v.size(); ++i) xspread = std::max(xspread, (v[i] - v[0]).lpNorm<Eigen::Infinity>());
      if ((fspread <= o.f_tolerance && xspread <= o.x_tolerance) || n == 0) {
        r.converged = true;
        break;
      }
      if (r.iterations >= budget) break;
      ++r.iterations;

      const std::size_t w = v.size() - 1;
      Vec bar = Vec::Zero(n);
      for (std::size_t i = 0; i < w; ++i) bar += v[i];
      bar /= static_cast<double>(n);

      Vec xr = bar + (bar - v[w]);
      double fr = eval(xr);
      if (fr < f[0]) {
        Vec xe = bar + 2.0 * (bar - v[w]);
        double fe = eval(xe);
        if (fe < fr) {
          v[w] = xe;
          f[w] = fe;
        } else {
          v[w] = xr;
          f[w] = fr;
        }
        continue;
      }
      if (fr < f[w - 1]) {
        v[w] = xr;
        f[w] = fr;
        continue;
      }
      bool shrink = false;
      if (fr < f[w]) {
        Vec xc = bar + 0.5 * (xr - bar);
        double fc = eval(xc);
        if (fc <= fr) {
          v[w] = xc;
          f[w] = fc;
        } else {
          shrink = true;
        }
      } else {
        Vec xcc = bar + 0.5 * (v[w] - bar);
        double fcc = eval(xcc);
        if (fcc < f[w]) {
          v[w] = xcc;
          f[w] = fcc;
        } else {
          shrink = true;
        }
      }
      if (shrink)
        for (std::size_t i = 1; i < v.size(); ++i) {
          v[i] = v[0] + 0.5 * (v[i] - v[0]);
          f[i] = eval(v[i]);
        }
    }
    r.x = v[0];
    r.f = f[0];
    return r;
  }

  std::size_t evaluations = 0;

 private:
  const std::function<double(const Vec&)>& objective_;
  const std::vector<bool>& circular_;
};

// Descend, then re-seed a fresh simplex at the result while that still helps;
// this undoes premature collapse, which the non-smooth sup objective invites.
Run polished(const std::function<double(const Vec&)>& objective, const std::vector<bool>& circular,
             const Vec& start, const NelderMeadOptions& o) {
  Simplex s(objective, circular);
  Run best = s.descend(start, o.max_iterations, o);
  std::size_t used = best.iterations;
  for (int round = 0; round < 50 && used < o.max_iterations; ++round) {
    Run next = s.descend(best.x, o.max_iterations - used, o);
    used += next.iterations;
    bool improved = next.f < best.f - o.f_tolerance;
    if (next.f <= best.f) {
      next.iterations = used;
      best = next;
    }
    best.converged = next.converged;
    if (!improved) break;
  }
  best.iterations = used;
  best.evaluations = s.evaluations;
  best.x = s.wrapped(best.x);
  return best;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& objective, const Vec& x0,
                             const std::vector<bool>& circular, const NelderMeadOptions& opts) {
  if (opts.restarts == 0) throw Error(ErrorCode::InvalidArgument, "need at least one run");
  if (!(opts.f_tolerance >= 0) || !(opts.x_tolerance >= 0))
    throw Error(ErrorCode::InvalidArgument, "tolerances must be nonnegative");
  if (circular.size() != static_cast<std::size_t>(x0.size()) && !circular.empty())
    throw Error(ErrorCode::SpaceMismatch, "circular mask length differs from the start point");
  std::vector<bool> mask = circular;
  mask.resize(static_cast<std::size_t>(x0.size()), false);
  if (!std::isfinite(objective(x0)))
    throw Error(ErrorCode::InvalidArgument, "objective is not finite at the start point");

  std::vector<Vec> starts(opts.restarts, x0);
  for (std::size_t r = 1; r < opts.restarts; ++r) {
    std::mt19937_64 rng(opts.seed + r);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < x0.size(); ++i)
      starts[r][i] += opts.restart_noise * std::max(std::fabs(x0[i]), 1.0) * normal(rng);
  }
  std::vector<Run> runs(opts.restarts);
  parallel_for(opts.restarts, [&](std::size_t r) { runs[r] = polished(objective, mask, starts[r], opts); });

  NelderMeadResult out;
  std::size_t best = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    out.iterations += runs[r].iterations;
    out.evaluations += runs[r].evaluations;
    if (runs[r].f < runs[best].f) best = r;
  }
  out.x = runs[best].x;
  out.f = runs[best].f;
  out.converged = runs[best].converged;
  out.best_restart = best;
  return out;
}

double fusion_objective(const Assignment& a, const Vec& s) {
  const Sheaf& sh = a.sheaf();
  const OpenId top = sh.topology().top();
  Vec x = sh.stalk(top).normalized(s);
  double worst = 0;
  for (OpenId u : a.domain()) {
    double d = sh.stalk(u).distance(a.at(u), sh.restrict(top, u, x));
    if (std::isnan(d)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, d);
  }
  return worst;
}

double fusion_lower_bound(double radius, double lipschitz) {
  if (radius < 0 || lipschitz < 0)
    throw Error(ErrorCode::InvalidArgument, "radius and Lipschitz constant must be nonnegative");
  return radius / (1.0 + lipschitz);
}

namespace {

// Weighted least-squares fit of the top stalk to every defined value.
Vec least_squares_section(const Assignment& a) {
  const Sheaf& sh = a.sheaf();
  const OpenId top = sh.topology().top();
  const auto n = static_cast<Eigen::Index>(sh.dim(top));
  Eigen::Index rows = 0;
  for (OpenId u : a.domain()) rows += static_cast<Eigen::Index>(sh.dim(u));
  Matrix m(rows, n);
  Vec b(rows);
  Eigen::Index at = 0;
  for (OpenId u : a.domain()) {
    auto k = static_cast<Eigen::Index>(sh.dim(u));
    double w = sh.stalk(u).components().empty() ? 1.0 : sh.stalk(u).components()[0].weight;
    m.middleRows(at, k) = w * sh.restriction_matrix(top, u);
    b.segment(at, k) = w * a.at(u);
    at += k;
  }
  return Eigen::CompleteOrthogonalDecomposition<Matrix>(m).solve(b);
}

}  // namespace

FusionResult fuse(const Assignment& a, const FusionOptions& opts) {
  if (a.empty()) throw Error(ErrorCode::DegenerateAssignment, "assignment has no values");
  const auto& shp = a.sheaf_ptr();
  const Sheaf& sh = *shp;
  const OpenId top = sh.topology().top();
  if (!sh.declared(top) && !sh.is_linear())
    throw Error(ErrorCode::NoTopStalk,
                "the whole space has no declared stalk, so global sections have no free parameterization");
  const bool linear_euclid = lipschitz_constant(sh).has_value();

  FusionResult res{Vec(), Assignment(shp), 0.0, 0.0, std::nullopt, std::nullopt};
  res.input_radius = consistency_radius(a).radius;
  res.lipschitz = lipschitz_constant(sh);
  if (res.lipschitz) res.lower_bound = fusion_lower_bound(res.input_radius, *res.lipschitz);

  if (opts.objective == FusionObjective::LeastSquares) {
    if (!linear_euclid)
      throw Error(ErrorCode::NonlinearSheaf, "least-squares projection needs a linear Euclidean sheaf");
    res.section_at_top = least_squares_section(a);
    res.exact_projection = true;
  } else {
    Vec x0;
    switch (opts.init) {
      case FusionOptions::Init::Explicit:
        x0 = opts.explicit_start;
        if (static_cast<std::size_t>(x0.size()) != sh.dim(top))
          throw Error(ErrorCode::SpaceMismatch, "explicit start has the wrong dimension");
        break;
      case FusionOptions::Init::FromAssignmentAtTop:
      case FusionOptions::Init::Perturbed:
        if (a.defined(top)) x0 = a.at(top);
        else if (sh.is_linear()) x0 = least_squares_section(a);
        else x0 = Vec::Zero(static_cast<Eigen::Index>(sh.dim(top)));
        if (opts.init == FusionOptions::Init::Perturbed) {
          std::mt19937_64 rng(opts.solver.seed ^ 0x9e3779b97f4a7c15ULL);
          std::normal_distribution<double> normal(0.0, 1.0);
          for (auto& v : x0) v += opts.perturb_scale * std::max(std::fabs(v), 1.0) * normal(rng);
        }
        break;
    }
    auto objective = [&](const Vec& s) { return fusion_objective(a, s); };
    if (objective(x0) == 0.0) {
      res.section_at_top = sh.stalk(top).normalized(x0);
    } else {
      NelderMeadResult nm = nelder_mead(objective, x0, sh.stalk(top).circular_mask(), opts.solver);
      res.section_at_top = nm.x;
      res.iterations = nm.iterations;
      res.evaluations = nm.evaluations;
      res.converged = nm.converged;
    }
  }
  sh.stalk(top).normalize(res.section_at_top);
  res.fused = pullback_global(shp, res.section_at_top);
  res.residual = fusion_objective(a, res.section_at_top);
  return res;
}

}  // namespace sheaf
