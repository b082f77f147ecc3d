#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "sheaf/sheaf.hpp"

namespace sheaf {

/// Partial map from open sets to points of their stalks.
class Assignment {
 public:
  explicit Assignment(std::shared_ptr<const Sheaf> sheaf);

  const Sheaf& sheaf() const noexcept { return *sheaf_; }
  const std::shared_ptr<const Sheaf>& sheaf_ptr() const noexcept { return sheaf_; }

  /// Validates the point against the stalk (and, for glued opens, that its
  /// components agree within Sheaf::kAgreementTolerance); wraps angles.
  void set(OpenId id, Vec value);
  void set(std::string_view key, Vec value) { set(sheaf_->topology().find_key(key), std::move(value)); }
  void erase(OpenId id) { values_.erase(id); }

  bool defined(OpenId id) const { return values_.count(id) > 0; }
  const Vec& at(OpenId id) const;
  const Vec& at(std::string_view key) const { return at(sheaf_->topology().find_key(key)); }
  std::vector<OpenId> domain() const;
  bool empty() const noexcept { return values_.empty(); }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::shared_ptr<const Sheaf> sheaf_;
  std::map<OpenId, Vec> values_;
};

struct EdgeError {
  OpenId smaller = 0;
  OpenId larger = 0;
  double error = 0.0;
};

struct RadiusReport {
  double radius = 0.0;
  std::vector<EdgeError> edges;  // descending by error
};

/// Sup over opens where both are defined of d_U(a(U), b(U)); 0 if none.
/// Throws SheafMismatch when the assignments live on different sheaves.
double assignment_distance(const Assignment& a, const Assignment& b);

/// Max over all comparable pairs V ⊊ U with a(U), a(V) both defined of
/// d_V(a(V), S(V ⊆ U) a(U)).
RadiusReport consistency_radius(const Assignment& a);

bool is_epsilon_approximate(const Assignment& a, double eps);

/// Total assignment U ↦ S(U ⊆ X) s.
Assignment pullback_global(std::shared_ptr<const Sheaf> sheaf, const Vec& section_at_top);

/// Lipschitz constant of the composed restrictions with respect to the
/// weighted Euclidean stalk metrics: max over V ⊊ U of (w_V / w_U)·‖S(V ⊆ U)‖₂.
/// Empty when some stalk is not Euclidean or some map is not linear.
std::optional<double> lipschitz_constant(const Sheaf& sheaf);

}  // namespace sheaf
