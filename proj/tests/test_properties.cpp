#include "doctest.h"
#include "properties.hpp"

using namespace sheaf::testing;

namespace {

void expect(const PropertyOutcome& o) {
  INFO(o.name, ": ", o.first_failure);
  CHECK(o.cases >= 100);
  CHECK(o.failures == 0);
}

constexpr std::uint64_t kSeed = 20260301;

}  // namespace

TEST_CASE("property: pseudometric axioms") { expect(prop_pseudometric_axioms(kSeed)); }
TEST_CASE("property: diamond path independence") { expect(prop_diamond_functoriality(kSeed)); }
TEST_CASE("property: pullback of a global section is consistent") { expect(prop_pullback_radius_zero(kSeed)); }
TEST_CASE("property: coboundary squares to zero") { expect(prop_coboundary_squares_to_zero(kSeed)); }
TEST_CASE("property: betti_0 counts global sections") { expect(prop_betti0_global_sections(kSeed)); }
TEST_CASE("property: fusion respects the Lipschitz lower bound") { expect(prop_lipschitz_lower_bound(kSeed)); }
TEST_CASE("property: stochastic lifts are Markov") { expect(prop_stochastic_lift(kSeed)); }
TEST_CASE("property: topology generation is the closure") { expect(prop_topology_closure(kSeed)); }
