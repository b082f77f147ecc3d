#include <algorithm>
#include <bit>

#include "doctest.h"
#include "sheaf/scenarios.hpp"
#include "sheaf/topology.hpp"
#include "support.hpp"

using namespace sheaf;
using sheaf::testing::error_code_of;

namespace {

Topology diamond() { return generate_topology(EntityUniverse({"a", "b", "c"}), {{"a", "b"}, {"b", "c"}}); }

}  // namespace

TEST_CASE("diamond topology: opens, order and Hasse diagram") {
  Topology t = diamond();
  REQUIRE(t.size() == 5);
  CHECK(t.members(t.empty_set()) == 0);
  CHECK(t.key(t.top()) == "a+b+c");
  for (OpenId u = 1; u < t.size(); ++u)
    CHECK(std::popcount(t.members(u - 1)) <= std::popcount(t.members(u)));

  const OpenId ab = t.find_key("a+b"), bc = t.find_key("b+c"), b = t.find_key("b");
  auto kids = std::vector<OpenId>(t.children(t.top()).begin(), t.children(t.top()).end());
  std::sort(kids.begin(), kids.end());
  CHECK(kids == std::vector<OpenId>{std::min(ab, bc), std::max(ab, bc)});
  CHECK(std::vector<OpenId>(t.children(ab).begin(), t.children(ab).end()) == std::vector<OpenId>{b});
  CHECK(t.parents(b).size() == 2);
  CHECK(t.subset(b, ab));
  CHECK_FALSE(t.subset(ab, bc));
  CHECK(comparable_pairs(t).size() == 5);
}

TEST_CASE("keys are order-insensitive and unknown entities are rejected") {
  Topology t = diamond();
  CHECK(t.find_key("c+b") == t.find_key("b+c"));
  CHECK(error_code_of([&] { t.find_key("b+zz"); }) == ErrorCode::UnknownEntity);
  CHECK(error_code_of([&] { t.find_key("a"); }).has_value());  // {a} is not open
  CHECK(error_code_of([] { EntityUniverse({"a", "a"}); }).has_value());
}

TEST_CASE("minimal neighbourhoods") {
  Topology t = diamond();
  CHECK(t.minimal_neighborhood(0) == t.find_key("a+b"));
  CHECK(t.minimal_neighborhood(1) == t.find_key("b"));
  CHECK(t.minimal_neighborhood(2) == t.find_key("b+c"));
  CHECK(t.minimal_neighborhoods().size() == 3);
}

TEST_CASE("scenario topologies have the expected open sets") {
  const Topology sar = build_sar_sheaf().topology();
  CHECK(sar.universe().size() == 9);
  CHECK(sar.size() == 30);
  for (const char* k : {SarKeys::U1, SarKeys::U2, SarKeys::U3, SarKeys::U4, SarKeys::U5, SarKeys::X})
    CHECK(sar.find(sar.universe().parse_key(k)).has_value());
  CHECK(sar.key(sar.top()) == SarKeys::X);

  const Topology ob = build_obstacle_sheaves().mosaic.topology();
  CHECK(ob.size() == 7);  // ∅, V1, V2, V1V2, U_L, U_R, X
}

TEST_CASE("topology generation refuses to exceed the cap") {
  std::vector<std::string> names;
  std::vector<EntityMask> singletons;
  for (std::size_t i = 0; i < 13; ++i) {
    names.push_back("e" + std::to_string(i));
    singletons.push_back(EntityMask{1} << i);
  }
  CHECK(error_code_of([&] { generate_topology(EntityUniverse(names), singletons); }) ==
        ErrorCode::TopologyTooLarge);
  TopologyOptions small;
  small.max_open_sets = 3;
  CHECK(error_code_of([] { diamond(); }) == std::nullopt);
  CHECK(error_code_of([&] {
          generate_topology(EntityUniverse({"a", "b", "c"}), std::vector<EntityMask>{0b011, 0b110}, small);
        }) == ErrorCode::TopologyTooLarge);
}

TEST_CASE("verify_topology names the missing sets") {
  const std::vector<EntityMask> ok{0, 0b010, 0b011, 0b110, 0b111};
  CHECK(verify_topology(3, ok).ok());

  const std::vector<EntityMask> no_union{0, 0b001, 0b010, 0b111};
  auto r = verify_topology(3, no_union);
  REQUIRE_FALSE(r.ok());
  CHECK(std::any_of(r.violations.begin(), r.violations.end(), [](const TopologyViolation& v) {
    return v.kind == TopologyViolation::Kind::UnionNotClosed && v.witness == 0b011;
  }));

  const std::vector<EntityMask> no_meet{0, 0b011, 0b110, 0b111};
  r = verify_topology(3, no_meet);
  CHECK(std::any_of(r.violations.begin(), r.violations.end(), [](const TopologyViolation& v) {
    return v.kind == TopologyViolation::Kind::IntersectionNotClosed && v.witness == 0b010;
  }));

  const std::vector<EntityMask> no_ends{0b001};
  r = verify_topology(3, no_ends);
  auto has = [&](TopologyViolation::Kind k) {
    return std::any_of(r.violations.begin(), r.violations.end(),
                       [&](const TopologyViolation& v) { return v.kind == k; });
  };
  CHECK(has(TopologyViolation::Kind::MissingEmpty));
  CHECK(has(TopologyViolation::Kind::MissingWhole));
}

TEST_CASE("subspace topology maps back to the parent") {
  Topology t = diamond();
  auto [sub, back] = t.subspace(t.find_key("a+b"));
  CHECK(sub.size() == 3);  // ∅, b, ab
  CHECK(back.size() == sub.size());
  CHECK(back.back() == t.find_key("a+b"));
}
