// Acceptance report: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "properties.hpp"
#include "sheaf/cohomology.hpp"
#include "sheaf/scenarios.hpp"

using namespace sheaf;

namespace {

// Pinned tolerances.
constexpr double kCrashDegTol = 0.02;
constexpr double kErrorKmTol = 1.0;
constexpr double kRadiusRelTol = 0.20;
constexpr double kPositionEdgeRelTol = 0.05;
constexpr double kDominanceFactor = 3.0;  // "Case 3 ≫ Case 1"
constexpr double kFusedBoundKm[3] = {4.0, 12.0, 110.0};
constexpr double kImprovement[3] = {4.0, 1.4, 1.7};
constexpr double kFastSeconds = 1.0;
constexpr double kFusionSeconds = 30.0;
constexpr std::uint64_t kPropertySeed = 20260301;

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;
  void require(bool ok, std::string what) {
    pass = pass && ok;
    notes.push_back(fmt::format("{} [{}]", what, ok ? "ok" : "FAIL"));
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_quiet(const std::string& args, std::string* out = nullptr) {
  const std::string cmd = fmt::format("'{}' {} 2>&1", SHEAFCTL_PATH, args);
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return -1;
  char buf[4096];
  std::size_t n;
  std::string text;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) text.append(buf, n);
  const int status = pclose(p);
  if (out) *out = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string edge_name(const Topology& t, const EdgeError& e) {
  return t.key(e.smaller) + "<" + t.key(e.larger);
}

Verdict criterion_dead_reckoning() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const SarParameters p;
  for (int id = 1; id <= 3; ++id) {
    const SarExpected want = sar_expected(id);
    Vec crash = dead_reckon(sar_field_state(sar_case(id)), p.earth_radius_km);
    const double dlon = std::fabs(-crash[0] - want.crash_x_w), dlat = std::fabs(crash[1] - want.crash_y_n);
    const double err = crash_error_km(p, crash);
    v.require(dlon <= kCrashDegTol && dlat <= kCrashDegTol,
              fmt::format("case {} crash {:.4f}W {:.4f}N vs {:.4f}W {:.4f}N", id, -crash[0], crash[1],
                          want.crash_x_w, want.crash_y_n));
    v.require(std::fabs(err - want.error_km) <= kErrorKmTol,
              fmt::format("case {} error {:.2f} km vs {:.1f}", id, err, want.error_km));
  }
  const double s = seconds_since(t0);
  v.require(s < kFastSeconds, fmt::format("runtime {:.3f} s", s));
  return v;
}

Verdict criterion_radius() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  auto sh = std::make_shared<const Sheaf>(build_sar_sheaf());
  const Topology& t = sh->topology();
  double r[3];
  std::vector<RadiusReport> reports;
  for (int id = 1; id <= 3; ++id) {
    reports.push_back(consistency_radius(sar_case_assignment(sh, sar_case(id))));
    r[id - 1] = reports.back().radius;
    const double want = sar_expected(id).radius_km;
    v.require(std::fabs(r[id - 1] - want) <= kRadiusRelTol * want,
              fmt::format("case {} radius {:.2f} km vs {:.1f}", id, r[id - 1], want));
  }
  v.require(r[2] >= kDominanceFactor * r[0] && r[0] > r[1],
            fmt::format("ordering {:.2f} >> {:.2f} > {:.2f}", r[2], r[0], r[1]));

  auto top_edges = [&](int id, std::size_t k) {
    std::set<std::string> s;
    const auto& e = reports[static_cast<std::size_t>(id - 1)].edges;
    for (std::size_t i = 0; i < std::min(k, e.size()); ++i) s.insert(edge_name(t, e[i]));
    return s;
  };
  const std::string u1u2 = std::string(SarKeys::U1) + "<" + SarKeys::U2;
  const std::string u5x = std::string(SarKeys::U5) + "<" + SarKeys::X;
  const std::string u4x = std::string(SarKeys::U4) + "<" + SarKeys::X;
  auto c1 = top_edges(1, 2), c2 = top_edges(2, 1);
  v.require(c1.count(u1u2) && c1.count(u5x),
            fmt::format("case 1 top edges {{{}}}", fmt::join(c1, ", ")));
  v.require(c2.count(u4x), fmt::format("case 2 top edge {{{}}}", fmt::join(c2, ", ")));

  // Position edges: comparisons whose smaller set carries a position (U1, U2, U5).
  const std::set<OpenId> position{t.find_key(SarKeys::U1), t.find_key(SarKeys::U2), t.find_key(SarKeys::U5)};
  for (int id = 1; id <= 3; ++id) {
    double best = 0;
    for (const auto& e : reports[static_cast<std::size_t>(id - 1)].edges)
      if (position.count(e.smaller)) best = std::max(best, e.error);
    const double want = sar_expected(id).radius_km;
    v.require(std::fabs(best - want) <= kPositionEdgeRelTol * want,
              fmt::format("case {} largest position edge {:.2f} km vs {:.1f}", id, best, want));
  }
  const double s = seconds_since(t0);
  v.require(s < kFastSeconds, fmt::format("runtime {:.3f} s", s));
  return v;
}

Verdict criterion_fusion() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  for (int id = 1; id <= 3; ++id) {
    SarRun run = run_sar_case(id);
    const double fused = run.fused_error_km, dr = run.crash_error_km;
    const auto i = static_cast<std::size_t>(id - 1);
    v.require(fused <= kFusedBoundKm[i],
              fmt::format("case {} fused error {:.2f} km (bound {})", id, fused, kFusedBoundKm[i]));
    v.require(fused < dr && dr >= kImprovement[i] * fused,
              fmt::format("case {} improvement {:.2f}x over {:.2f} km (need {}x)", id, dr / fused, dr,
                          kImprovement[i]));
    SarRun again = run_sar_case(id);
    v.require(again.fusion->section_at_top == run.fusion->section_at_top,
              fmt::format("case {} deterministic", id));
  }
  const double s = seconds_since(t0);
  v.require(s < kFusionSeconds, fmt::format("runtime {:.2f} s", s));
  return v;
}

Verdict criterion_cohomology() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  auto ob = build_obstacle_sheaves();
  const auto cams = obstacle_camera_cover(ob.presence.topology());
  const auto refined = obstacle_refined_cover(ob.presence.topology());
  auto pc = betti(ob.presence, cams, 2).betti();
  v.require(pc == std::vector<std::size_t>{3, 1}, fmt::format("P on cameras [{}]", fmt::join(pc, ", ")));
  for (const auto* sh : {&ob.mosaic, &ob.presence}) {
    auto b = betti(*sh, refined, 2).betti();
    const bool higher_zero = std::all_of(b.begin() + 1, b.end(), [](std::size_t x) { return x == 0; });
    v.require(higher_zero, fmt::format("{} on refined cover [{}]", sh == &ob.mosaic ? "M" : "P", fmt::join(b, ", ")));
  }
  auto [circle, arcs] = build_circle_constant_sheaf();
  auto cb = betti(circle, arcs, 2).betti();
  v.require(cb == std::vector<std::size_t>{1, 1}, fmt::format("circle [{}]", fmt::join(cb, ", ")));
  const double s = seconds_since(t0);
  v.require(s < kFastSeconds, fmt::format("runtime {:.3f} s", s));
  return v;
}

Verdict criterion_properties() {
  Verdict v;
  for (const auto& o : sheaf::testing::run_all_properties(kPropertySeed))
    v.require(o.pass(), fmt::format("{}: {} cases, {} failures{}", o.name, o.cases, o.failures,
                                    o.first_failure.empty() ? "" : " (" + o.first_failure + ")"));
  return v;
}

Verdict criterion_leray() {
  Verdict v;
  Sheaf m = build_obstacle_sheaves().mosaic;
  auto r = leray_check(m, obstacle_camera_cover(m.topology()), 2);
  v.require(r.verdict, "every cover intersection acyclic");
  v.require(r.tables_equal, fmt::format("cover [{}] vs topology [{}]", fmt::join(r.cover_betti.betti(), ", "),
                                        fmt::join(r.topology_betti.betti(), ", ")));
  return v;
}

Verdict criterion_cli() {
  Verdict v;
  for (int id = 1; id <= 3; ++id) {
    const int code = run_quiet(fmt::format("scenario sar --case {}", id));
    v.require(code == 0, fmt::format("scenario sar --case {} exit {}", id, code));
  }
  namespace fs = std::filesystem;
  const fs::path d = fs::temp_directory_path() / fmt::format("sheaf-acceptance-{}", ::getpid());
  fs::remove_all(d);
  fs::create_directories(d);
  std::string out;
  run_quiet(fmt::format("export counterexample --out '{}'", d.string()));
  const int code = run_quiet(fmt::format("check '{}'", (d / "gluing_counterexample.json").string()), &out);
  v.require(code == 1 && out.find("witness") != std::string::npos,
            fmt::format("counterexample check exit {} with{} witness", code,
                        out.find("witness") != std::string::npos ? "" : "out"));
  fs::remove_all(d);
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, criterion_dead_reckoning}, {2, criterion_radius}, {3, criterion_fusion}, {4, criterion_cohomology},
      {5, criterion_properties},     {6, criterion_leray},  {7, criterion_cli}};
  int failed = 0;
  for (const auto& [n, run] : criteria) {
    Verdict v = run();
    fmt::print("CRITERION {}: {}\n", n, v.pass ? "PASS" : "FAIL");
    for (const auto& note : v.notes) fmt::print("    {}\n", note);
    failed += v.pass ? 0 : 1;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
