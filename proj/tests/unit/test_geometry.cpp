#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "fibershield/geometry/scenario_io.hpp"
#include "fibershield/geometry/scenario_mesh.hpp"
#include "fibershield/pipeline/presets.hpp"

using namespace fibershield;

namespace {

constexpr double pi = constants::pi;

// Area of panels on the +z fiber that satisfy pred.
template <class Pred>
double fiber_area(const SurfaceMesh& m, BodyKind kind, Pred pred) {
  double a = 0.0;
  for (const auto& p : m.panels())
    if (m.body_of(p).kind == kind && p.centroid.z() > 0.0 && pred(p)) a += p.area;
  return a;
}

std::string scenario_dir() { return std::string(FIBERSHIELD_SOURCE_DIR) + "/scenarios/"; }

void expect_same_scenario(const TrapScenario& a, const TrapScenario& b) {
  // Unit suffixes in the files go through one multiplication, so allow an ulp or two.
  const auto near = [](double x, double y) { return std::abs(x - y) <= 1e-14 * std::max(std::abs(x), std::abs(y)); };
  EXPECT_EQ(a.shielding, b.shielding);
  EXPECT_TRUE(near(a.fiber_diameter, b.fiber_diameter));
  EXPECT_TRUE(near(a.fiber_length, b.fiber_length));
  EXPECT_EQ(a.fiber_count, b.fiber_count);
  EXPECT_TRUE(near(a.exposed_tip_length, b.exposed_tip_length));
  EXPECT_EQ(a.tube.has_value(), b.tube.has_value());
  EXPECT_EQ(a.mask.has_value(), b.mask.has_value());
  if (a.mask && b.mask) {
    EXPECT_TRUE(near(a.mask->exposed_radius, b.mask->exposed_radius));
    EXPECT_TRUE(near(a.mask->thickness, b.mask->thickness));
  }
  EXPECT_TRUE(near(a.cavity_half_length, b.cavity_half_length));
  EXPECT_TRUE(near(a.blades.edge_distance, b.blades.edge_distance));
  EXPECT_TRUE(near(a.rf_angular_frequency, b.rf_angular_frequency));
  EXPECT_TRUE(near(a.axial_secular_frequency, b.axial_secular_frequency));
  EXPECT_EQ(a.shield_voltage_matched, b.shield_voltage_matched);
  EXPECT_TRUE(near(a.surface_current_density, b.surface_current_density));
  EXPECT_TRUE(near(a.fiber_conductivity, b.fiber_conductivity));
  EXPECT_TRUE(near(a.loss_tangent, b.loss_tangent));
}

}  // namespace

TEST(Scenario, SerializeParseRoundTripIsExact) {
  std::vector<TrapScenario> all = {make_scenario(Shielding::unshielded), make_scenario(Shielding::metal_tube),
                                   make_scenario(Shielding::gold_mask)};
  for (const auto& c : figure2_cases()) all.push_back(c.scenario);
  TrapScenario odd = make_scenario(Shielding::gold_mask);
  odd.cavity_half_length = 0.1 + 0.2;  // not representable in short decimal
  odd.shield_voltage = 1.0 / 3.0;
  all.push_back(odd);
  for (const auto& s : all) {
    const std::string text = serialize_scenario(s);
    const TrapScenario back = parse_scenario(text);
    EXPECT_EQ(serialize_scenario(back), text);
    EXPECT_EQ(back.cavity_half_length, s.cavity_half_length);
    EXPECT_EQ(back.shield_voltage, s.shield_voltage);
    EXPECT_EQ(scenario_hash(back), scenario_hash(s));
  }
}

TEST(Scenario, UnitSuffixesNormaliseToSI) {
  const TrapScenario s = parse_scenario(
      "shielding: gold_mask\nfiber:\n  diameter: 125 um\n  length: 6cm\nmask:\n  exposed_diameter: 60um\n"
      "cavity:\n  length: 0.23 mm\ndrive:\n  rf_frequency: 20 MHz\n");
  EXPECT_NEAR(s.fiber_diameter, 125e-6, 1e-18);
  EXPECT_NEAR(s.fiber_length, 0.06, 1e-15);
  EXPECT_NEAR(s.mask->exposed_radius, 30e-6, 1e-18);
  EXPECT_NEAR(s.cavity_half_length, 115e-6, 1e-18);
  EXPECT_NEAR(s.rf_angular_frequency, 2 * pi * 20e6, 1e-6);
}

TEST(Scenario, ShippedFilesMatchPresets) {
  for (const auto& c : figure2_cases()) {
    SCOPED_TRACE(c.label);
    TrapScenario expected = c.scenario;
    expected.set_cavity_length(230e-6);
    expect_same_scenario(load_scenario(scenario_dir() + "figure2_" + c.label + ".yaml"), expected);
  }
  for (auto sh : {Shielding::unshielded, Shielding::metal_tube, Shielding::gold_mask}) {
    TrapScenario expected = make_scenario(sh);
    expected.set_cavity_length(230e-6);
    expect_same_scenario(load_scenario(scenario_dir() + "default_" + std::string(to_string(sh)) + ".yaml"), expected);
  }
}

TEST(Scenario, InvalidScenariosAreRejected) {
  const auto code_of = [](auto&& f) -> std::string {
    try {
      f();
    } catch (const ConfigError& e) {
      return e.code();
    }
    return "";
  };
  TrapScenario s = make_scenario(Shielding::gold_mask);
  s.mask->exposed_radius = 100e-6;  // wider than the fiber
  EXPECT_EQ(code_of([&] { validate(s); }), "invalid-scenario");
  s = make_scenario(Shielding::metal_tube);
  s.tube->inner_diameter = 100e-6;
  EXPECT_EQ(code_of([&] { validate(s); }), "invalid-scenario");
  s = make_scenario(Shielding::unshielded);
  s.relative_permittivity = 0.5;
  EXPECT_EQ(code_of([&] { validate(s); }), "invalid-scenario");
  EXPECT_EQ(code_of([] { load_scenario("/nonexistent/scenario.yaml"); }), "missing-file");
  EXPECT_EQ(code_of([] { parse_scenario("fiber:\n  diameter: 3 parsecs\n"); }), "parse");
  EXPECT_EQ(code_of([] { parse_scenario("shielding: gold_mask\ncavity:\n  length: 1mm\n  half_length: 1mm\n"); }),
            "invalid-scenario");
}

TEST(ScenarioMesh, MaskExposesOnlyTheOpening) {
  const TrapScenario s = make_scenario(Shielding::gold_mask);
  const SurfaceMesh m = build_scenario_mesh(s);
  const double r = s.mask->exposed_radius;
  const double a = fiber_area(m, BodyKind::dielectric, [](const Panel&) { return true; });
  EXPECT_NEAR(a, pi * r * r, 0.02 * pi * r * r);
}

TEST(ScenarioMesh, TubeCoversEverythingButTheFace) {
  const TrapScenario s = make_scenario(Shielding::metal_tube);
  const SurfaceMesh m = build_scenario_mesh(s);
  const double R = s.fiber_radius();
  // Only the end face is dielectric; nothing on the lateral side.
  const double side = fiber_area(m, BodyKind::dielectric, [](const Panel& p) { return std::abs(p.normal.z()) < 0.5; });
  EXPECT_EQ(side, 0.0);
  const double face = fiber_area(m, BodyKind::dielectric, [](const Panel&) { return true; });
  EXPECT_NEAR(face, pi * R * R, 0.02 * pi * R * R);
}

TEST(ScenarioMesh, UnshieldedTipSegmentLateralArea) {
  const TrapScenario s = make_scenario(Shielding::unshielded);
  const SurfaceMesh m = build_scenario_mesh(s);
  const double d = s.cavity_half_length, ell = s.exposed_tip_length;
  double lateral = 0.0;
  for (const auto& p : m.panels())
    if (p.current_source && p.centroid.z() > 0.0 && std::abs(p.normal.z()) < 0.5 && p.centroid.z() - d < ell)
      lateral += p.area;
  const double expect = pi * s.fiber_diameter * ell;
  EXPECT_NEAR(lateral, expect, 0.02 * expect);
}

TEST(ScenarioMesh, RolesPartitionPanelsAndElectrodesMatchScenario) {
  for (auto sh : {Shielding::unshielded, Shielding::metal_tube, Shielding::gold_mask}) {
    const SurfaceMesh m = build_scenario_mesh(make_scenario(sh));
    std::set<std::string> names;
    for (const auto& e : m.electrodes()) names.insert(e);
    std::set<std::string> expected = {"rf_a0", "rf_a1", "rf_b0", "rf_b1"};
    for (int k = 0; k < 4; ++k) {
      expected.insert("endcap_" + std::to_string(k) + "p");
      expected.insert("endcap_" + std::to_string(k) + "m");
    }
    if (sh != Shielding::unshielded) {
      expected.insert("shield_zp");
      expected.insert("shield_zm");
    }
    EXPECT_EQ(names, expected) << to_string(sh);
    for (const auto& p : m.panels()) {
      const Body& b = m.body_of(p);
      EXPECT_EQ(b.kind == BodyKind::conductor, !b.electrode.empty());
    }
  }
}

TEST(ScenarioMesh, FiberAssembliesAreClosed) {
  Resolution res;
  res.include_blades = false;
  for (auto sh : {Shielding::unshielded, Shielding::metal_tube, Shielding::gold_mask}) {
    const SurfaceMesh m = build_scenario_mesh(make_scenario(sh), res);
    for (const auto& [asmb, defect] : m.closure_defects()) EXPECT_LT(defect, 1e-9) << to_string(sh) << " " << asmb;
  }
}

TEST(ScenarioMesh, ConstructionIsDeterministic) {
  const TrapScenario s = make_scenario(Shielding::gold_mask);
  const SurfaceMesh a = build_scenario_mesh(s), b = build_scenario_mesh(s);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].centroid, b[i].centroid);
}

TEST(ScenarioMesh, DefaultStaysUnderPanelBudget) {
  for (auto sh : {Shielding::unshielded, Shielding::metal_tube, Shielding::gold_mask})
    EXPECT_LT(build_scenario_mesh(make_scenario(sh)).size(), 20000u);
}

TEST(ScenarioMesh, CoarseResolutionReportsDegenerateBody) {
  Resolution res;
  res.min_panels_per_body = 100000;
  try {
    build_scenario_mesh(make_scenario(Shielding::gold_mask), res);
    FAIL() << "expected degenerate-resolution";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.code(), "degenerate-resolution");
  }
}

TEST(RefineMesh, FactorOneIsIdentity) {
  const SurfaceMesh m = build_scenario_mesh(make_scenario(Shielding::gold_mask), Resolution{}.scaled(3.0));
  const SurfaceMesh r = refine_mesh(m, 1);
  ASSERT_EQ(r.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (int k = 0; k < 3; ++k) EXPECT_EQ(r[i].vertices[k], m[i].vertices[k]);
}

TEST(RefineMesh, FlatPanelsKeepTheirArea) {
  SurfaceMesh m;
  const int b = m.add_body(Body{"plate"});
  mesh_rectangle(m, b, Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), uniform_nodes(0, 1, 5), uniform_nodes(0, 2, 7));
  const SurfaceMesh r = refine_mesh(m, 4);
  EXPECT_GE(r.size(), 4 * m.size());
  EXPECT_NEAR(r.total_area(), m.total_area(), 1e-12 * m.total_area());
}

TEST(RefineMesh, CylinderAreaConvergesMonotonically) {
  SurfaceMesh m;
  const int b = m.add_body(Body{"cyl"});
  AxisFrame f;
  const double R = 1.0, h = 2.0;
  mesh_cylinder(m, b, f, R, uniform_nodes(0, h, 4), 8, true);
  const double exact = 2 * pi * R * h;
  double prev = m.total_area();
  EXPECT_LT(prev, exact);
  for (int factor : {4, 9, 16}) {
    const double a = refine_mesh(m, factor).total_area();
    EXPECT_GT(a, prev);
    EXPECT_LT(a, exact);
    prev = a;
  }
  EXPECT_NEAR(prev, exact, 0.005 * exact);
}
