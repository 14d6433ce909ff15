#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fibershield/trap/trap_model.hpp"

using namespace fibershield;

namespace {

const Resolution coarse = Resolution{}.scaled(3.0);

Grid line_grid() { return Grid::line(1, 300e-6, 30e-6); }

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Shared model so the expensive solves happen once per shielding.
TrapModel& model(Shielding sh) {
  static std::map<Shielding, std::unique_ptr<TrapModel>> cache;
  auto& m = cache[sh];
  if (!m) m = std::make_unique<TrapModel>(make_scenario(sh), coarse);
  return *m;
}

}  // namespace

TEST(Pseudopotential, UniformFieldByDirectArithmetic) {
  const double E0 = 1e5, m = constants::barium138_ion_mass, W = 2 * constants::pi * 20e6;
  const double e = constants::elementary_charge;
  const double joules = e * e * E0 * E0 / (4 * m * W * W);
  EXPECT_NEAR(pseudopotential_eV(E0, m, W), joules / e, 1e-15 * joules / e);
  EXPECT_EQ(pseudopotential_eV(0.0, m, W), 0.0);
}

TEST(Pseudopotential, ScalesWithDriveAmplitudeSquared) {
  TrapScenario s = make_scenario(Shielding::gold_mask);
  const Grid g = line_grid();
  TrapModel a(s, coarse);
  s.rf_amplitude *= 2.0;
  TrapModel b(s, coarse);
  const auto pa = a.pseudo(g), pb = b.pseudo(g);
  for (std::size_t i = 0; i < pa.values.size(); ++i) EXPECT_NEAR(pb.values[i], 4.0 * pa.values[i], 1e-9 * pb.values[i]);
}

TEST(Pseudopotential, ScalesWithInverseDriveFrequencySquared) {
  const Grid g = line_grid();
  TrapModel& a = model(Shielding::gold_mask);
  const auto pa = a.pseudo(g);
  const auto pb = pseudopotential(a.rf_solution(), g, a.scenario().ion_mass, 2.0 * a.scenario().rf_angular_frequency);
  for (std::size_t i = 0; i < pa.values.size(); ++i) EXPECT_NEAR(pb.values[i], 0.25 * pa.values[i], 1e-9 * pa.values[i]);
}

TEST(Pseudopotential, NonNegativeAndNullOnTheTrapAxis) {
  TrapModel& m = model(Shielding::gold_mask);
  const auto p = m.pseudo(Grid::line(0, 200e-6, 10e-6));
  for (double v : p.values) EXPECT_GE(v, 0.0);
  // By symmetry the RF field vanishes on the y axis; off axis it grows.
  const auto on = m.pseudo(line_grid());
  EXPECT_LT(max_abs(on.values), 1e-3 * p.values.front());
}

TEST(DcBasis, SumOfUnitMapsEqualsAllAtOneVolt) {
  TrapModel& m = model(Shielding::gold_mask);
  const Grid g = line_grid();
  const auto names = m.mesh().electrodes();
  const auto all = dc_basis(m.solver(), names, g);
  std::vector<double> sum(g.size(), 0.0);
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto one = dc_basis(m.solver(), k, g);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += one.values[i];
  }
  for (std::size_t i = 0; i < sum.size(); ++i) EXPECT_NEAR(sum[i], all.values[i], 1e-9 * max_abs(all.values));
}

TEST(DcBasis, EndcapMapIsMirrorSymmetric) {
  TrapModel& m = model(Shielding::gold_mask);
  const auto e = m.endcaps(line_grid());
  const std::size_t n = e.values.size();
  const double tol = 2.0 * m.solver().options().tolerance * max_abs(e.values);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(e.values[i], e.values[n - 1 - i], tol);
}

TEST(DcBasis, UnknownElectrodeIsConfigError) {
  TrapModel& m = model(Shielding::gold_mask);
  try {
    dc_basis(m.solver(), std::vector<std::string>{"no_such_electrode"}, line_grid());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.code(), "unknown-electrode");
  }
  EXPECT_THROW(dc_basis(m.solver(), std::size_t{999}, line_grid()), ConfigError);
}

TEST(SurfaceCurrent, ZeroCurrentGivesZeroMap) {
  TrapScenario s = make_scenario(Shielding::unshielded);
  s.surface_current_density = 0.0;
  TrapModel m(s, coarse);
  for (double v : m.current(line_grid()).values) EXPECT_EQ(v, 0.0);
}

TEST(SurfaceCurrent, MapIsLinearInCurrentDensity) {
  TrapScenario s = make_scenario(Shielding::unshielded);
  const Grid g = line_grid();
  TrapModel& a = model(Shielding::unshielded);
  s.surface_current_density *= 100.0;
  const auto b = surface_current_potential(a.solver(), s, s.fiber_conductivity, g);
  const auto ma = a.current(g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(b.values[i], 100.0 * ma.values[i], 1e-9 * std::abs(b.values[i]));
}

TEST(TotalPotential, ZeroVoltagesAndCurrentReturnPseudopotentialExactly) {
  TrapModel& m = model(Shielding::gold_mask);
  const Grid g = line_grid();
  const auto p = m.pseudo(g);
  const auto e = m.endcaps(g);
  PotentialMap zero_current = e;
  zero_current.kind = MapKind::current_potential_V;
  std::fill(zero_current.values.begin(), zero_current.values.end(), 0.0);
  const auto t = total_potential(p, {{&e, 0.0}}, &zero_current);
  EXPECT_EQ(t.values, p.values);
}

TEST(TotalPotential, AddingThenSubtractingAMapRestoresTheOriginal) {
  TrapModel& m = model(Shielding::gold_mask);
  const Grid g = line_grid();
  const auto p = m.pseudo(g), e = m.endcaps(g);
  const auto t = total_potential(p, {{&e, 37.0}, {&e, -37.0}}, nullptr);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(t.values[i], p.values[i], 1e-12 * (std::abs(p.values[i]) + 37.0));
}

TEST(TotalPotential, PartsAssembleLinearly) {
  TrapModel& m = model(Shielding::gold_mask);
  const auto parts = m.parts(line_grid());
  const auto& s = m.scenario();
  for (std::size_t i = 0; i < parts.total.values.size(); ++i) {
    double expect = parts.pseudo.values[i] + s.endcap_voltage * parts.endcaps.values[i] + parts.current.values[i];
    if (parts.shields) expect += s.shield_voltage * parts.shields->values[i];
    EXPECT_NEAR(parts.total.values[i], expect, 1e-12 * std::abs(expect));
  }
  EXPECT_EQ(parts.total.scenario_hash, m.hash());
}

TEST(TotalPotential, GridMismatchIsAnalysisError) {
  TrapModel& m = model(Shielding::gold_mask);
  const auto p = m.pseudo(line_grid());
  const auto e = m.endcaps(Grid::line(1, 300e-6, 60e-6));
  try {
    total_potential(p, {{&e, 1.0}}, nullptr);
    FAIL();
  } catch (const AnalysisError& err) {
    EXPECT_EQ(err.code(), "grid-mismatch");
  }
}

TEST(ShieldBias, MatchedBiasEqualsBareTrapPotentialAtTheFrontFace) {
  TrapScenario s = make_scenario(Shielding::metal_tube);
  s.shield_voltage_matched = true;
  const double v = matched_shield_voltage(s, coarse);
  // Endcap-only trap: the potential between the blades is a fraction of the endcap voltage.
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, s.endcap_voltage);
  const TrapScenario r = resolve_shield_bias(s, coarse);
  EXPECT_EQ(r.shield_voltage, v);
  // Doubling the endcap voltage doubles the bias.
  s.endcap_voltage *= 2.0;
  EXPECT_NEAR(matched_shield_voltage(s, coarse), 2.0 * v, 1e-9 * v);
  // Unshielded scenarios are left alone.
  TrapScenario u = make_scenario(Shielding::unshielded);
  u.shield_voltage_matched = true;
  EXPECT_EQ(resolve_shield_bias(u, coarse).shield_voltage, 0.0);
}

TEST(PotentialMapCache, BinaryRoundTripIsExact) {
  TrapModel& m = model(Shielding::gold_mask);
  const auto p = m.pseudo(line_grid());
  const auto path = (std::filesystem::temp_directory_path() / "fibershield_map_test.fsmap").string();
  save_map_binary(p, path);
  const auto q = load_map_binary(path);
  EXPECT_EQ(q.values, p.values);
  EXPECT_TRUE(q.grid == p.grid);
  EXPECT_EQ(q.kind, p.kind);
  EXPECT_EQ(q.scenario_hash, p.scenario_hash);
  EXPECT_EQ(q.solver_tolerance, p.solver_tolerance);
  std::filesystem::remove(path);
  EXPECT_THROW(load_map_binary(path), ConfigError);
}
