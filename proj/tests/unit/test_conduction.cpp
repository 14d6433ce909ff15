#include <gtest/gtest.h>

#include <cmath>

#include "fibershield/field/conduction.hpp"
#include "fibershield/log.hpp"

using namespace fibershield;

namespace {
constexpr double pi = constants::pi;

// Uniformly loaded rod grounded at x = L: tip flux i pi R^2 plus lateral injection
// i 2 pi R over the first ell. V(0) = int_0^L F(x) dx / (sigma pi R^2).
double rod_tip_voltage(double i, double sigma, double R, double L, double ell) {
  return i * (pi * R * R * L + 2 * pi * R * ell * (L - 0.5 * ell)) / (sigma * pi * R * R);
}
}  // namespace

TEST(Conduction, ZeroCurrentGivesZeroProfile) {
  for (auto sh : {Shielding::unshielded, Shielding::metal_tube, Shielding::gold_mask}) {
    TrapScenario s = make_scenario(sh);
    s.surface_current_density = 0.0;
    const auto p = solve_fiber_conduction(s, 1e-16);
    for (double v : p.potential) EXPECT_EQ(v, 0.0);
  }
}

TEST(Conduction, UnshieldedRodMatchesClosedForm) {
  TrapScenario s = make_scenario(Shielding::unshielded);
  for (double sigma : {1e-18, 1e-16, 1e-14}) {
    const auto p = solve_fiber_conduction(s, sigma);
    const double expect =
        rod_tip_voltage(s.surface_current_density, sigma, s.fiber_radius(), s.fiber_length, s.exposed_tip_length);
    EXPECT_NEAR(p.potential.front(), expect, 1e-6 * expect);
    EXPECT_NEAR(p.peak(), expect, 1e-6 * expect);
  }
}

TEST(Conduction, UnshieldedProfileMatchesClosedFormAlongTheRod) {
  const TrapScenario s = make_scenario(Shielding::unshielded);
  const double sigma = 1e-16, i = s.surface_current_density, R = s.fiber_radius();
  const double L = s.fiber_length, ell = s.exposed_tip_length;
  const auto p = solve_fiber_conduction(s, sigma);
  const double G = sigma * pi * R * R;
  for (std::size_t k = 0; k < p.position.size(); k += 7) {
    const double x = p.position[k];
    // V(x) = int_x^L F / G with F(x) = i pi R^2 + i 2 pi R min(x, ell).
    const auto Fint = [&](double a) {
      const double lat = a < ell ? 0.5 * a * a : ell * a - 0.5 * ell * ell;
      return i * pi * R * R * a + i * 2 * pi * R * lat;
    };
    const double expect = (Fint(L) - Fint(x)) / G;
    EXPECT_NEAR(p.potential[k], expect, 1e-6 * p.peak());
  }
}

TEST(Conduction, ShieldedFaceMatchesRadialClosedForm) {
  for (auto sh : {Shielding::metal_tube, Shielding::gold_mask}) {
    const TrapScenario s = make_scenario(sh);
    const double sigma = 1e-16, i = s.surface_current_density;
    const double a = sh == Shielding::gold_mask ? s.mask->exposed_radius : s.fiber_radius();
    const double t = radial_thickness_ratio * a;
    const auto p = solve_fiber_conduction(s, sigma);
    for (std::size_t k = 0; k < p.position.size(); k += 13) {
      const double rho = p.position[k];
      const double expect = i * (a * a - rho * rho) / (4 * sigma * t);
      // Linear elements on a rho-weighted ladder are not nodally exact; O(h^2) with 400 nodes.
      EXPECT_NEAR(p.potential[k], expect, 3e-5 * p.peak()) << to_string(sh) << " rho=" << rho;
    }
  }
}

TEST(Conduction, ProfilesDecreaseTowardGround) {
  for (auto sh : {Shielding::unshielded, Shielding::metal_tube, Shielding::gold_mask}) {
    const auto p = solve_fiber_conduction(make_scenario(sh), 1e-16);
    for (std::size_t k = 1; k < p.position.size(); ++k) EXPECT_LE(p.potential[k], p.potential[k - 1] * (1 + 1e-12));
    EXPECT_EQ(p.potential.back(), 0.0);
  }
}

TEST(Conduction, ProfileIsLinearInCurrent) {
  TrapScenario s = make_scenario(Shielding::gold_mask);
  const auto a = solve_fiber_conduction(s, 1e-15);
  s.surface_current_density *= 100.0;
  const auto b = solve_fiber_conduction(s, 1e-15);
  for (std::size_t k = 0; k < a.potential.size(); ++k)
    EXPECT_NEAR(b.potential[k], 100.0 * a.potential[k], 1e-9 * b.peak());
}

TEST(Conduction, MaskPeakFarBelowUnshielded) {
  // Ratio of the two closed forms: i a / (2 sigma) against the loaded rod.
  const TrapScenario u = make_scenario(Shielding::unshielded), m = make_scenario(Shielding::gold_mask);
  const double sigma = 1e-16;
  const double ratio = solve_fiber_conduction(m, sigma).peak() / solve_fiber_conduction(u, sigma).peak();
  const double a = m.mask->exposed_radius, i = m.surface_current_density;
  const double expect = (i * a / (2 * sigma)) / rod_tip_voltage(i, sigma, u.fiber_radius(), u.fiber_length, u.exposed_tip_length);
  EXPECT_NEAR(ratio, expect, 1e-4 * expect);
  EXPECT_LT(ratio, 1e-2);
}

TEST(Conduction, OutOfRangeConductivityWarnsButSolves) {
  std::vector<std::string> seen;
  ScopedWarningSink sink([&](const std::string& m) { seen.push_back(m); });
  const auto p = solve_fiber_conduction(make_scenario(Shielding::gold_mask), 1e-12);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_NE(seen[0].find("invalid-conductivity"), std::string::npos);
  EXPECT_GT(p.peak(), 0.0);
  EXPECT_THROW(solve_fiber_conduction(make_scenario(Shielding::gold_mask), -1.0), ConfigError);
}

TEST(Conduction, InterpolationIsZeroPastGround) {
  const TrapScenario s = make_scenario(Shielding::gold_mask);
  const auto p = solve_fiber_conduction(s, 1e-16);
  EXPECT_EQ(p.at(2 * s.mask->exposed_radius), 0.0);
  EXPECT_DOUBLE_EQ(p.at(0.0), p.potential.front());
  EXPECT_DOUBLE_EQ(p.at_point(Vec3(0, 0, s.cavity_half_length), s.cavity_half_length), p.potential.front());
}
