#include <gtest/gtest.h>

#include <random>

#include "../support/oracle_scenes.hpp"
#include "fibershield/field/solver.hpp"

using namespace fibershield;
using fibershield::testing::dielectric_slab_scene;
using fibershield::testing::dielectric_sphere_scene;
using fibershield::testing::parallel_plate_scene;
using fibershield::testing::plate_scene;
using fibershield::testing::sphere_scene;

namespace {

constexpr double eps0 = constants::vacuum_permittivity;
constexpr double pi = constants::pi;

FieldSolution solve_sphere(double R, double V, int level) {
  const SurfaceMesh m = sphere_scene(R, level);
  BoundaryCondition bc;
  bc.potentials["sphere"] = V;
  return solve(m, bc);
}

}  // namespace

TEST(TriangleKernel, AnalyticMatchesFineQuadratureAwayFromPanel) {
  SurfaceMesh m;
  m.add_body(Body{"t"});
  m.add_surface(AnalyticSurface::plane(Vec3::Zero(), Vec3::UnitZ()));
  m.add_triangle(Vec3(0, 0, 0), Vec3(1, 0.1, 0), Vec3(0.3, 0.8, 0), 0, 0);
  const Panel& p = m[0];
  // Oracle: brute-force midpoint sum over a fine barycentric lattice.
  const auto brute = [&](const Vec3& r) {
    const int N = 400;
    double I = 0.0;
    Vec3 g = Vec3::Zero();
    const double dA = p.area / (N * N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; i + j < N; ++j) {
        for (int up = 0; up < 2; ++up) {
          if (up && i + j + 1 >= N) continue;
          const double u = up ? (i + 2.0 / 3.0) / N : (i + 1.0 / 3.0) / N;
          const double v = up ? (j + 2.0 / 3.0) / N : (j + 1.0 / 3.0) / N;
          const Vec3 x = p.vertices[0] + u * (p.vertices[1] - p.vertices[0]) + v * (p.vertices[2] - p.vertices[0]);
          const Vec3 d = r - x;
          const double R = d.norm();
          I += dA / R;
          g -= dA * d / (R * R * R);
        }
      }
    return std::make_pair(I, g);
  };
  for (const Vec3 r : {Vec3(0.4, 0.3, 0.5), Vec3(-0.5, 1.2, -0.3), Vec3(2.0, 2.0, 1.0)}) {
    const auto [I, g] = brute(r);
    const KernelValue kv = triangle_integral_analytic(p, r);
    EXPECT_NEAR(kv.I, I, 1e-5 * std::abs(I));
    EXPECT_LT((kv.grad - g).norm(), 1e-4 * g.norm());
  }
}

TEST(TriangleKernel, GradientIsDerivativeOfIntegral) {
  SurfaceMesh m;
  m.add_body(Body{"t"});
  m.add_surface(AnalyticSurface::plane(Vec3::Zero(), Vec3::UnitZ()));
  m.add_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 0, 0);
  const Panel& p = m[0];
  const double h = 1e-6;
  for (const Vec3 r : {Vec3(0.2, 0.2, 0.05), Vec3(0.9, 0.9, -0.2), Vec3(-0.3, 0.4, 0.01)}) {
    const Vec3 g = triangle_integral_analytic(p, r).grad;
    for (int k = 0; k < 3; ++k) {
      Vec3 dr = Vec3::Zero();
      dr[k] = h;
      const double fd = (triangle_integral_analytic(p, r + dr).I - triangle_integral_analytic(p, r - dr).I) / (2 * h);
      EXPECT_NEAR(g[k], fd, 1e-6 * std::max(1.0, g.norm()));
    }
  }
}

TEST(TriangleKernel, SelfTermAtCentroidOfEquilateral) {
  // In-plane point: three edge terms t0 * 2 asinh(l / t0), t0 = a / (2 sqrt 3), l = a / 2.
  const double a = 1.0;
  SurfaceMesh m;
  m.add_body(Body{"t"});
  m.add_surface(AnalyticSurface::plane(Vec3::Zero(), Vec3::UnitZ()));
  m.add_triangle(Vec3(0, 0, 0), Vec3(a, 0, 0), Vec3(0.5 * a, std::sqrt(3.0) / 2 * a, 0), 0, 0);
  const double t0 = a / (2.0 * std::sqrt(3.0));
  const double oracle = 3.0 * t0 * 2.0 * std::asinh(0.5 * a / t0);
  EXPECT_NEAR(triangle_integral_analytic(m[0], m[0].centroid).I, oracle, 1e-12);
}

TEST(FieldSolver, IsolatedSphereCapacitance) {
  const double R = 1.0, V = 1.0;
  const FieldSolution sol = solve_sphere(R, V, 3);
  const double Q = electrode_charge(sol, "sphere");
  const double oracle = 4.0 * pi * eps0 * R * V;
  EXPECT_NEAR(Q / oracle, 1.0, 0.01);
  const double v2 = evaluate_potential(sol, {Vec3(2.0 * R, 0.0, 0.0)})[0];
  EXPECT_NEAR(v2 / (0.5 * V), 1.0, 0.01);
}

TEST(FieldSolver, ConductorCentroidsReproduceImposedPotential) {
  const FieldSolution sol = solve_sphere(0.5, 3.0, 2);
  std::vector<Vec3> c;
  for (const auto& p : sol.mesh->panels()) c.push_back(p.centroid);
  const auto v = evaluate_potential(sol, c);
  for (double x : v) EXPECT_NEAR(x, 3.0, 3.0 * 1e-3);
  EXPECT_LT(sol.diagnostics.residual, 1e-10);
}

TEST(FieldSolver, SphereCapacitanceConvergesMonotonically) {
  double prev = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= 3; ++level) {
    const double err = std::abs(electrode_charge(solve_sphere(1.0, 1.0, level), "sphere") / (4 * pi * eps0) - 1.0);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(FieldSolver, ImageChargeDensityAtFootPoint) {
  const double h = 1.0, q = 1e-9;
  const SurfaceMesh m = plate_scene(25.0 * h, 0.08 * h, 1.2);
  BoundaryCondition bc;
  bc.potentials["plate"] = 0.0;
  bc.charges.push_back({Vec3(0, 0, h), q});
  const FieldSolution sol = solve(m, bc);
  // Oracle: image solution sigma(rho) = -q h / (2 pi (h^2 + rho^2)^{3/2}); average over the panels at the foot.
  double qsum = 0.0, asum = 0.0, oracle_q = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double rho = std::hypot(m[i].centroid.x(), m[i].centroid.y());
    if (rho < 0.1 * h) {
      qsum += panel_charge(sol, i);
      asum += m[i].area;
      oracle_q += -q * h / (2 * pi * std::pow(h * h + rho * rho, 1.5)) * m[i].area;
    }
  }
  ASSERT_GT(asum, 0.0);
  EXPECT_NEAR((qsum / asum) / (-q / (2 * pi * h * h)), 1.0, 0.05);
  EXPECT_NEAR(qsum / oracle_q, 1.0, 0.05);
}

TEST(FieldSolver, DielectricHalfSpaceImageForce) {
  const double a = 1.0, q = 1e-9, eps_r = 3.8;
  const SurfaceMesh m = dielectric_slab_scene(20.0 * a, 20.0 * a, 0.1 * a, 1.25, eps_r);
  BoundaryCondition bc;
  bc.charges.push_back({Vec3(0, 0, a), q});
  FieldSolution sol = solve(m, bc);
  sol.charges.clear();  // induced field only
  const Vec3 E = evaluate_field(sol, {Vec3(0, 0, a)})[0];
  // Oracle: image charge q' = -q (eps-1)/(eps+1) at depth a.
  const double image = -q * (eps_r - 1.0) / (eps_r + 1.0);
  const double oracle_Fz = q * image / (4 * pi * eps0 * 4 * a * a);
  EXPECT_NEAR(q * E.z() / oracle_Fz, 1.0, 0.05);
  EXPECT_LT(std::hypot(E.x(), E.y()), 1e-2 * std::abs(E.z()));
}

TEST(FieldSolver, ParallelPlateMidgapField) {
  const double s = 1.0, V = 2.0;
  const SurfaceMesh m = parallel_plate_scene(8.0 * s, s, 0.25 * s, 1.2);
  BoundaryCondition bc;
  bc.potentials["top"] = 0.5 * V;
  bc.potentials["bottom"] = -0.5 * V;
  const FieldSolution sol = solve(m, bc);
  const Vec3 E = evaluate_field(sol, {Vec3::Zero()})[0];
  EXPECT_NEAR(-E.z() / (V / s), 1.0, 0.03);
}

TEST(FieldSolver, FieldIsNegativeGradientOfPotential) {
  const SurfaceMesh m = sphere_scene(1.0, 3);
  BoundaryCondition bc;
  bc.potentials["sphere"] = 1.0;
  bc.charges.push_back({Vec3(0.0, 0.0, 3.5), 2e-11});
  const FieldSolution sol = solve(m, bc);
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts;
  while (pts.size() < 100) {
    const Vec3 p(2.5 * u(rng), 2.5 * u(rng), 2.5 * u(rng));
    if (p.norm() > 1.3 && (p - Vec3(0, 0, 3.5)).norm() > 0.5) pts.push_back(p);
  }
  const auto E = evaluate_field(sol, pts);
  const double h = 1e-4;
  double worst = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    std::vector<Vec3> probe;
    for (int c = 0; c < 3; ++c) {
      Vec3 d = Vec3::Zero();
      d[c] = h;
      probe.push_back(pts[k] + d);
      probe.push_back(pts[k] - d);
    }
    const auto v = evaluate_potential(sol, probe);
    const Vec3 fd(-(v[0] - v[1]) / (2 * h), -(v[2] - v[3]) / (2 * h), -(v[4] - v[5]) / (2 * h));
    worst = std::max(worst, (fd - E[k]).norm() / E[k].norm());
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(FieldSolver, SuperpositionIsLinear) {
  const SurfaceMesh m = parallel_plate_scene(2.0, 1.0, 0.5, 1.0);
  BoundarySolver solver(m);
  BoundaryCondition b1 = BoundaryCondition::grounded(m), b2 = b1, b12 = b1;
  b1.potentials["top"] = 1.3;
  b1.charges.push_back({Vec3(0.1, 0.2, 0.0), 1e-10});
  b2.potentials["bottom"] = -0.7;
  b2.charges.push_back({Vec3(-0.3, 0.1, 0.1), -4e-11});
  b12.potentials["top"] = 1.3;
  b12.potentials["bottom"] = -0.7;
  b12.charges = {b1.charges[0], b2.charges[0]};
  const auto s1 = solver.solve(b1), s2 = solver.solve(b2), s12 = solver.solve(b12);
  const Eigen::VectorXd sum = s1.sigma + s2.sigma;
  EXPECT_LT((s12.sigma - sum).norm(), 1e-9 * s12.sigma.norm());
  const FieldSolution sc = [&] {
    BoundaryCondition b = b1;
    b.potentials["top"] *= 3.0;
    b.charges[0].charge *= 3.0;
    return solver.solve(b);
  }();
  EXPECT_LT((sc.sigma - 3.0 * s1.sigma).norm(), 1e-9 * sc.sigma.norm());
}

TEST(FieldSolver, CapacitanceMatrixIsReciprocal) {
  const SurfaceMesh m = parallel_plate_scene(1.0, 0.4, 0.1, 1.0);
  BoundarySolver solver(m);
  const auto cm = capacitance_matrix(solver);
  ASSERT_EQ(cm.C.rows(), 2);
  EXPECT_NEAR(cm.C(0, 1) / cm.C(1, 0), 1.0, 0.01);
  EXPECT_LT(cm.C(0, 1), 0.0);
  EXPECT_GT(cm.C(0, 0), 0.0);
}

TEST(FieldSolver, NeutralDielectricCarriesNoNetCharge) {
  const SurfaceMesh m = dielectric_sphere_scene(1.0, 3, 3.8);
  {
    const FieldSolution sol = solve(m, BoundaryCondition{});
    EXPECT_EQ(sol.sigma.cwiseAbs().maxCoeff(), 0.0);
  }
  // Polarised by an outside charge the net bound charge stays at discretisation level.
  BoundaryCondition bc;
  bc.charges.push_back({Vec3(0.0, 0.4, 2.0), 1e-9});
  const FieldSolution sol = solve(m, bc);
  const double net = body_charge(sol, 0);
  double abs_total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) abs_total += std::abs(panel_charge(sol, i));
  EXPECT_LT(std::abs(net), 1e-4 * abs_total);
}

TEST(FieldSolver, RepeatedSolvesAreBitIdentical) {
  const SurfaceMesh m = sphere_scene(1.0, 2);
  BoundaryCondition bc;
  bc.potentials["sphere"] = 0.7;
  bc.charges.push_back({Vec3(0, 0, 2), 1e-10});
  const auto a = solve(m, bc);
  const auto b = solve(m, bc);
  ASSERT_EQ(a.sigma.size(), b.sigma.size());
  for (Eigen::Index i = 0; i < a.sigma.size(); ++i) EXPECT_EQ(a.sigma[i], b.sigma[i]);
}

TEST(FieldSolver, IterativePathAgreesWithDirect) {
  const SurfaceMesh m = sphere_scene(1.0, 2);
  BoundaryCondition bc;
  bc.potentials["sphere"] = 1.0;
  SolverOptions opt;
  opt.force_iterative = true;
  const auto it = solve(m, bc, opt);
  const auto dir = solve(m, bc);
  EXPECT_TRUE(it.diagnostics.iterative);
  EXPECT_LT((it.sigma - dir.sigma).norm(), 1e-6 * dir.sigma.norm());
}

TEST(FieldSolver, IterativeCapReportsNoConvergence) {
  const SurfaceMesh m = sphere_scene(1.0, 2);
  BoundaryCondition bc;
  bc.potentials["sphere"] = 1.0;
  SolverOptions opt;
  opt.force_iterative = true;
  opt.max_iterations = 1;
  opt.restart = 1;
  opt.iterative_tolerance = 1e-15;
  try {
    solve(m, bc, opt);
    FAIL() << "expected no-convergence";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), "no-convergence");
  }
}

TEST(FieldSolver, CoincidentPanelsAreSingular) {
  SurfaceMesh m = sphere_scene(1.0, 1);
  SurfaceMesh dup = m;
  m.append(dup, "_copy");
  BoundaryCondition bc = BoundaryCondition::grounded(m);
  bc.potentials["sphere"] = 1.0;
  try {
    solve(m, bc);
    FAIL() << "expected singular-system";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), "singular-system");
  }
}

TEST(FieldSolver, MissingElectrodePotentialIsConfigError) {
  const SurfaceMesh m = parallel_plate_scene(1.0, 0.5, 0.25, 1.0);
  BoundaryCondition bc;
  bc.potentials["top"] = 1.0;
  EXPECT_THROW(solve(m, bc), ConfigError);
}

TEST(FieldSolver, NearFieldCutoffIsEnforcedWhenDisabled) {
  const FieldSolution sol = solve_sphere(1.0, 1.0, 2);
  EvalOptions off;
  off.near_field = false;
  const Vec3 on_surface = sol.mesh->panels()[5].centroid * 1.001;
  try {
    evaluate_potential(sol, {on_surface}, off);
    FAIL() << "expected near-singular-evaluation";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), "near-singular-evaluation");
  }
  EXPECT_NO_THROW(evaluate_potential(sol, {on_surface}));
  EXPECT_NO_THROW(evaluate_potential(sol, {Vec3(3, 0, 0)}, off));
}

TEST(FieldSolver, PotentialStableUnderRefinement) {
  const SurfaceMesh coarse = plate_scene(3.0, 0.3, 1.3);
  const SurfaceMesh fine = refine_mesh(coarse, 4);
  BoundaryCondition bc;
  bc.potentials["plate"] = 0.0;
  bc.charges.push_back({Vec3(0.2, -0.1, 0.8), 1e-10});
  const Vec3 probe(0.5, 0.3, 0.4);
  const double vc = evaluate_potential(solve(coarse, bc), {probe})[0];
  const double vf = evaluate_potential(solve(fine, bc), {probe})[0];
  EXPECT_LT(std::abs(vc - vf), 0.01 * std::abs(vf));
}
