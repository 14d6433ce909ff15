#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "fibershield/geometry/mesh.hpp"
#include "fibershield/geometry/primitives.hpp"
#include "fibershield/geometry/scenario.hpp"
#include "fibershield/log.hpp"

namespace fibershield {

inline constexpr double min_fiber_conductivity = 1e-18;  // S/m
inline constexpr double max_fiber_conductivity = 1e-14;

// Steady-state potential of the charged fiber surface.
//   axial:  coordinate is the depth below the tip, ground at the far mounting end
//   radial: coordinate is the distance from the axis on the end face, ground at the
//           metal edge (mask opening or tube mouth)
struct ConductionProfile {
  enum class Coordinate { axial, radial };
  Coordinate coordinate = Coordinate::axial;
  std::vector<double> position;   // m, increasing; last node is grounded
  std::vector<double> potential;  // V

  double peak() const { return potential.empty() ? 0.0 : *std::max_element(potential.begin(), potential.end()); }

  // Linear interpolation; zero beyond the grounded end.
  double at(double s) const {
    if (position.empty()) return 0.0;
    if (s <= position.front()) return potential.front();
    if (s >= position.back()) return 0.0;
    const auto it = std::upper_bound(position.begin(), position.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - position.begin());
    const double t = (s - position[k - 1]) / (position[k] - position[k - 1]);
    return (1.0 - t) * potential[k - 1] + t * potential[k];
  }

  // Profile value at a point on the fiber surface whose tip lies at |z| = d.
  double at_point(const Vec3& p, double tip_distance) const {
    if (coordinate == Coordinate::axial) return at(std::max(0.0, std::abs(p.z()) - tip_distance));
    return at(std::hypot(p.x(), p.y()));
  }
};

namespace detail {

// Linear finite elements for -(g u')' = q on the given nodes with u(last) = 0 and a
// natural condition at the first node. g and q are integrated per element by
// 3-point Gauss, so piecewise-linear g and q are handled exactly.
template <class G, class Q>
std::vector<double> solve_ladder(const std::vector<double>& x, G&& conductance, Q&& load, double point_load_at_first) {
  const std::size_t n = x.size();
  const std::size_t m = n - 1;  // unknowns, last node fixed
  Eigen::SparseMatrix<double> K(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  Eigen::VectorXd F = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  std::vector<Eigen::Triplet<double>> trip;
  static constexpr double gp[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  for (std::size_t e = 0; e + 1 < n; ++e) {
    const double a = x[e], b = x[e + 1], h = b - a;
    double gint = 0.0, fa = 0.0, fb = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double s = 0.5 * (a + b) + 0.5 * h * gp[k];
      const double w = 0.5 * h * gw[k];
      const double phib = (s - a) / h;
      gint += w * conductance(s);
      const double q = load(s);
      fa += w * q * (1.0 - phib);
      fb += w * q * phib;
    }
    const double k_e = gint / (h * h);
    const auto add = [&](std::size_t i, std::size_t j, double v) {
      if (i < m && j < m) trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), v);
    };
    add(e, e, k_e);
    add(e + 1, e + 1, k_e);
    add(e, e + 1, -k_e);
    add(e + 1, e, -k_e);
    if (e < m) F[static_cast<Eigen::Index>(e)] += fa;
    if (e + 1 < m) F[static_cast<Eigen::Index>(e + 1)] += fb;
  }
  F[0] += point_load_at_first;
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success) throw SolverError("singular-system", "conduction ladder is singular");
  const Eigen::VectorXd u = ldlt.solve(F);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) out[i] = u[static_cast<Eigen::Index>(i)];
  return out;
}

}  // namespace detail

// Effective conducting thickness behind an end face of radius a, relative to a.
// A one-layer radial ladder with this thickness reproduces the tip potential of
// the full 3-D problem (semi-infinite cylinder, grounded rim) to a few percent.
inline constexpr double radial_thickness_ratio = 0.5;

inline ConductionProfile solve_fiber_conduction(const TrapScenario& s, double sigma_fiber) {
  if (!(sigma_fiber > 0.0) || !std::isfinite(sigma_fiber))
    throw ConfigError("invalid-conductivity", "fiber conductivity must be positive");
  if (sigma_fiber < min_fiber_conductivity || sigma_fiber > max_fiber_conductivity)
    warn("invalid-conductivity: fiber conductivity " + std::to_string(sigma_fiber) +
         " S/m lies outside [1e-18, 1e-14] S/m");
  if (!(s.surface_current_density >= 0.0)) throw ConfigError("invalid-scenario", "surface current density must be >= 0");

  const double i = s.surface_current_density;
  const double R = s.fiber_radius();
  ConductionProfile prof;

  if (s.shielding == Shielding::unshielded) {
    const double ell = s.exposed_tip_length;
    prof.coordinate = ConductionProfile::Coordinate::axial;
    prof.position = graded_nodes(s.fiber_length, 1e-6, 1.05, 1e-3, {ell});
    if (i == 0.0) {
      prof.potential.assign(prof.position.size(), 0.0);
      return prof;
    }
    const double G = sigma_fiber * constants::pi * R * R;
    const double q = i * 2.0 * constants::pi * R;
    prof.potential = detail::solve_ladder(
        prof.position, [G](double) { return G; }, [q, ell](double x) { return x < ell ? q : 0.0; },
        i * constants::pi * R * R);
    return prof;
  }

  const double a = (s.shielding == Shielding::gold_mask) ? s.mask->exposed_radius : R;
  prof.coordinate = ConductionProfile::Coordinate::radial;
  prof.position = uniform_nodes(0.0, a, 400);
  if (i == 0.0 || a <= 0.0) {
    prof.potential.assign(prof.position.size(), 0.0);
    return prof;
  }
  const double t = radial_thickness_ratio * a;
  prof.potential = detail::solve_ladder(
      prof.position, [&](double rho) { return sigma_fiber * t * 2.0 * constants::pi * rho; },
      [&](double rho) { return i * 2.0 * constants::pi * rho; }, 0.0);
  return prof;
}

// Panels that carry the conduction profile as Dirichlet data: the fiber surfaces
// (unshielded) or the exposed end face (shielded variants).
inline std::vector<std::size_t> conduction_panels(const SurfaceMesh& mesh) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    const Body& b = mesh.body_of(mesh[k]);
    if (b.kind == BodyKind::dielectric && b.name.rfind("fiber", 0) == 0) out.push_back(k);
  }
  return out;
}

}  // namespace fibershield
