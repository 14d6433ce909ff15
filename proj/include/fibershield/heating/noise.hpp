#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "fibershield/constants.hpp"
#include "fibershield/error.hpp"
#include "fibershield/field/solver.hpp"
#include "fibershield/geometry/primitives.hpp"
#include "fibershield/geometry/scenario.hpp"
#include "fibershield/geometry/scenario_mesh.hpp"
#include "fibershield/log.hpp"

namespace fibershield {

struct VolumeQuadrature {
  std::vector<Vec3> points;
  std::vector<double> weights;  // m^3

  double volume() const {
    double v = 0.0;
    for (double w : weights) v += w;
    return v;
  }
  void append(const VolumeQuadrature& o) {
    points.insert(points.end(), o.points.begin(), o.points.end());
    weights.insert(weights.end(), o.weights.begin(), o.weights.end());
  }
};

// Cell layout for the dielectric volume. Lengths relative to the ion distance d
// where noted, so the same density serves every cavity length.
struct QuadratureDensity {
  double first_cell = 1.0 / 16.0;  // axial cell at the face, in units of d
  double growth = 1.35;
  double max_cell = 400e-6;        // m
  double depth = 2e-3;             // m into the dielectric
  int radial_cells = 6;
  int azimuth = 12;
  int gauss = 2;                   // Gauss-Legendre points per cell and direction

  // Every cell split in two along each direction.
  QuadratureDensity doubled() const {
    QuadratureDensity q = *this;
    q.first_cell *= 0.5;
    q.growth = std::sqrt(growth);
    q.max_cell *= 0.5;
    q.radial_cells *= 2;
    q.azimuth *= 2;
    return q;
  }
};

namespace detail {
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  switch (n) {
    case 1: x = {0.0}; w = {2.0}; return;
    case 2: x = {-0.5773502691896257, 0.5773502691896257}; w = {1.0, 1.0}; return;
    case 3: x = {-0.7745966692414834, 0.0, 0.7745966692414834}; w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}; return;
    case 4:
      x = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
      w = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
      return;
    default: throw ConfigError("invalid-quadrature", "Gauss order must be 1..4");
  }
}

// Tensor Gauss rule over the cells of `nodes`.
inline void cell_rule(const std::vector<double>& nodes, int order, std::vector<double>& x, std::vector<double>& w) {
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);
  x.clear();
  w.clear();
  for (std::size_t c = 0; c + 1 < nodes.size(); ++c) {
    const double mid = 0.5 * (nodes[c] + nodes[c + 1]), half = 0.5 * (nodes[c + 1] - nodes[c]);
    for (std::size_t k = 0; k < gx.size(); ++k) {
      x.push_back(mid + half * gx[k]);
      w.push_back(half * gw[k]);
    }
  }
}
}  // namespace detail

// Solid cylinder about the z axis: radius `radius`, face at z = z_face, extending
// `depth` in direction `dir` (+1 or -1). Radial nodes uniform unless radial_first > 0.
inline VolumeQuadrature cylinder_quadrature(double radius, double z_face, int dir, double depth, double first_cell,
                                            const QuadratureDensity& q, double radial_first = 0.0) {
  std::vector<double> zx, zw, rx, rw;
  detail::cell_rule(graded_nodes(depth, first_cell, q.growth, q.max_cell), q.gauss, zx, zw);
  const auto rn = radial_first > 0.0 ? graded_nodes(radius, radial_first, q.growth, q.max_cell)
                                     : uniform_nodes(0.0, radius, q.radial_cells);
  detail::cell_rule(rn, q.gauss, rx, rw);
  VolumeQuadrature out;
  const double dphi = 2.0 * constants::pi / q.azimuth;
  for (std::size_t a = 0; a < zx.size(); ++a)
    for (std::size_t b = 0; b < rx.size(); ++b)
      for (int k = 0; k < q.azimuth; ++k) {
        const double phi = (k + 0.5) * dphi;
        out.points.emplace_back(rx[b] * std::cos(phi), rx[b] * std::sin(phi), z_face + dir * zx[a]);
        out.weights.push_back(zw[a] * rw[b] * rx[b] * dphi);
      }
  return out;
}

// Glass of both fibers, from the end faces at z = +-d back to the depth cutoff.
inline VolumeQuadrature fiber_quadrature(const TrapScenario& s, const QuadratureDensity& q) {
  const double d = s.cavity_half_length;
  const double depth = std::min(q.depth, s.fiber_length);
  VolumeQuadrature v = cylinder_quadrature(s.fiber_radius(), d, +1, depth, q.first_cell * d, q);
  if (s.fiber_count == 2) v.append(cylinder_quadrature(s.fiber_radius(), -d, -1, depth, q.first_cell * d, q));
  return v;
}

// Field difference between the ion at `ion` and at `ion + delta * dir`, everything
// grounded, evaluated at the quadrature nodes.
struct DeltaField {
  std::vector<Vec3> delta_e;  // V/m, per node
  double integral = 0.0;      // sum w |dE|^2, V^2 m
  double delta = 0.0;
  double linearity_change = 0.0;  // relative change of integral/delta^2 when delta is halved (0 if unchecked)
};

struct HeatingOptions {
  double delta_ratio = 1e-3;  // delta = ratio * d
  bool check_linearity = true;
  QuadratureDensity quadrature;
  Resolution resolution;
  SolverOptions solver;
  EvalOptions eval;
};

namespace detail {
inline double delta_integral(BoundarySolver& solver, const Vec3& ion, const Vec3& dir, double delta,
                             const VolumeQuadrature& q, const EvalOptions& eval, std::vector<Vec3>* out) {
  const double e = constants::elementary_charge;
  BoundaryCondition bc = BoundaryCondition::grounded(solver.mesh());
  bc.charges = {PointCharge{ion, e}};
  const FieldSolution a = solver.solve(bc);
  bc.charges = {PointCharge{ion + delta * dir, e}};
  FieldSolution diff = solver.solve(bc);
  diff.sigma -= a.sigma;
  diff.charges = {PointCharge{ion + delta * dir, e}, PointCharge{ion, -e}};
  std::vector<Vec3> de = evaluate_field(diff, q.points, eval);
  double sum = 0.0;
  for (std::size_t k = 0; k < de.size(); ++k) sum += q.weights[k] * de[k].squaredNorm();
  if (out) *out = std::move(de);
  return sum;
}
}  // namespace detail

inline DeltaField delta_field(BoundarySolver& solver, const Vec3& ion, const Vec3& direction, double delta,
                              const VolumeQuadrature& q, bool check_linearity = true, const EvalOptions& eval = {}) {
  if (!(delta > 0.0)) throw ConfigError("invalid-argument", "displacement must be > 0");
  const Vec3 dir = direction.normalized();
  DeltaField r;
  r.delta = delta;
  if (q.points.empty()) return r;
  r.integral = detail::delta_integral(solver, ion, dir, delta, q, eval, &r.delta_e);
  if (check_linearity) {
    const double half = detail::delta_integral(solver, ion, dir, 0.5 * delta, q, eval, nullptr);
    const double a = r.integral / (delta * delta), b = half / (0.25 * delta * delta);
    r.linearity_change = a > 0.0 ? std::abs(b - a) / a : 0.0;
    if (r.linearity_change > 0.02)
      warn("nonlinear-displacement: halving the displacement changes the field integral by " +
           std::to_string(100.0 * r.linearity_change) + "%");
  }
  return r;
}

// S(w) = 4 kT / (delta^2 e^2 w) eps0 eps_r tan(delta) integral, in V^2 m^-2 Hz^-1.
inline double noise_psd(double integral, double omega, double temperature, double eps_r, double loss_tangent,
                        double delta) {
  if (!(omega > 0.0) || !(temperature > 0.0) || !(eps_r > 0.0) || !(loss_tangent >= 0.0) || !(delta > 0.0) ||
      !(integral >= 0.0))
    throw ConfigError("invalid-argument", "noise_psd needs positive inputs");
  const double e = constants::elementary_charge;
  return 4.0 * constants::boltzmann * temperature / (delta * delta * e * e * omega) * constants::vacuum_permittivity *
         eps_r * loss_tangent * integral;
}

// ndot = e^2 S / (4 m hbar w), returned in phonons per millisecond.
inline double heating_rate(double psd, double omega, double mass) {
  if (!(psd >= 0.0) || !(omega > 0.0) || !(mass > 0.0)) throw ConfigError("invalid-argument", "heating_rate inputs");
  const double e = constants::elementary_charge;
  return e * e * psd / (4.0 * mass * constants::hbar * omega) * 1e-3;
}

struct NoiseResult {
  int direction = 2;       // 0 x, 1 y, 2 z
  double omega = 0.0;      // rad/s
  double psd = 0.0;        // V^2 m^-2 Hz^-1
  double integral = 0.0;   // V^2 m
  double delta = 0.0;      // m
  double rate = 0.0;       // phonons/ms
  double linearity_change = 0.0;
  std::size_t quadrature_points = 0;
  double quadrature_volume = 0.0;
  std::size_t panels = 0;
};

// Full chain for one scenario along the cavity (z) axis at the scenario's axial frequency.
inline NoiseResult scenario_heating(const TrapScenario& s, const HeatingOptions& opt = {}) {
  validate(s);
  auto mesh = std::make_shared<const SurfaceMesh>(build_scenario_mesh(s, opt.resolution));
  BoundarySolver solver(mesh, opt.solver);
  const VolumeQuadrature q = fiber_quadrature(s, opt.quadrature);
  const double delta = opt.delta_ratio * s.cavity_half_length;
  const DeltaField df = delta_field(solver, Vec3::Zero(), Vec3::UnitZ(), delta, q, opt.check_linearity, opt.eval);
  NoiseResult r;
  r.omega = s.axial_secular_frequency;
  r.integral = df.integral;
  r.delta = delta;
  r.psd = noise_psd(df.integral, r.omega, s.temperature, s.relative_permittivity, s.loss_tangent, delta);
  r.rate = heating_rate(r.psd, r.omega, s.ion_mass);
  r.linearity_change = df.linearity_change;
  r.quadrature_points = q.points.size();
  r.quadrature_volume = q.volume();
  r.panels = mesh->size();
  return r;
}

}  // namespace fibershield
