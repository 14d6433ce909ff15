#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fibershield/geometry/primitives.hpp"
#include "fibershield/geometry/scenario.hpp"

namespace fibershield {

// Mesh density controls. Lengths are target panel sizes in meters.
struct Resolution {
  int n_theta = 24;                  // azimuthal sectors on fiber surfaces, multiple of 4
  double tip_step = 6e-6;            // panel size at the fiber tip (axial and radial)
  double growth = 1.3;               // axial grading away from the tip
  double max_fiber_step = 6e-3;
  double liner_length = 2e-3;        // metal contact sheet around the fiber inside a shield
  double blade_edge_step = 50e-6;    // across the blade, at the knife edge
  double blade_growth = 1.5;
  double blade_max_step = 400e-6;
  double blade_axial_step = 125e-6;  // along the trap axis on the RF segments
  double endcap_step = 60e-6;        // along the trap axis at the RF/endcap gap
  bool include_blades = true;
  std::size_t min_panels_per_body = 8;

  // Coarser everywhere by `f` (> 1) or finer (< 1), keeping the same layout.
  Resolution scaled(double f) const {
    Resolution r = *this;
    r.tip_step *= f;
    r.blade_edge_step *= f;
    r.blade_axial_step *= f;
    r.endcap_step *= f;
    r.n_theta = std::max(8, 4 * static_cast<int>(std::lround(n_theta / (4.0 * f))));
    return r;
  }
};

namespace detail {

inline std::vector<double> radial_nodes(double r0, double r1, double step) {
  const int n = std::max(2, static_cast<int>(std::ceil((r1 - r0) / step - 1e-9)));
  return uniform_nodes(r0, r1, n);
}

// One fiber (plus shield) with its tip at z = d, extending to +z. Names carry no suffix.
inline SurfaceMesh build_fiber_assembly(const TrapScenario& s, const Resolution& res) {
  SurfaceMesh m;
  const double d = s.cavity_half_length;
  const double R = s.fiber_radius();
  const double Lf = s.fiber_length;
  const int nt = res.n_theta;
  AxisFrame f;
  f.origin = Vec3(0.0, 0.0, d);

  Body fiber;
  fiber.name = "fiber";
  fiber.kind = BodyKind::dielectric;
  fiber.assembly = 0;
  fiber.eps_in = s.relative_permittivity;
  fiber.eps_out = 1.0;

  const auto conductor = [](std::string name, std::string electrode, int assembly) {
    Body b;
    b.name = std::move(name);
    b.kind = BodyKind::conductor;
    b.electrode = std::move(electrode);
    b.assembly = assembly;
    return b;
  };
  const auto all = [](const Vec3&) { return true; };

  switch (s.shielding) {
    case Shielding::unshielded: {
      const int fb = m.add_body(fiber);
      const double ell = s.exposed_tip_length;
      mesh_annulus(m, fb, f, 0.0, radial_nodes(0.0, R, res.tip_step), nt, false, all);
      const auto hs = graded_nodes(Lf, res.tip_step, res.growth, res.max_fiber_step, {ell});
      mesh_cylinder(m, fb, f, R, hs, nt, true, [&](const Vec3& p) { return p.z() - d < ell; });
      mesh_annulus(m, fb, f, Lf, {0.0, 0.5 * R, R}, nt, true);
      break;
    }
    case Shielding::metal_tube: {
      const double Ro = 0.5 * s.tube->outer_diameter;
      const int fb = m.add_body(fiber);
      const int sh = m.add_body(conductor("shield", "shield", 0));
      const int ln = m.add_body(conductor("shield_liner", "shield", -1));
      mesh_annulus(m, fb, f, 0.0, radial_nodes(0.0, R, res.tip_step), nt, false, all);
      mesh_annulus(m, sh, f, 0.0, radial_nodes(R, Ro, res.tip_step), nt, false);
      mesh_cylinder(m, sh, f, Ro, graded_nodes(Lf, res.tip_step, res.growth, res.max_fiber_step), nt, true);
      mesh_annulus(m, sh, f, Lf, {0.0, 0.5 * Ro, Ro}, nt, true);
      mesh_cylinder(m, ln, f, R, graded_nodes(res.liner_length, res.tip_step, res.growth, res.max_fiber_step), nt, true);
      break;
    }
    case Shielding::gold_mask: {
      const double r = s.mask->exposed_radius;
      const double t = s.mask->thickness;
      const double Ro = R + t;
      const int fb = m.add_body(fiber);
      const int sh = m.add_body(conductor("shield", "shield", 0));
      const int ln = m.add_body(conductor("shield_liner", "shield", -1));
      mesh_annulus(m, fb, f, 0.0, radial_nodes(0.0, r, res.tip_step), nt, false, all);
      // Bore wall of the mask opening, facing the axis.
      mesh_cylinder(m, sh, f, r, radial_nodes(-t, 0.0, res.tip_step), nt, false);
      mesh_annulus(m, sh, f, -t, radial_nodes(r, Ro, res.tip_step), nt, false);
      auto hs = graded_nodes(Lf + t, res.tip_step, res.growth, res.max_fiber_step);
      for (auto& h : hs) h -= t;
      mesh_cylinder(m, sh, f, Ro, hs, nt, true);
      mesh_annulus(m, sh, f, Lf, {0.0, 0.5 * Ro, Ro}, nt, true);
      // Metal in contact with the fiber: covered part of the end face and the side.
      if (R > r) mesh_annulus(m, ln, f, 0.0, radial_nodes(r, R, res.tip_step), nt, false);
      mesh_cylinder(m, ln, f, R, graded_nodes(res.liner_length, res.tip_step, res.growth, res.max_fiber_step), nt, true);
      break;
    }
  }
  return m;
}

inline void build_blades(SurfaceMesh& m, const TrapScenario& s, const Resolution& res) {
  const auto& b = s.blades;
  const double W = b.rf_width;
  int n_rf = 2 * static_cast<int>(std::ceil(0.5 * W / res.blade_axial_step - 1e-9));
  const auto y_rf = uniform_nodes(-0.5 * W, 0.5 * W, std::max(2, n_rf));
  std::vector<double> y_cap_p = graded_nodes(b.endcap_length, res.endcap_step, res.blade_growth, res.blade_max_step);
  for (auto& y : y_cap_p) y += 0.5 * W + b.endcap_gap;
  std::vector<double> y_cap_m(y_cap_p.rbegin(), y_cap_p.rend());
  for (auto& y : y_cap_m) y = -y;
  std::vector<double> s_nodes = graded_nodes(b.height, res.blade_edge_step, res.blade_growth, res.blade_max_step);
  for (auto& v : s_nodes) v += b.edge_distance;

  for (int k = 0; k < 4; ++k) {
    const double th = constants::pi / 4.0 + k * constants::pi / 2.0;
    const Vec3 u(std::cos(th), 0.0, std::sin(th));
    const std::string pair = (k % 2 == 0) ? "rf_a" : "rf_b";
    const std::string name = pair + std::to_string(k / 2);
    const auto add = [&](const std::string& n, const std::vector<double>& ys) {
      Body body;
      body.name = n;
      body.kind = BodyKind::conductor;
      body.electrode = n;
      const int id = m.add_body(body);
      mesh_rectangle(m, id, Vec3::Zero(), Vec3::UnitY(), u, ys, s_nodes);
    };
    add(name, y_rf);
    add("endcap_" + std::to_string(k) + "p", y_cap_p);
    add("endcap_" + std::to_string(k) + "m", y_cap_m);
  }
}

}  // namespace detail

// Electrode names produced by build_scenario_mesh, by role.
inline bool is_rf_electrode(const std::string& e) { return e.rfind("rf_", 0) == 0; }
inline bool is_endcap_electrode(const std::string& e) { return e.rfind("endcap_", 0) == 0; }
inline bool is_shield_electrode(const std::string& e) { return e.rfind("shield", 0) == 0; }
// +1 for the pair driven in phase, -1 for the opposite pair.
inline double rf_phase(const std::string& e) { return e.rfind("rf_a", 0) == 0 ? 1.0 : -1.0; }

// Fibers lie on the z axis with tips at z = +-d; the trap axis is y.
inline SurfaceMesh build_scenario_mesh(const TrapScenario& s, const Resolution& res = {}) {
  validate(s);
  if (res.n_theta < 4 || res.n_theta % 4 != 0 || !(res.tip_step > 0.0) || !(res.growth >= 1.0))
    throw ConfigError("degenerate-resolution", "resolution parameters out of range");

  SurfaceMesh mesh;
  const SurfaceMesh fiber = detail::build_fiber_assembly(s, res);
  mesh.append(fiber, "_zp", 0);
  if (s.fiber_count == 2) {
    SurfaceMesh other = fiber;
    other.mirror(Vec3::UnitZ());
    mesh.append(other, "_zm", 1);
  }
  if (res.include_blades) detail::build_blades(mesh, s, res);

  const auto counts = mesh.panel_count_per_body();
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] == 0 || counts[i] < res.min_panels_per_body)
      throw ConfigError("degenerate-resolution", "body '" + mesh.bodies()[i].name + "' has only " +
                                                     std::to_string(counts[i]) + " panels");
  return mesh;
}

}  // namespace fibershield
