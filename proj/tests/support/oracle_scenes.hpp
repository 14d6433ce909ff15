#pragma once

// Small analytic test scenes shared by the unit tests and the acceptance runner.

#include <cmath>
#include <vector>

#include "fibershield/field/solver.hpp"
#include "fibershield/geometry/primitives.hpp"

namespace fibershield::testing {

// Nodes symmetric about 0 on [-half, half], graded from the centre.
inline std::vector<double> symmetric_graded(double half, double h0, double growth, double hmax) {
  const auto pos = graded_nodes(half, h0, growth, hmax);
  std::vector<double> out;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) out.push_back(-*it);
  for (std::size_t i = 1; i < pos.size(); ++i) out.push_back(pos[i]);
  return out;
}

inline SurfaceMesh sphere_scene(double radius, int level) {
  SurfaceMesh m;
  Body b;
  b.name = "sphere";
  b.electrode = "sphere";
  b.assembly = 0;
  const int id = m.add_body(b);
  mesh_icosphere(m, id, Vec3::Zero(), radius, level);
  return m;
}

inline SurfaceMesh dielectric_sphere_scene(double radius, int level, double eps_r) {
  SurfaceMesh m;
  Body b;
  b.name = "ball";
  b.kind = BodyKind::dielectric;
  b.assembly = 0;
  b.eps_in = eps_r;
  const int id = m.add_body(b);
  mesh_icosphere(m, id, Vec3::Zero(), radius, level);
  return m;
}

// Square grounded sheet in z = 0 of side 2*half, graded towards the origin.
inline SurfaceMesh plate_scene(double half, double h0, double growth) {
  SurfaceMesh m;
  Body b;
  b.name = "plate";
  b.electrode = "plate";
  const int id = m.add_body(b);
  const auto us = symmetric_graded(half, h0, growth, half / 4.0);
  mesh_rectangle(m, id, Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), us, us);
  return m;
}

// Two square sheets at z = +-gap/2, graded from the centre.
inline SurfaceMesh parallel_plate_scene(double half, double gap, double h0, double growth) {
  SurfaceMesh m;
  const auto us = symmetric_graded(half, h0, growth, half / 3.0);
  for (int k = 0; k < 2; ++k) {
    Body b;
    b.name = k ? "top" : "bottom";
    b.electrode = b.name;
    const int id = m.add_body(b);
    mesh_rectangle(m, id, Vec3(0.0, 0.0, k ? 0.5 * gap : -0.5 * gap), Vec3::UnitX(), Vec3::UnitY(), us, us);
  }
  return m;
}

// Dielectric box occupying |x|,|y| < half, -depth < z < 0; top face graded towards the origin.
inline SurfaceMesh dielectric_slab_scene(double half, double depth, double h0, double growth, double eps_r) {
  SurfaceMesh m;
  Body b;
  b.name = "slab";
  b.kind = BodyKind::dielectric;
  b.assembly = 0;
  b.eps_in = eps_r;
  const int id = m.add_body(b);
  const auto xy = symmetric_graded(half, h0, growth, half / 3.0);
  auto zs = graded_nodes(depth, h0, growth, depth / 3.0);
  std::vector<double> z;
  for (auto it = zs.rbegin(); it != zs.rend(); ++it) z.push_back(-*it);
  mesh_box(m, id, {xy, xy, z});
  return m;
}

}  // namespace fibershield::testing
