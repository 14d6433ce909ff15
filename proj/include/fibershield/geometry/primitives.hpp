#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "fibershield/constants.hpp"
#include "fibershield/geometry/mesh.hpp"

namespace fibershield {

// Local frame for surfaces of revolution: point = origin + rho (cos phi ex + sin phi ey) + h ez.
struct AxisFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 ex = Vec3::UnitX();
  Vec3 ey = Vec3::UnitY();
  Vec3 ez = Vec3::UnitZ();

  Vec3 at(double rho, double phi, double h) const {
    return origin + rho * (std::cos(phi) * ex + std::sin(phi) * ey) + h * ez;
  }
};

// Geometric node spacing from 0 to `length`: first step h0, growth factor per step,
// capped at hmax. `breaks` are forced onto the node list.
inline std::vector<double> graded_nodes(double length, double h0, double growth, double hmax,
                                        std::vector<double> breaks = {}) {
  if (!(length > 0.0) || !(h0 > 0.0)) throw ConfigError("degenerate-resolution", "graded_nodes: bad length or step");
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> nodes{0.0};
  double pos = 0.0, h = std::min(h0, length);
  while (pos < length) {
    double next = pos + h;
    for (double b : breaks)
      if (b > pos + 1e-12 * length && b < next + 0.3 * h) {
        next = b;
        break;
      }
    if (next > length - 0.3 * h) next = length;
    nodes.push_back(next);
    pos = next;
    h = std::min(h * growth, hmax);
  }
  return nodes;
}

inline std::vector<double> uniform_nodes(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / n;
  out.back() = b;
  return out;
}

// Meshes the surface swept by rotating a (rho, h) polyline about frame.ez, using
// n_theta azimuthal sectors with nodes at phi = k 2pi/n. Quad diagonals alternate
// with the sign of cos(phi) sin(phi) at the sector centre, so the mesh keeps the
// mirror symmetries x -> -x and y -> -y when n_theta is a multiple of 4.
// `outward` gives the desired normal direction at a point.
inline void mesh_revolution(SurfaceMesh& mesh, int body, int surface, const AxisFrame& f,
                            const std::vector<std::pair<double, double>>& profile, int n_theta,
                            const std::function<Vec3(const Vec3&)>& outward,
                            const std::function<bool(const Vec3&)>& is_source = {}) {
  if (n_theta < 4 || n_theta % 4 != 0)
    throw ConfigError("degenerate-resolution", "n_theta must be a positive multiple of 4");
  const double dphi = 2.0 * constants::pi / n_theta;
  const auto emit = [&](const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 cen = (a + b + c) / 3.0;
    const bool src = is_source ? is_source(cen) : false;
    if ((b - a).cross(c - a).dot(outward(cen)) >= 0.0) mesh.add_triangle(a, b, c, body, surface, src);
    else mesh.add_triangle(a, c, b, body, surface, src);
  };
  for (std::size_t s = 0; s + 1 < profile.size(); ++s) {
    const auto [r0, h0] = profile[s];
    const auto [r1, h1] = profile[s + 1];
    for (int k = 0; k < n_theta; ++k) {
      const double pa = k * dphi, pb = (k + 1) * dphi;
      const Vec3 a0 = f.at(r0, pa, h0), b0 = f.at(r0, pb, h0);
      const Vec3 a1 = f.at(r1, pa, h1), b1 = f.at(r1, pb, h1);
      if (r0 == 0.0) {
        emit(a0, a1, b1);
      } else if (r1 == 0.0) {
        emit(a0, b0, a1);
      } else {
        const double mid = (k + 0.5) * dphi;
        if (std::cos(mid) * std::sin(mid) > 0.0) {
          emit(a0, b0, b1);
          emit(a0, b1, a1);
        } else {
          emit(a0, b0, a1);
          emit(b0, b1, a1);
        }
      }
    }
  }
}

// Flat disc (inner = 0) or annulus in the plane h = const of the frame.
inline void mesh_annulus(SurfaceMesh& mesh, int body, const AxisFrame& f, double h, const std::vector<double>& radii,
                         int n_theta, bool normal_along_ez, const std::function<bool(const Vec3&)>& is_source = {}) {
  std::vector<double> rims;
  for (double r : radii)
    if (r > 0.0) rims.push_back(r);
  const int surf = mesh.add_surface(AnalyticSurface::plane(f.origin + h * f.ez, f.ez, {rims.front(), rims.back()}));
  std::vector<std::pair<double, double>> prof;
  for (double r : radii) prof.emplace_back(r, h);
  const Vec3 dir = normal_along_ez ? f.ez : Vec3(-f.ez);
  mesh_revolution(mesh, body, surf, f, prof, n_theta, [dir](const Vec3&) { return dir; }, is_source);
}

// Lateral cylinder wall between heights in `hs` (sorted), radius rho.
inline void mesh_cylinder(SurfaceMesh& mesh, int body, const AxisFrame& f, double rho, const std::vector<double>& hs,
                          int n_theta, bool normal_outward, const std::function<bool(const Vec3&)>& is_source = {}) {
  const int surf = mesh.add_surface(AnalyticSurface::cylinder(f.origin, f.ez, rho));
  std::vector<std::pair<double, double>> prof;
  for (double h : hs) prof.emplace_back(rho, h);
  const double sgn = normal_outward ? 1.0 : -1.0;
  const AxisFrame fr = f;
  mesh_revolution(mesh, body, surf, f, prof, n_theta,
                  [fr, sgn](const Vec3& p) {
                    const Vec3 rel = p - fr.origin;
                    return Vec3(sgn * (rel - rel.dot(fr.ez) * fr.ez));
                  },
                  is_source);
}

// Planar rectangle origin + u*eu + v*ev over the node lattice us x vs. Diagonals are
// chosen by the sign of the cell-centre u, which makes the mesh symmetric under u -> -u.
inline void mesh_rectangle(SurfaceMesh& mesh, int body, const Vec3& origin, const Vec3& eu, const Vec3& ev,
                           const std::vector<double>& us, const std::vector<double>& vs) {
  const Vec3 n = eu.cross(ev).normalized();
  const int surf = mesh.add_surface(AnalyticSurface::plane(origin, n));
  const auto P = [&](double u, double v) { return Vec3(origin + u * eu + v * ev); };
  for (std::size_t i = 0; i + 1 < us.size(); ++i) {
    for (std::size_t j = 0; j + 1 < vs.size(); ++j) {
      const Vec3 a = P(us[i], vs[j]), b = P(us[i + 1], vs[j]);
      const Vec3 c = P(us[i + 1], vs[j + 1]), d = P(us[i], vs[j + 1]);
      if (0.5 * (us[i] + us[i + 1]) >= 0.0) {
        mesh.add_triangle(a, b, c, body, surf);
        mesh.add_triangle(a, c, d, body, surf);
      } else {
        mesh.add_triangle(a, b, d, body, surf);
        mesh.add_triangle(b, c, d, body, surf);
      }
    }
  }
}

// Icosahedron subdivided `level` times and projected to the sphere; outward normals.
inline void mesh_icosphere(SurfaceMesh& mesh, int body, const Vec3& center, double radius, int level) {
  const int surf = mesh.add_surface(AnalyticSurface::sphere(center, radius));
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
                                           {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                           {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
                                           {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    const auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& [a, b, c] : faces) {
      const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
      next.push_back({a, ab, ca});
      next.push_back({b, bc, ab});
      next.push_back({c, ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  for (const auto& [a, b, c] : faces) {
    const auto P = [&](int i) { return Vec3(center + radius * v[static_cast<std::size_t>(i)]); };
    Vec3 pa = P(a), pb = P(b), pc = P(c);
    if ((pb - pa).cross(pc - pa).dot(pa + pb + pc - 3.0 * center) < 0.0) std::swap(pb, pc);
    mesh.add_triangle(pa, pb, pc, body, surf);
  }
}

// Axis-aligned box [lo, hi] with outward normals; each face gets the node lattice
// from the matching per-axis node lists.
inline void mesh_box(SurfaceMesh& mesh, int body, const std::array<std::vector<double>, 3>& nodes) {
  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      Vec3 origin = Vec3::Zero();
      origin[axis] = side ? nodes[static_cast<std::size_t>(axis)].back() : nodes[static_cast<std::size_t>(axis)].front();
      Vec3 eu = Vec3::Zero(), ev = Vec3::Zero();
      eu[a1] = 1.0;
      ev[a2] = 1.0;
      const auto& us = nodes[static_cast<std::size_t>(a1)];
      const auto& vs = nodes[static_cast<std::size_t>(a2)];
      // eu x ev points along +axis; flip the v direction on the low face.
      if (side) {
        mesh_rectangle(mesh, body, origin, eu, ev, us, vs);
      } else {
        std::vector<double> vneg(vs.rbegin(), vs.rend());
        for (auto& x : vneg) x = -x;
        mesh_rectangle(mesh, body, origin, eu, Vec3(-ev), us, vneg);
      }
    }
  }
}

}  // namespace fibershield
