#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fibershield/error.hpp"

namespace fibershield {

using Vec3 = Eigen::Vector3d;

enum class BodyKind { conductor, dielectric };

// A body is one physical surface with a single role. Several conductor bodies may
// share an electrode (e.g. a shield and its inner liner) and then share a potential.
struct Body {
  std::string name;
  BodyKind kind = BodyKind::conductor;
  std::string electrode;      // conductors only
  int assembly = -1;          // closed-surface group; -1 for open sheets
  double eps_in = 1.0;        // dielectric only; normal points from in to out
  double eps_out = 1.0;
};

// Analytic carrier surface, used to put refined vertices back on the true geometry.
struct AnalyticSurface {
  enum class Type { plane, cylinder, sphere };
  Type type = Type::plane;
  Vec3 origin = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();          // plane normal or cylinder axis (unit)
  double radius = 0.0;                // cylinder / sphere
  std::vector<double> rim_radii;      // plane: circles about `origin` whose chords are pushed outward

  static AnalyticSurface plane(Vec3 origin, Vec3 normal, std::vector<double> rims = {}) {
    return {Type::plane, origin, normal.normalized(), 0.0, std::move(rims)};
  }
  static AnalyticSurface cylinder(Vec3 origin, Vec3 axis, double radius) {
    return {Type::cylinder, origin, axis.normalized(), radius, {}};
  }
  static AnalyticSurface sphere(Vec3 center, double radius) {
    return {Type::sphere, center, Vec3::UnitZ(), radius, {}};
  }

  Vec3 project_point(const Vec3& p) const {
    switch (type) {
      case Type::cylinder: {
        const Vec3 rel = p - origin;
        const Vec3 along = rel.dot(axis) * axis;
        const Vec3 radial = rel - along;
        const double rn = radial.norm();
        if (rn == 0.0) return p;
        return origin + along + radial * (radius / rn);
      }
      case Type::sphere: {
        const Vec3 rel = p - origin;
        return origin + rel * (radius / rel.norm());
      }
      case Type::plane:
        return p;
    }
    return p;
  }

  // Point at parameter t on the edge a-b, placed on the surface. Edges lying on a
  // rim circle (both endpoints at the rim radius) follow the circle, which keeps
  // seams with neighbouring cylinders conforming.
  Vec3 edge_point(const Vec3& a, const Vec3& b, double t) const {
    const Vec3 p = (1.0 - t) * a + t * b;
    if (type != Type::plane) return project_point(p);
    if (rim_radii.empty()) return p;
    const auto radial = [&](const Vec3& q) {
      const Vec3 rel = q - origin;
      return Vec3(rel - rel.dot(axis) * axis);
    };
    const double ra = radial(a).norm(), rb = radial(b).norm();
    for (double rim : rim_radii) {
      const double tol = 1e-9 * std::max(rim, 1e-12);
      if (std::abs(ra - rim) < tol && std::abs(rb - rim) < tol) {
        const Vec3 rel = radial(p);
        const double rn = rel.norm();
        if (rn == 0.0) return p;
        return p + rel * (rim / rn - 1.0);
      }
    }
    return p;
  }
};

struct Panel {
  std::array<Vec3, 3> vertices;
  Vec3 centroid;
  Vec3 normal;                 // unit, (v1-v0)x(v2-v0) orientation
  double area = 0.0;
  double diameter = 0.0;       // longest edge
  int body = -1;
  int surface = -1;
  bool current_source = false; // receives photo-induced surface current
};

class SurfaceMesh {
 public:
  int add_body(Body b) {
    bodies_.push_back(std::move(b));
    return static_cast<int>(bodies_.size()) - 1;
  }
  int add_surface(AnalyticSurface s) {
    surfaces_.push_back(std::move(s));
    return static_cast<int>(surfaces_.size()) - 1;
  }

  void add_triangle(const Vec3& a, const Vec3& b, const Vec3& c, int body, int surface, bool current_source = false) {
    Panel p;
    p.vertices = {a, b, c};
    const Vec3 cr = (b - a).cross(c - a);
    p.area = 0.5 * cr.norm();
    if (!(p.area > 0.0) || !std::isfinite(p.area))
      throw ConfigError("degenerate-panel", "zero-area panel on body " + std::to_string(body));
    p.normal = cr.normalized();
    p.centroid = (a + b + c) / 3.0;
    p.diameter = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    p.body = body;
    p.surface = surface;
    p.current_source = current_source;
    panels_.push_back(p);
  }

  const std::vector<Panel>& panels() const { return panels_; }
  const std::vector<Body>& bodies() const { return bodies_; }
  const std::vector<AnalyticSurface>& surfaces() const { return surfaces_; }
  std::size_t size() const { return panels_.size(); }
  bool empty() const { return panels_.empty(); }
  const Panel& operator[](std::size_t i) const { return panels_[i]; }
  const Body& body_of(const Panel& p) const { return bodies_[static_cast<std::size_t>(p.body)]; }

  int find_body(const std::string& name) const {
    for (std::size_t i = 0; i < bodies_.size(); ++i)
      if (bodies_[i].name == name) return static_cast<int>(i);
    return -1;
  }

  // Electrode names in first-appearance order.
  std::vector<std::string> electrodes() const {
    std::vector<std::string> out;
    for (const auto& b : bodies_)
      if (b.kind == BodyKind::conductor && std::find(out.begin(), out.end(), b.electrode) == out.end())
        out.push_back(b.electrode);
    return out;
  }

  std::vector<std::size_t> panel_count_per_body() const {
    std::vector<std::size_t> n(bodies_.size(), 0);
    for (const auto& p : panels_) ++n[static_cast<std::size_t>(p.body)];
    return n;
  }

  double body_area(int body) const {
    double a = 0.0;
    for (const auto& p : panels_)
      if (p.body == body) a += p.area;
    return a;
  }

  double total_area() const {
    double a = 0.0;
    for (const auto& p : panels_) a += p.area;
    return a;
  }

  double current_source_area() const {
    double a = 0.0;
    for (const auto& p : panels_)
      if (p.current_source) a += p.area;
    return a;
  }

  double dielectric_area() const {
    double a = 0.0;
    for (const auto& p : panels_)
      if (body_of(p).kind == BodyKind::dielectric) a += p.area;
    return a;
  }

  // |sum of area-weighted normals| / sum of areas, per closed assembly.
  std::map<int, double> closure_defects() const {
    std::map<int, Vec3> sum;
    std::map<int, double> area;
    for (const auto& p : panels_) {
      const int asmb = body_of(p).assembly;
      if (asmb < 0) continue;
      auto [it, inserted] = sum.try_emplace(asmb, Vec3::Zero());
      it->second += p.area * p.normal;
      area[asmb] += p.area;
    }
    std::map<int, double> out;
    for (const auto& [k, v] : sum) out[k] = v.norm() / area[k];
    return out;
  }

  void mirror(const Vec3& plane_normal) {
    const Vec3 n = plane_normal.normalized();
    const auto reflect = [&](const Vec3& v) { return Vec3(v - 2.0 * v.dot(n) * n); };
    for (auto& p : panels_) {
      // Reflection flips handedness; swap two vertices to keep outward normals outward.
      const std::array<Vec3, 3> v = {reflect(p.vertices[0]), reflect(p.vertices[2]), reflect(p.vertices[1])};
      p.vertices = v;
      p.centroid = reflect(p.centroid);
      p.normal = reflect(p.normal);
    }
    for (auto& s : surfaces_) {
      s.origin = reflect(s.origin);
      s.axis = reflect(s.axis);
    }
  }

  // Appends another mesh; body and surface indices are remapped, names get `suffix`.
  void append(const SurfaceMesh& other, const std::string& suffix = "", int assembly_offset = 0) {
    const int body_base = static_cast<int>(bodies_.size());
    const int surf_base = static_cast<int>(surfaces_.size());
    for (Body b : other.bodies_) {
      b.name += suffix;
      if (b.kind == BodyKind::conductor) b.electrode += suffix;
      if (b.assembly >= 0) b.assembly += assembly_offset;
      bodies_.push_back(std::move(b));
    }
    for (const auto& s : other.surfaces_) surfaces_.push_back(s);
    for (Panel p : other.panels_) {
      p.body += body_base;
      p.surface += surf_base;
      panels_.push_back(p);
    }
  }

  int max_assembly() const {
    int m = -1;
    for (const auto& b : bodies_) m = std::max(m, b.assembly);
    return m;
  }

 private:
  std::vector<Panel> panels_;
  std::vector<Body> bodies_;
  std::vector<AnalyticSurface> surfaces_;
};

// Splits every panel into m*m children (m = round(sqrt(factor))) and moves new
// vertices onto the analytic carrier surface. factor == 1 returns the mesh unchanged.
inline SurfaceMesh refine_mesh(const SurfaceMesh& mesh, int factor) {
  if (factor < 1) throw ConfigError("invalid-argument", "refine factor must be >= 1");
  const int m = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(factor)))));
  if (m == 1) return mesh;

  SurfaceMesh out;
  for (const auto& b : mesh.bodies()) out.add_body(b);
  for (const auto& s : mesh.surfaces()) out.add_surface(s);

  for (const auto& p : mesh.panels()) {
    const AnalyticSurface& surf = mesh.surfaces()[static_cast<std::size_t>(p.surface)];
    const auto& [a, b, c] = p.vertices;
    // Barycentric lattice; vertex (i, j) sits at a + i/m (b-a) + j/m (c-a).
    std::vector<Vec3> lattice((m + 1) * (m + 2) / 2);
    const auto index = [m](int i, int j) { return j * (m + 1) - j * (j - 1) / 2 + i; };
    for (int j = 0; j <= m; ++j) {
      for (int i = 0; i + j <= m; ++i) {
        const double u = static_cast<double>(i) / m, v = static_cast<double>(j) / m;
        Vec3 q;
        if (j == 0) q = surf.edge_point(a, b, u);
        else if (i == 0) q = surf.edge_point(a, c, v);
        else if (i + j == m) q = surf.edge_point(b, c, v);
        else q = surf.project_point((1.0 - u - v) * a + u * b + v * c);
        lattice[static_cast<std::size_t>(index(i, j))] = q;
      }
    }
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i + j < m; ++i) {
        const Vec3& p00 = lattice[static_cast<std::size_t>(index(i, j))];
        const Vec3& p10 = lattice[static_cast<std::size_t>(index(i + 1, j))];
        const Vec3& p01 = lattice[static_cast<std::size_t>(index(i, j + 1))];
        out.add_triangle(p00, p10, p01, p.body, p.surface, p.current_source);
        if (i + j + 1 < m) {
          const Vec3& p11 = lattice[static_cast<std::size_t>(index(i + 1, j + 1))];
          out.add_triangle(p10, p11, p01, p.body, p.surface, p.current_source);
        }
      }
    }
  }
  return out;
}

}  // namespace fibershield
