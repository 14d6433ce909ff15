#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "fibershield/geometry/mesh.hpp"

namespace fibershield {

// Integral of 1/|r - r'| over a flat triangle and its gradient with respect to r.
struct KernelValue {
  double I = 0.0;
  Vec3 grad = Vec3::Zero();
};

// Closed form for a constant-density flat triangle (edge decomposition of the
// solid-angle / log terms). Valid everywhere except exactly on an edge line.
inline KernelValue triangle_integral_analytic(const Panel& p, const Vec3& r) {
  const Vec3& n = p.normal;
  const double w = (r - p.vertices[0]).dot(n);
  const Vec3 rho = r - w * n;
  const double aw = std::abs(w);
  double sum_f_t0 = 0.0, sum_beta = 0.0;
  Vec3 sum_uf = Vec3::Zero();
  for (int e = 0; e < 3; ++e) {
    const Vec3& a = p.vertices[static_cast<std::size_t>(e)];
    const Vec3& b = p.vertices[static_cast<std::size_t>((e + 1) % 3)];
    const Vec3 edge = b - a;
    const double len = edge.norm();
    const Vec3 lhat = edge / len;
    const Vec3 uhat = lhat.cross(n);
    const double t0 = (a - rho).dot(uhat);
    const double lm = (a - rho).dot(lhat);
    const double lp = (b - rho).dot(lhat);
    const double R0sq = t0 * t0 + w * w;
    const double Rp = (b - r).norm();
    const double Rm = (a - r).norm();
    double f;
    if (lp + lm >= 0.0) f = std::log((Rp + lp) / (Rm + lm));
    else f = std::log((Rm - lm) / (Rp - lp));
    if (!std::isfinite(f)) f = 0.0;  // observation on the edge line; t0 == 0 there
    const double beta = std::atan2(t0 * lp, R0sq + aw * Rp) - std::atan2(t0 * lm, R0sq + aw * Rm);
    sum_f_t0 += t0 * f;
    sum_beta += beta;
    sum_uf += uhat * f;
  }
  KernelValue kv;
  kv.I = sum_f_t0 - aw * sum_beta;
  const double sw = (w > 0.0) ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
  kv.grad = -sum_uf - sw * sum_beta * n;
  return kv;
}

// Symmetric 7-point rule, degree 5.
struct TriangleRule7 {
  static constexpr std::array<std::array<double, 3>, 7> bary = {{
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
      {0.059715871789770, 0.470142064105115, 0.470142064105115},
      {0.470142064105115, 0.059715871789770, 0.470142064105115},
      {0.470142064105115, 0.470142064105115, 0.059715871789770},
      {0.797426985353087, 0.101286507323456, 0.101286507323456},
      {0.101286507323456, 0.797426985353087, 0.101286507323456},
      {0.101286507323456, 0.101286507323456, 0.797426985353087},
  }};
  static constexpr std::array<double, 7> weight = {0.225,
                                                   0.132394152788506, 0.132394152788506, 0.132394152788506,
                                                   0.125939180544827, 0.125939180544827, 0.125939180544827};
};

inline KernelValue triangle_integral_rule7(const Panel& p, const Vec3& r) {
  KernelValue kv;
  for (std::size_t q = 0; q < 7; ++q) {
    const auto& l = TriangleRule7::bary[q];
    const Vec3 x = l[0] * p.vertices[0] + l[1] * p.vertices[1] + l[2] * p.vertices[2];
    const Vec3 d = r - x;
    const double R = d.norm();
    const double wq = TriangleRule7::weight[q] * p.area;
    kv.I += wq / R;
    kv.grad -= wq * d / (R * R * R);
  }
  return kv;
}

inline KernelValue triangle_integral_centroid(const Panel& p, const Vec3& r) {
  const Vec3 d = r - p.centroid;
  const double R = d.norm();
  KernelValue kv;
  kv.I = p.area / R;
  kv.grad = -p.area * d / (R * R * R);
  return kv;
}

// Distance thresholds in units of the panel diameter.
struct QuadratureTiers {
  double analytic = 4.0;   // closed form below this distance
  double rule7 = 20.0;     // 7-point rule below this, centroid beyond
};

inline KernelValue triangle_integral(const Panel& p, const Vec3& r, const QuadratureTiers& tiers = {}) {
  const double dist = (r - p.centroid).norm();
  if (dist < tiers.analytic * p.diameter) return triangle_integral_analytic(p, r);
  if (dist < tiers.rule7 * p.diameter) return triangle_integral_rule7(p, r);
  return triangle_integral_centroid(p, r);
}

// Potential-only variant, skipping the gradient where it is cheaper.
inline double triangle_potential_integral(const Panel& p, const Vec3& r, const QuadratureTiers& tiers = {}) {
  const double dist = (r - p.centroid).norm();
  if (dist < tiers.analytic * p.diameter) return triangle_integral_analytic(p, r).I;
  if (dist < tiers.rule7 * p.diameter) {
    double I = 0.0;
    for (std::size_t q = 0; q < 7; ++q) {
      const auto& l = TriangleRule7::bary[q];
      const Vec3 x = l[0] * p.vertices[0] + l[1] * p.vertices[1] + l[2] * p.vertices[2];
      I += TriangleRule7::weight[q] / (r - x).norm();
    }
    return I * p.area;
  }
  return p.area / dist;
}

// Euclidean distance from r to the closed triangle.
inline double point_triangle_distance(const Panel& p, const Vec3& r) {
  const Vec3& n = p.normal;
  const double w = (r - p.vertices[0]).dot(n);
  const Vec3 q = r - w * n;
  bool inside = true;
  for (int e = 0; e < 3; ++e) {
    const Vec3& a = p.vertices[static_cast<std::size_t>(e)];
    const Vec3& b = p.vertices[static_cast<std::size_t>((e + 1) % 3)];
    if ((b - a).cross(q - a).dot(n) < 0.0) inside = false;
  }
  if (inside) return std::abs(w);
  double best = std::numeric_limits<double>::infinity();
  for (int e = 0; e < 3; ++e) {
    const Vec3& a = p.vertices[static_cast<std::size_t>(e)];
    const Vec3& b = p.vertices[static_cast<std::size_t>((e + 1) % 3)];
    const Vec3 ab = b - a;
    const double t = std::clamp((r - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (r - (a + t * ab)).norm());
  }
  return best;
}

}  // namespace fibershield
