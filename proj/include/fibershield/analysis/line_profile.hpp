#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fibershield/constants.hpp"
#include "fibershield/error.hpp"
#include "fibershield/geometry/mesh.hpp"
#include "fibershield/trap/potential_map.hpp"

namespace fibershield {

struct LineProfile {
  Vec3 axis = Vec3::UnitY();
  std::vector<double> offsets;  // m
  std::vector<double> values;   // eV

  void validate() const {
    if (offsets.size() != values.size()) throw AnalysisError("invalid-profile", "offsets and values differ in length");
    if (offsets.size() < 5) throw AnalysisError("insufficient-samples", "a line profile needs at least 5 samples");
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      if (!std::isfinite(offsets[i]) || !std::isfinite(values[i]))
        throw AnalysisError("non-finite", "line profile contains non-finite entries");
      if (i > 0 && !(offsets[i] > offsets[i - 1]))
        throw AnalysisError("invalid-profile", "offsets must be strictly increasing");
    }
  }
};

// A map sampled on a line (exactly one grid axis with more than one point).
inline LineProfile profile_from_map(const PotentialMap& m) {
  m.validate();
  const std::vector<double>* axes[3] = {&m.grid.x, &m.grid.y, &m.grid.z};
  int along = -1;
  for (int a = 0; a < 3; ++a)
    if (axes[a]->size() > 1) {
      if (along >= 0) throw AnalysisError("invalid-profile", "map is not sampled on a single line");
      along = a;
    }
  if (along < 0) throw AnalysisError("insufficient-samples", "map holds a single point");
  LineProfile p;
  p.axis = Vec3::Unit(along);
  p.offsets = *axes[along];
  p.values = m.values;
  p.validate();
  return p;
}

// value ~ curvature * (x - vertex_offset)^2 + vertex_value
struct QuadraticFit {
  double curvature = 0.0;      // eV/m^2
  double vertex_offset = 0.0;  // m
  double vertex_value = 0.0;   // eV
  double max_abs_residual = 0.0;
  double window = 0.0;
  std::size_t samples = 0;
};

inline QuadraticFit quadratic_fit(const LineProfile& p, double half_window) {
  p.validate();
  if (!(half_window > 0.0)) throw AnalysisError("invalid-window", "fit window must be > 0");
  std::vector<std::size_t> in;
  const double tol = 1e-9 * half_window;
  for (std::size_t i = 0; i < p.offsets.size(); ++i)
    if (std::abs(p.offsets[i]) <= half_window + tol) in.push_back(i);
  if (in.size() < 5) throw AnalysisError("insufficient-samples", "fewer than 5 samples inside the fit window");

  // Centre and scale the abscissa so the Vandermonde columns are O(1).
  double mean = 0.0;
  for (auto i : in) mean += p.offsets[i];
  mean /= static_cast<double>(in.size());
  double scale = 0.0;
  for (auto i : in) scale = std::max(scale, std::abs(p.offsets[i] - mean));
  if (scale == 0.0) scale = 1.0;

  Eigen::MatrixXd A(static_cast<Eigen::Index>(in.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(in.size()));
  for (std::size_t k = 0; k < in.size(); ++k) {
    const double u = (p.offsets[in[k]] - mean) / scale;
    const auto r = static_cast<Eigen::Index>(k);
    A(r, 0) = 1.0;
    A(r, 1) = u;
    A(r, 2) = u * u;
    b[r] = p.values[in[k]];
  }
  const Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);

  QuadraticFit f;
  f.window = half_window;
  f.samples = in.size();
  f.curvature = c[2] / (scale * scale);
  const double lin = c[1] / scale;
  if (f.curvature != 0.0) {
    f.vertex_offset = mean - lin / (2.0 * f.curvature);
    f.vertex_value = c[0] - lin * lin / (4.0 * f.curvature);
  } else {
    f.vertex_offset = mean;
    f.vertex_value = c[0];
  }
  const Eigen::VectorXd r = A * c - b;
  f.max_abs_residual = r.cwiseAbs().maxCoeff();
  return f;
}

struct WellReport {
  bool is_double = false;
  std::vector<double> minima;  // offsets of the two wells, ascending
  double barrier = 0.0;        // eV, central maximum above the deeper minimum
  double minimum_offset = 0.0; // |offset| of the deepest minimum
  double maximum_offset = 0.0;
};

namespace detail {
// Vertex of the parabola through three neighbouring samples.
inline std::pair<double, double> refine_extremum(const LineProfile& p, std::size_t i) {
  if (i == 0 || i + 1 >= p.offsets.size()) return {p.offsets[i], p.values[i]};
  const double x0 = p.offsets[i - 1], x1 = p.offsets[i], x2 = p.offsets[i + 1];
  const double y0 = p.values[i - 1], y1 = p.values[i], y2 = p.values[i + 1];
  const double d1 = (y1 - y0) / (x1 - x0), d2 = (y2 - y1) / (x2 - x1);
  const double a = (d2 - d1) / (x2 - x0);
  if (a == 0.0) return {x1, y1};
  const double b = d1 - a * (x0 + x1);
  const double xv = std::clamp(-b / (2.0 * a), x0, x2);
  const double yv = y1 + (xv - x1) * (d1 + a * (xv - x0));
  return {xv, yv};
}
}  // namespace detail

// Two minima count as a double well only when the maximum between them rises at
// least `prominence` (eV) above the shallower one.
inline WellReport detect_double_well(const LineProfile& p, double prominence = 1e-3) {
  p.validate();
  const auto& v = p.values;
  std::vector<std::size_t> minima;
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if (v[i] < v[i - 1] && v[i] < v[i + 1]) minima.push_back(i);
  WellReport w;
  if (minima.size() < 2) return w;

  std::size_t deepest = minima.front();
  for (auto i : minima)
    if (v[i] < v[deepest]) deepest = i;

  double best = -1.0;
  std::size_t partner = deepest, peak = deepest;
  for (auto j : minima) {
    if (j == deepest) continue;
    const std::size_t lo = std::min(j, deepest), hi = std::max(j, deepest);
    const auto it = std::max_element(v.begin() + static_cast<std::ptrdiff_t>(lo), v.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    const double saddle = *it - std::max(v[j], v[deepest]);
    if (saddle > best) {
      best = saddle;
      partner = j;
      peak = static_cast<std::size_t>(it - v.begin());
    }
  }
  if (best < prominence) return w;

  const auto [xd, yd] = detail::refine_extremum(p, deepest);
  const auto [xp, yp] = detail::refine_extremum(p, partner);
  const auto [xm, ym] = detail::refine_extremum(p, peak);
  w.is_double = true;
  w.minima = {std::min(xd, xp), std::max(xd, xp)};
  w.barrier = ym - yd;
  w.minimum_offset = std::abs(xd);
  w.maximum_offset = xm;
  return w;
}

// U = curvature * x^2 (eV) = m w^2 x^2 / 2  =>  w = sqrt(2 e curvature / m).
inline double secular_frequency(double curvature, double mass) {
  if (!(curvature > 0.0)) throw AnalysisError("non-confining", "curvature must be > 0 for a confining well");
  if (!(mass > 0.0)) throw AnalysisError("invalid-argument", "mass must be > 0");
  return std::sqrt(2.0 * constants::elementary_charge * curvature / mass);
}
inline double secular_frequency(const QuadraticFit& f, double mass) { return secular_frequency(f.curvature, mass); }

inline double curvature_for_frequency(double omega, double mass) {
  return 0.5 * mass * omega * omega / constants::elementary_charge;
}

}  // namespace fibershield
