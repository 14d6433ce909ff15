#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "fibershield/heating/noise.hpp"

namespace fibershield {

struct HeatingCurve {
  std::string label;
  Shielding shielding = Shielding::unshielded;
  double exposed_radius = 0.0;    // m; fiber radius when nothing covers the face
  std::vector<double> lengths;    // cavity length L = 2d, m
  std::vector<double> rates;      // phonons/ms
  std::vector<NoiseResult> details;

  void validate() const {
    if (lengths.size() != rates.size()) throw AnalysisError("invalid-curve", "lengths and rates differ in size");
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      if (i > 0 && !(lengths[i] > lengths[i - 1])) throw AnalysisError("invalid-curve", "lengths must increase");
      if (!(rates[i] > 0.0)) throw AnalysisError("nonpositive-values", "heating rates must be > 0");
    }
  }
};

inline double exposed_radius(const TrapScenario& s) {
  return s.shielding == Shielding::gold_mask ? s.mask->exposed_radius : s.fiber_radius();
}

inline void check_length_span(const std::vector<double>& lengths) {
  if (lengths.size() < 4) throw AnalysisError("insufficient-points", "need at least 4 cavity lengths");
  const auto [lo, hi] = std::minmax_element(lengths.begin(), lengths.end());
  if (!(*lo > 0.0) || *hi < 2.0 * *lo) throw AnalysisError("insufficient-points", "lengths must span at least an octave");
}

// One full pipeline run per length; rows come out sorted by length.
inline HeatingCurve heating_vs_length(const TrapScenario& tmpl, std::vector<double> lengths, const HeatingOptions& opt = {},
                                      std::string label = {}) {
  check_length_span(lengths);
  std::sort(lengths.begin(), lengths.end());
  HeatingCurve c;
  c.label = label.empty() ? std::string(to_string(tmpl.shielding)) : std::move(label);
  c.shielding = tmpl.shielding;
  c.exposed_radius = exposed_radius(tmpl);
  for (double L : lengths) {
    TrapScenario s = tmpl;
    s.set_cavity_length(L);
    const NoiseResult r = scenario_heating(s, opt);
    c.lengths.push_back(L);
    c.rates.push_back(r.rate);
    c.details.push_back(r);
  }
  c.validate();
  return c;
}

// rate = prefactor * d^-alpha, least squares on (ln d, ln rate).
struct PowerLawFit {
  double alpha = 0.0;
  double alpha_stderr = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

inline PowerLawFit fit_power_law(const std::vector<double>& distance, const std::vector<double>& rate) {
  if (distance.size() != rate.size()) throw AnalysisError("invalid-curve", "size mismatch");
  if (distance.size() < 4) throw AnalysisError("insufficient-points", "power-law fit needs at least 4 points");
  const std::size_t n = distance.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(distance[i] > 0.0) || !(rate[i] > 0.0)) throw AnalysisError("nonpositive-values", "power-law fit needs positive data");
    x[i] = std::log(distance[i]);
    y[i] = std::log(rate[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw AnalysisError("insufficient-points", "all distances coincide");
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (my + slope * (x[i] - mx));
    ssr += r * r;
  }
  PowerLawFit f;
  f.points = n;
  f.alpha = -slope;
  f.alpha_stderr = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  f.prefactor = std::exp(my - slope * mx);
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return f;
}

// Ion-dielectric distance d = L/2 as abscissa; the exponent is the same either way.
inline PowerLawFit fit_power_law(const HeatingCurve& c) {
  c.validate();
  std::vector<double> d(c.lengths.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = 0.5 * c.lengths[i];
  return fit_power_law(d, c.rates);
}

inline double extrapolate_heating(double rate_ref, double length_ref, double length_target, double alpha) {
  if (!(rate_ref > 0.0) || !(length_ref > 0.0) || !(length_target > 0.0))
    throw ConfigError("invalid-argument", "extrapolation inputs must be positive");
  return rate_ref * std::pow(length_ref / length_target, alpha);
}

// Square dielectric slab |x|,|y| < half, -depth < z < 0, panels graded towards the origin.
inline SurfaceMesh dielectric_slab_mesh(double half, double depth, double h0, double growth, double eps_r) {
  SurfaceMesh m;
  Body b;
  b.name = "slab";
  b.kind = BodyKind::dielectric;
  b.assembly = 0;
  b.eps_in = eps_r;
  const int id = m.add_body(b);
  const auto pos = graded_nodes(half, h0, growth, half / 3.0);
  std::vector<double> xy;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) xy.push_back(-*it);
  for (std::size_t i = 1; i < pos.size(); ++i) xy.push_back(pos[i]);
  const auto zs = graded_nodes(depth, h0, growth, depth / 3.0);
  std::vector<double> z(zs.rbegin(), zs.rend());
  for (auto& v : z) v = -v;
  mesh_box(m, id, {xy, xy, z});
  return m;
}

// Planar control: an ion at height d over a slab much wider and deeper than d.
// One mesh serves all distances, so the factorization is reused.
struct SlabControl {
  double half = 4e-3;
  double depth = 4e-3;
  double panel = 10e-6;   // panel size at the foot of the ion
  double growth = 1.4;
};

inline HeatingCurve slab_heating_curve(const TrapScenario& material, std::vector<double> lengths,
                                       const HeatingOptions& opt = {}, const SlabControl& slab = {}) {
  check_length_span(lengths);
  std::sort(lengths.begin(), lengths.end());
  auto mesh = std::make_shared<const SurfaceMesh>(
      dielectric_slab_mesh(slab.half, slab.depth, slab.panel, slab.growth, material.relative_permittivity));
  BoundarySolver solver(mesh, opt.solver);
  HeatingCurve c;
  c.label = "slab";
  c.exposed_radius = slab.half;
  for (double L : lengths) {
    const double d = 0.5 * L;
    const auto& q = opt.quadrature;
    const double reach = std::min(slab.half, slab.depth) * 0.95;
    const VolumeQuadrature vq = cylinder_quadrature(reach, 0.0, -1, reach, q.first_cell * d, q,
                                                    q.first_cell * d);
    const double delta = opt.delta_ratio * d;
    const DeltaField df = delta_field(solver, Vec3(0.0, 0.0, d), Vec3::UnitZ(), delta, vq, opt.check_linearity, opt.eval);
    NoiseResult r;
    r.omega = material.axial_secular_frequency;
    r.integral = df.integral;
    r.delta = delta;
    r.psd = noise_psd(df.integral, r.omega, material.temperature, material.relative_permittivity, material.loss_tangent,
                      delta);
    r.rate = heating_rate(r.psd, r.omega, material.ion_mass);
    r.linearity_change = df.linearity_change;
    r.quadrature_points = vq.points.size();
    r.quadrature_volume = vq.volume();
    r.panels = mesh->size();
    c.lengths.push_back(L);
    c.rates.push_back(r.rate);
    c.details.push_back(r);
  }
  c.validate();
  return c;
}

}  // namespace fibershield
