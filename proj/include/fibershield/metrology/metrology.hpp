#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "fibershield/constants.hpp"
#include "fibershield/error.hpp"

namespace fibershield {

// ---- fiber alignment from imaged edge points ------------------------------------

struct EdgePoint {
  double axial = 0.0;       // m, along the nominal fiber axis
  double transverse = 0.0;  // m
  double sigma = 0.0;       // m, isotropic position uncertainty
};

// [fiber][edge]: fiber 0 = left, 1 = right; edge 0 = upper, 1 = lower.
struct EdgePointSet {
  std::array<std::array<std::vector<EdgePoint>, 2>, 2> edges;

  void validate() const {
    for (const auto& f : edges)
      for (const auto& e : f) {
        if (e.size() < 2) throw AnalysisError("insufficient-points", "each edge needs at least 2 points");
        for (const auto& p : e)
          if (!std::isfinite(p.axial) || !std::isfinite(p.transverse) || !std::isfinite(p.sigma) || p.sigma < 0.0)
            throw AnalysisError("non-finite", "edge points must be finite with sigma >= 0");
      }
  }
};

// Weighted total-least-squares line through a point cloud. The covariance is that
// of the normal offset at the weighted centroid and the direction angle, which are
// uncorrelated there.
struct EdgeLine {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  Eigen::Vector2d direction = Eigen::Vector2d::UnitX();  // unit, positive axial component
  double var_offset = 0.0;  // m^2
  double var_angle = 0.0;   // rad^2

  Eigen::Vector2d normal() const { return {-direction.y(), direction.x()}; }
};

inline EdgeLine fit_edge_line(const std::vector<EdgePoint>& pts) {
  if (pts.size() < 2) throw AnalysisError("insufficient-points", "edge fit needs at least 2 points");
  bool weighted = true;
  for (const auto& p : pts)
    if (!(p.sigma > 0.0)) weighted = false;
  std::vector<double> w(pts.size());
  double W = 0.0;
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    w[i] = weighted ? 1.0 / (pts[i].sigma * pts[i].sigma) : 1.0;
    W += w[i];
    c += w[i] * Eigen::Vector2d(pts[i].axial, pts[i].transverse);
  }
  c /= W;
  Eigen::Matrix2d S = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Eigen::Vector2d d = Eigen::Vector2d(pts[i].axial, pts[i].transverse) - c;
    S += w[i] * d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
  Eigen::Vector2d u = es.eigenvectors().col(1);
  const double spread = es.eigenvalues()(1);
  if (!(spread > 0.0) || es.eigenvalues()(0) >= spread * (1.0 - 1e-12))
    throw AnalysisError("collinear-degenerate", "edge points do not define a direction");
  if (u.x() < 0.0) u = -u;
  if (std::abs(u.x()) < 1e-3) throw AnalysisError("collinear-degenerate", "edge line is perpendicular to the fiber axis");

  EdgeLine l;
  l.centroid = c;
  l.direction = u;
  if (weighted) {
    l.var_offset = 1.0 / W;
    l.var_angle = 1.0 / spread;
  } else {
    // Scatter-based estimate when no per-point uncertainty is given.
    const double s2 = pts.size() > 2 ? es.eigenvalues()(0) / static_cast<double>(pts.size() - 2) : 0.0;
    l.var_offset = s2 / W;
    l.var_angle = s2 / spread;
  }
  return l;
}

struct AlignmentResult {
  double offset = 0.0;        // m, signed transverse distance right axis minus left axis
  double offset_sigma = 0.0;
  double angle = 0.0;         // rad, signed angle from the left to the right axis
  double angle_sigma = 0.0;
};

namespace detail {

struct Axis {
  Eigen::Vector2d point, direction;
};

// Angle bisector between two nearly parallel edges: points with equal and opposite
// signed distance to both lines.
inline Axis bisector(const EdgeLine& a, const EdgeLine& b) {
  const Eigen::Vector2d na = a.normal(), nb = b.normal();
  const Eigen::Vector2d n = na + nb;
  const double rhs = na.dot(a.centroid) + nb.dot(b.centroid);
  Axis ax;
  ax.direction = (a.direction + b.direction).normalized();
  const Eigen::Vector2d mid = 0.5 * (a.centroid + b.centroid);
  ax.point = mid + n * ((rhs - n.dot(mid)) / n.squaredNorm());
  return ax;
}

inline double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

inline Eigen::Vector2d line_hit(const Axis& ax, const Eigen::Vector2d& p, const Eigen::Vector2d& dir) {
  // ax.point + s ax.direction = p + t dir
  const double s = cross2(p - ax.point, dir) / cross2(ax.direction, dir);
  return ax.point + s * ax.direction;
}

struct AlignmentCore {
  double offset, angle;
};

inline AlignmentCore alignment_from_lines(const std::array<std::array<EdgeLine, 2>, 2>& lines, double tip_left,
                                          double tip_right) {
  const Axis L = bisector(lines[0][0], lines[0][1]);
  const Axis R = bisector(lines[1][0], lines[1][1]);
  const Eigen::Vector2d mean_dir = (L.direction + R.direction).normalized();
  const Eigen::Vector2d perp(-mean_dir.y(), mean_dir.x());
  // Gap midplane: halfway between the innermost imaged points of the two fibers.
  const Eigen::Vector2d mid = 0.5 * (L.point + (tip_left - mean_dir.dot(L.point)) * mean_dir + R.point +
                                     (tip_right - mean_dir.dot(R.point)) * mean_dir);
  const Eigen::Vector2d ql = line_hit(L, mid, perp), qr = line_hit(R, mid, perp);
  return {(qr - ql).dot(perp), std::atan2(cross2(L.direction, R.direction), L.direction.dot(R.direction))};
}

}  // namespace detail

inline AlignmentResult fit_alignment(const EdgePointSet& set) {
  set.validate();
  std::array<std::array<EdgeLine, 2>, 2> lines;
  for (int f = 0; f < 2; ++f)
    for (int e = 0; e < 2; ++e) lines[f][e] = fit_edge_line(set.edges[f][e]);

  const Eigen::Vector2d dir = (lines[0][0].direction + lines[0][1].direction + lines[1][0].direction +
                               lines[1][1].direction).normalized();
  double tip_left = -1e300, tip_right = 1e300;
  for (int e = 0; e < 2; ++e) {
    for (const auto& p : set.edges[0][e]) tip_left = std::max(tip_left, dir.dot(Eigen::Vector2d(p.axial, p.transverse)));
    for (const auto& p : set.edges[1][e]) tip_right = std::min(tip_right, dir.dot(Eigen::Vector2d(p.axial, p.transverse)));
  }

  const auto core = detail::alignment_from_lines(lines, tip_left, tip_right);
  AlignmentResult r;
  r.offset = core.offset;
  r.angle = core.angle;

  // Linear propagation: each line has an independent normal shift and rotation about
  // its centroid; the Jacobian comes from central differences.
  double var_off = 0.0, var_ang = 0.0;
  for (int f = 0; f < 2; ++f)
    for (int e = 0; e < 2; ++e)
      for (int k = 0; k < 2; ++k) {
        const double var = k == 0 ? lines[f][e].var_offset : lines[f][e].var_angle;
        if (var <= 0.0) continue;
        const double h = std::sqrt(var) * 1e-3;
        detail::AlignmentCore plus{}, minus{};
        for (int sgn : {1, -1}) {
          auto pert = lines;
          EdgeLine& l = pert[f][e];
          if (k == 0) {
            l.centroid += sgn * h * l.normal();
          } else {
            const double a = std::atan2(l.direction.y(), l.direction.x()) + sgn * h;
            l.direction = Eigen::Vector2d(std::cos(a), std::sin(a));
          }
          (sgn > 0 ? plus : minus) = detail::alignment_from_lines(pert, tip_left, tip_right);
        }
        const double jo = (plus.offset - minus.offset) / (2.0 * h);
        const double ja = (plus.angle - minus.angle) / (2.0 * h);
        var_off += jo * jo * var;
        var_ang += ja * ja * var;
      }
  r.offset_sigma = std::sqrt(var_off);
  r.angle_sigma = std::sqrt(var_ang);
  return r;
}

// ---- cavity finesse ---------------------------------------------------------------

// Free spectral range from the mean spacing of successive resonance markers (same
// unit as the linewidth, e.g. scan voltage or MHz).
inline double finesse_from_scan(const std::vector<double>& fsr_markers, double fwhm) {
  if (fsr_markers.size() < 2) throw AnalysisError("insufficient-points", "need at least two FSR markers");
  if (!(fwhm > 0.0)) throw AnalysisError("nonpositive-values", "linewidth must be > 0");
  const double fsr = (fsr_markers.back() - fsr_markers.front()) / static_cast<double>(fsr_markers.size() - 1);
  if (!(fsr > 0.0)) throw AnalysisError("nonpositive-values", "FSR markers must increase");
  return fsr / fwhm;
}

// Round-trip loss 2 pi / F in ppm.
inline double loss_from_finesse(double finesse) {
  if (!(finesse > 0.0)) throw AnalysisError("nonpositive-values", "finesse must be > 0");
  return 2.0 * constants::pi / finesse * 1e6;
}
inline double finesse_from_loss(double loss_ppm) {
  if (!(loss_ppm > 0.0)) throw AnalysisError("nonpositive-values", "loss must be > 0");
  return 2.0 * constants::pi / (loss_ppm * 1e-6);
}

// ---- coatings and charging ----------------------------------------------------------

inline constexpr double gold_resistivity = 2.44e-8;  // Ohm m

// Non-magnetic conductor: delta = sqrt(2 rho / (2 pi f mu0)).
inline double skin_depth(double resistivity, double frequency) {
  if (!(resistivity > 0.0) || !(frequency > 0.0)) throw ConfigError("invalid-argument", "skin_depth needs positive inputs");
  return std::sqrt(2.0 * resistivity / (2.0 * constants::pi * frequency * constants::vacuum_permeability));
}

// Charge areal density reached (elementary charges per um^2) over `duration` seconds.
inline double equilibrium_current_density(double charges_per_um2, double duration) {
  if (!(charges_per_um2 >= 0.0) || !(duration > 0.0))
    throw ConfigError("invalid-argument", "charge must be >= 0 and duration > 0");
  return charges_per_um2 * constants::elementary_charge / 1e-12 / duration;
}

// ---- heating rate from phonon number vs delay -----------------------------------

struct TracePoint {
  double delay_ms = 0.0;
  double nbar = 0.0;
  double sigma = 0.0;
};

struct TraceFit {
  double slope = 0.0;  // phonons/ms
  double slope_sigma = 0.0;
  double intercept = 0.0;
  double chi2 = 0.0;
  std::size_t points = 0;
};

// Weighted least squares nbar = intercept + slope * delay. Without per-point
// uncertainties the fit is unweighted and the error comes from the scatter.
inline TraceFit heating_rate_from_trace(const std::vector<TracePoint>& trace) {
  if (trace.size() < 3) throw AnalysisError("insufficient-points", "trace fit needs at least 3 points");
  bool weighted = true;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& p = trace[i];
    if (!std::isfinite(p.delay_ms) || !std::isfinite(p.nbar) || !std::isfinite(p.sigma) || p.delay_ms < 0.0)
      throw AnalysisError("non-finite", "trace entries must be finite with delay >= 0");
    if (i > 0 && !(p.delay_ms > trace[i - 1].delay_ms)) throw AnalysisError("invalid-trace", "delays must increase");
    if (!(p.sigma > 0.0)) weighted = false;
  }
  double W = 0.0, sx = 0.0, sy = 0.0;
  for (const auto& p : trace) {
    const double w = weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
    W += w;
    sx += w * p.delay_ms;
    sy += w * p.nbar;
  }
  const double mx = sx / W, my = sy / W;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : trace) {
    const double w = weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
    sxx += w * (p.delay_ms - mx) * (p.delay_ms - mx);
    sxy += w * (p.delay_ms - mx) * (p.nbar - my);
  }
  TraceFit f;
  f.points = trace.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (const auto& p : trace) {
    const double w = weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
    const double r = p.nbar - (f.intercept + f.slope * p.delay_ms);
    f.chi2 += w * r * r;
  }
  f.slope_sigma = weighted ? std::sqrt(1.0 / sxx) : std::sqrt(f.chi2 / static_cast<double>(trace.size() - 2) / sxx);
  return f;
}

}  // namespace fibershield
