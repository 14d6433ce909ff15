#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/IterativeSolvers>

#include "fibershield/constants.hpp"
#include "fibershield/error.hpp"
#include "fibershield/field/triangle_kernel.hpp"
#include "fibershield/geometry/mesh.hpp"
#include "fibershield/parallel.hpp"

namespace fibershield {

struct PointCharge {
  Vec3 position = Vec3::Zero();
  double charge = 0.0;  // C
};

struct DielectricPair {
  double eps_in = 1.0;
  double eps_out = 1.0;
};

struct BoundaryCondition {
  std::map<std::string, double> potentials;           // electrode -> V
  std::map<std::string, DielectricPair> dielectrics;  // body name -> override of the mesh values
  std::vector<PointCharge> charges;
  // Dirichlet data on individual panels (normally dielectric ones), e.g. a charged fiber surface.
  std::map<std::size_t, double> panel_potentials;

  static BoundaryCondition grounded(const SurfaceMesh& mesh) {
    BoundaryCondition bc;
    for (const auto& e : mesh.electrodes()) bc.potentials[e] = 0.0;
    return bc;
  }
};

struct SolverOptions {
  double tolerance = 1e-3;            // relative collocation residual
  QuadratureTiers tiers;
  std::size_t direct_limit = 20000;   // dense LU up to this many panels
  bool force_iterative = false;
  int max_iterations = 1000;
  int restart = 200;
  double iterative_tolerance = 1e-10;
  std::size_t residual_rows = 400;    // rows re-assembled to verify the solve (all if fewer)
  std::size_t max_cached_factorizations = 2;
  std::size_t threads = 0;
};

struct EvalOptions {
  bool near_field = true;       // closed-form panel integrals at any distance
  double cutoff = 0.1;          // in panel diameters, enforced when near_field is off
  QuadratureTiers tiers;
  std::size_t threads = 0;
};

struct SolverDiagnostics {
  double residual = 0.0;        // max relative collocation residual over checked rows
  double condition_estimate = 0.0;
  bool iterative = false;
  int iterations = 0;
  std::size_t panels = 0;
};

struct FieldSolution {
  std::shared_ptr<const SurfaceMesh> mesh;
  Eigen::VectorXd sigma;               // total (free + bound) surface charge density, C/m^2
  std::vector<PointCharge> charges;
  SolverDiagnostics diagnostics;

  const SurfaceMesh& panels() const { return *mesh; }
};

namespace detail {

inline double external_potential(const std::vector<PointCharge>& charges, const Vec3& r) {
  double v = 0.0;
  for (const auto& q : charges) v += constants::coulomb_constant * q.charge / (r - q.position).norm();
  return v;
}

inline Vec3 external_field(const std::vector<PointCharge>& charges, const Vec3& r) {
  Vec3 e = Vec3::Zero();
  for (const auto& q : charges) {
    const Vec3 d = r - q.position;
    const double R = d.norm();
    e += constants::coulomb_constant * q.charge * d / (R * R * R);
  }
  return e;
}

struct RowPlan {
  std::vector<char> dirichlet;  // per panel
  std::vector<double> lambda;   // (eps_in - eps_out)/(eps_in + eps_out) for dielectric rows
  std::vector<double> scale;    // row scaling of dielectric rows

  std::string key() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto mix = [&h](const void* data, std::size_t n) {
      const auto* c = static_cast<const unsigned char*>(data);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= c[i];
        h *= 0x100000001b3ull;
      }
    };
    mix(dirichlet.data(), dirichlet.size());
    mix(lambda.data(), lambda.size() * sizeof(double));
    return std::to_string(h) + ":" + std::to_string(dirichlet.size());
  }
};

}  // namespace detail

// Collocation panel solver. Unknowns are x_j = sigma_j / eps0 on every panel.
// Conductor rows impose the potential at the centroid; dielectric rows impose
// continuity of the normal displacement with the principal-value field.
// Factorizations are cached per row pattern so repeated solves with different
// potentials or point charges reuse one LU.
class BoundarySolver {
 public:
  explicit BoundarySolver(std::shared_ptr<const SurfaceMesh> mesh, SolverOptions options = {})
      : mesh_(std::move(mesh)), options_(options) {
    if (!mesh_ || mesh_->empty()) throw ConfigError("empty-mesh", "cannot solve on an empty mesh");
  }
  explicit BoundarySolver(const SurfaceMesh& mesh, SolverOptions options = {})
      : BoundarySolver(std::make_shared<const SurfaceMesh>(mesh), options) {}

  const SurfaceMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const SurfaceMesh> mesh_ptr() const { return mesh_; }
  const SolverOptions& options() const { return options_; }

  FieldSolution solve(const BoundaryCondition& bc) {
    const detail::RowPlan plan = make_plan(bc);
    Factorization& fac = factorization(plan);
    const Eigen::VectorXd b = rhs(plan, bc);

    FieldSolution sol;
    sol.mesh = mesh_;
    sol.charges = bc.charges;
    sol.diagnostics.panels = mesh_->size();
    sol.diagnostics.condition_estimate = fac.condition;
    sol.diagnostics.iterative = fac.iterative;

    Eigen::VectorXd x;
    if (fac.iterative) {
      Eigen::GMRES<Eigen::MatrixXd, Eigen::IdentityPreconditioner> gmres;
      gmres.setTolerance(options_.iterative_tolerance);
      gmres.setMaxIterations(options_.max_iterations);
      gmres.set_restart(options_.restart);
      gmres.compute(fac.matrix);
      x = gmres.solve(b);
      sol.diagnostics.iterations = static_cast<int>(gmres.iterations());
      if (gmres.info() != Eigen::Success || !x.allFinite())
        throw SolverError("no-convergence", "GMRES did not converge within " +
                                                std::to_string(options_.max_iterations) + " iterations");
    } else {
      x = fac.lu->solve(b);
      if (!x.allFinite()) throw SolverError("singular-system", "LU solve produced non-finite densities");
    }

    sol.diagnostics.residual = residual(plan, b, x);
    if (!(sol.diagnostics.residual <= options_.tolerance))
      throw SolverError("no-convergence", "collocation residual " + std::to_string(sol.diagnostics.residual) +
                                               " exceeds tolerance " + std::to_string(options_.tolerance));
    sol.sigma = constants::vacuum_permittivity * x;
    return sol;
  }

  void clear_cache() {
    std::lock_guard lock(mutex_);
    cache_.clear();
  }

 private:
  struct Factorization {
    Eigen::MatrixXd matrix;  // overwritten by the LU factors for the direct path
    std::unique_ptr<Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>>> lu;
    bool iterative = false;
    double condition = 0.0;
  };

  detail::RowPlan make_plan(const BoundaryCondition& bc) const {
    const SurfaceMesh& m = *mesh_;
    for (const auto& e : m.electrodes())
      if (!bc.potentials.count(e)) throw ConfigError("incomplete-bc", "no potential for electrode '" + e + "'");
    for (const auto& [e, v] : bc.potentials) {
      const auto names = m.electrodes();
      if (std::find(names.begin(), names.end(), e) == names.end())
        throw ConfigError("incomplete-bc", "unknown electrode '" + e + "'");
      if (!std::isfinite(v)) throw ConfigError("incomplete-bc", "non-finite potential on '" + e + "'");
    }
    for (const auto& [name, pair] : bc.dielectrics) {
      if (m.find_body(name) < 0) throw ConfigError("incomplete-bc", "unknown dielectric body '" + name + "'");
      if (!(pair.eps_in >= 1.0) || !(pair.eps_out >= 1.0))
        throw ConfigError("incomplete-bc", "permittivities must be >= 1");
    }
    for (const auto& [idx, v] : bc.panel_potentials)
      if (idx >= m.size() || !std::isfinite(v)) throw ConfigError("incomplete-bc", "bad panel potential entry");

    detail::RowPlan plan;
    const std::size_t n = m.size();
    plan.dirichlet.assign(n, 0);
    plan.lambda.assign(n, 0.0);
    plan.scale.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Panel& p = m[i];
      const Body& body = m.body_of(p);
      if (body.kind == BodyKind::conductor || bc.panel_potentials.count(i)) {
        plan.dirichlet[i] = 1;
        continue;
      }
      double ein = body.eps_in, eout = body.eps_out;
      if (const auto it = bc.dielectrics.find(body.name); it != bc.dielectrics.end()) {
        ein = it->second.eps_in;
        eout = it->second.eps_out;
      }
      if (!(ein >= 1.0) || !(eout >= 1.0)) throw ConfigError("incomplete-bc", "permittivities must be >= 1");
      plan.lambda[i] = (ein - eout) / (ein + eout);
      plan.scale[i] = std::sqrt(p.area);
    }
    return plan;
  }

  double entry(const detail::RowPlan& plan, std::size_t i, std::size_t j) const {
    const SurfaceMesh& m = *mesh_;
    const Panel& pi = m[i];
    const Panel& pj = m[j];
    constexpr double inv4pi = 1.0 / (4.0 * constants::pi);
    if (plan.dirichlet[i]) return triangle_potential_integral(pj, pi.centroid, options_.tiers) * inv4pi;
    if (i == j) return 0.5 * plan.scale[i];
    const KernelValue kv = triangle_integral(pj, pi.centroid, options_.tiers);
    return plan.scale[i] * plan.lambda[i] * pi.normal.dot(kv.grad) * inv4pi;
  }

  Eigen::MatrixXd assemble(const detail::RowPlan& plan) const {
    const std::size_t n = mesh_->size();
    Eigen::MatrixXd A(n, n);
    // Column-major storage: fill column blocks so each thread writes contiguous memory.
    parallel_for(
        n,
        [&](std::size_t j) {
          for (std::size_t i = 0; i < n; ++i)
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = entry(plan, i, j);
        },
        options_.threads);
    return A;
  }

  Eigen::VectorXd rhs(const detail::RowPlan& plan, const BoundaryCondition& bc) const {
    const SurfaceMesh& m = *mesh_;
    const std::size_t n = m.size();
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Panel& p = m[i];
      if (plan.dirichlet[i]) {
        double v;
        if (const auto it = bc.panel_potentials.find(i); it != bc.panel_potentials.end()) v = it->second;
        else v = bc.potentials.at(m.body_of(p).electrode);
        b[static_cast<Eigen::Index>(i)] = v - detail::external_potential(bc.charges, p.centroid);
      } else {
        const Vec3 e = detail::external_field(bc.charges, p.centroid);
        b[static_cast<Eigen::Index>(i)] = plan.scale[i] * plan.lambda[i] * p.normal.dot(e);
      }
    }
    return b;
  }

  double residual(const detail::RowPlan& plan, const Eigen::VectorXd& b, const Eigen::VectorXd& x) const {
    const std::size_t n = mesh_->size();
    const std::size_t rows = std::min(n, std::max<std::size_t>(1, options_.residual_rows));
    std::vector<double> rel(rows, 0.0);
    const double bscale = b.cwiseAbs().maxCoeff();
    parallel_for(
        rows,
        [&](std::size_t k) {
          const std::size_t i = (rows == n) ? k : (k * n) / rows;
          double acc = 0.0, mag = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            const double t = entry(plan, i, j) * x[static_cast<Eigen::Index>(j)];
            acc += t;
            mag += std::abs(t);
          }
          const double bi = b[static_cast<Eigen::Index>(i)];
          const double denom = std::max({mag, std::abs(bi), 1e-300 + 1e-12 * bscale});
          rel[k] = std::abs(acc - bi) / denom;
        },
        options_.threads);
    return *std::max_element(rel.begin(), rel.end());
  }

  Factorization& factorization(const detail::RowPlan& plan) {
    const std::string key = plan.key();
    std::lock_guard lock(mutex_);
    for (auto it = cache_.begin(); it != cache_.end(); ++it)
      if (it->first == key) {
        cache_.splice(cache_.begin(), cache_, it);
        return *cache_.front().second;
      }
    while (!cache_.empty() && cache_.size() >= std::max<std::size_t>(1, options_.max_cached_factorizations))
      cache_.pop_back();

    auto fac = std::make_unique<Factorization>();
    fac->matrix = assemble(plan);
    if (!fac->matrix.allFinite()) throw SolverError("singular-system", "non-finite matrix entries (coincident panels?)");
    const std::size_t n = mesh_->size();
    if (options_.force_iterative || n > options_.direct_limit) {
      fac->iterative = true;
      fac->condition = std::numeric_limits<double>::quiet_NaN();
    } else {
      fac->lu = std::make_unique<Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>>>(fac->matrix);
      const double rc = fac->lu->rcond();
      if (!(rc > 1e-14)) throw SolverError("singular-system", "system matrix is singular (rcond " + std::to_string(rc) + ")");
      fac->condition = 1.0 / rc;
    }
    cache_.emplace_front(key, std::move(fac));
    return *cache_.front().second;
  }

  std::shared_ptr<const SurfaceMesh> mesh_;
  SolverOptions options_;
  std::mutex mutex_;
  std::list<std::pair<std::string, std::unique_ptr<Factorization>>> cache_;
};

inline FieldSolution solve(const SurfaceMesh& mesh, const BoundaryCondition& bc, const SolverOptions& options = {}) {
  BoundarySolver solver(mesh, options);
  return solver.solve(bc);
}

namespace detail {

inline void check_cutoff(const SurfaceMesh& m, const Vec3& r, const EvalOptions& opt) {
  if (opt.near_field) return;
  for (const auto& p : m.panels()) {
    const double limit = opt.cutoff * p.diameter;
    if ((r - p.centroid).norm() > p.diameter + limit) continue;
    if (point_triangle_distance(p, r) < limit)
      throw SolverError("near-singular-evaluation",
                        "evaluation point closer than the near-field cutoff to a panel; enable near-field quadrature");
  }
}

}  // namespace detail

inline std::vector<double> evaluate_potential(const FieldSolution& sol, const std::vector<Vec3>& points,
                                              const EvalOptions& opt = {}) {
  const SurfaceMesh& m = *sol.mesh;
  std::vector<double> out(points.size());
  constexpr double inv4pi = 1.0 / (4.0 * constants::pi);
  parallel_for(
      points.size(),
      [&](std::size_t k) {
        const Vec3& r = points[k];
        detail::check_cutoff(m, r, opt);
        double acc = 0.0;
        for (std::size_t j = 0; j < m.size(); ++j)
          acc += sol.sigma[static_cast<Eigen::Index>(j)] * triangle_potential_integral(m[j], r, opt.tiers);
        out[k] = acc * inv4pi / constants::vacuum_permittivity + detail::external_potential(sol.charges, r);
      },
      opt.threads);
  return out;
}

inline std::vector<Vec3> evaluate_field(const FieldSolution& sol, const std::vector<Vec3>& points,
                                        const EvalOptions& opt = {}) {
  const SurfaceMesh& m = *sol.mesh;
  std::vector<Vec3> out(points.size());
  constexpr double inv4pi = 1.0 / (4.0 * constants::pi);
  parallel_for(
      points.size(),
      [&](std::size_t k) {
        const Vec3& r = points[k];
        detail::check_cutoff(m, r, opt);
        Vec3 acc = Vec3::Zero();
        for (std::size_t j = 0; j < m.size(); ++j)
          acc -= sol.sigma[static_cast<Eigen::Index>(j)] * triangle_integral(m[j], r, opt.tiers).grad;
        out[k] = acc * (inv4pi / constants::vacuum_permittivity) + detail::external_field(sol.charges, r);
      },
      opt.threads);
  return out;
}

inline double panel_charge(const FieldSolution& sol, std::size_t i) {
  return sol.sigma[static_cast<Eigen::Index>(i)] * (*sol.mesh)[i].area;
}

inline double electrode_charge(const FieldSolution& sol, const std::string& electrode) {
  const SurfaceMesh& m = *sol.mesh;
  double q = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Body& b = m.body_of(m[i]);
    if (b.kind == BodyKind::conductor && b.electrode == electrode) q += panel_charge(sol, i);
  }
  return q;
}

inline double body_charge(const FieldSolution& sol, int body) {
  const SurfaceMesh& m = *sol.mesh;
  double q = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i].body == body) q += panel_charge(sol, i);
  return q;
}

struct CapacitanceMatrix {
  std::vector<std::string> electrodes;
  Eigen::MatrixXd C;  // F; C(k, e) = charge on k per volt on e
};

inline CapacitanceMatrix capacitance_matrix(BoundarySolver& solver) {
  CapacitanceMatrix cm;
  cm.electrodes = solver.mesh().electrodes();
  const auto n = static_cast<Eigen::Index>(cm.electrodes.size());
  cm.C.resize(n, n);
  for (Eigen::Index e = 0; e < n; ++e) {
    BoundaryCondition bc = BoundaryCondition::grounded(solver.mesh());
    bc.potentials[cm.electrodes[static_cast<std::size_t>(e)]] = 1.0;
    const FieldSolution sol = solver.solve(bc);
    for (Eigen::Index k = 0; k < n; ++k) cm.C(k, e) = electrode_charge(sol, cm.electrodes[static_cast<std::size_t>(k)]);
  }
  return cm;
}

}  // namespace fibershield
