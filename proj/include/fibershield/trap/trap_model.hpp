#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fibershield/field/conduction.hpp"
#include "fibershield/field/solver.hpp"
#include "fibershield/geometry/scenario_io.hpp"
#include "fibershield/geometry/scenario_mesh.hpp"
#include "fibershield/trap/potential_map.hpp"

namespace fibershield {

// e^2 E^2 / (4 m Omega^2), expressed in eV.
inline double pseudopotential_eV(double field_magnitude, double mass, double omega_rf) {
  return constants::elementary_charge * field_magnitude * field_magnitude / (4.0 * mass * omega_rf * omega_rf);
}

inline PotentialMap pseudopotential(const FieldSolution& rf, const Grid& grid, double mass, double omega_rf,
                                    const EvalOptions& eval = {}) {
  grid.validate();
  if (!(mass > 0.0) || !(omega_rf > 0.0)) throw ConfigError("invalid-argument", "mass and RF frequency must be > 0");
  PotentialMap m;
  m.grid = grid;
  m.kind = MapKind::pseudo_potential_eV;
  const auto E = evaluate_field(rf, grid.points(), eval);
  m.values.resize(E.size());
  for (std::size_t i = 0; i < E.size(); ++i) m.values[i] = pseudopotential_eV(E[i].norm(), mass, omega_rf);
  return m;
}

// Opposite blade pairs at +V0 and -V0, everything else grounded.
inline BoundaryCondition rf_boundary_condition(const SurfaceMesh& mesh, double amplitude) {
  BoundaryCondition bc = BoundaryCondition::grounded(mesh);
  for (auto& [e, v] : bc.potentials)
    if (is_rf_electrode(e)) v = rf_phase(e) * amplitude;
  return bc;
}

inline PotentialMap potential_map_from(const FieldSolution& sol, const Grid& grid, MapKind kind,
                                       const EvalOptions& eval = {}) {
  grid.validate();
  PotentialMap m;
  m.grid = grid;
  m.kind = kind;
  m.values = evaluate_potential(sol, grid.points(), eval);
  return m;
}

// Unit-volt solve for the named electrodes (all at 1 V together), others grounded.
inline PotentialMap dc_basis(BoundarySolver& solver, const std::vector<std::string>& electrodes, const Grid& grid,
                             const EvalOptions& eval = {}) {
  BoundaryCondition bc = BoundaryCondition::grounded(solver.mesh());
  for (const auto& e : electrodes) {
    auto it = bc.potentials.find(e);
    if (it == bc.potentials.end()) throw ConfigError("unknown-electrode", "no electrode named '" + e + "'");
    it->second = 1.0;
  }
  return potential_map_from(solver.solve(bc), grid, MapKind::dc_potential_V, eval);
}

inline PotentialMap dc_basis(BoundarySolver& solver, std::size_t electrode_index, const Grid& grid,
                             const EvalOptions& eval = {}) {
  const auto names = solver.mesh().electrodes();
  if (electrode_index >= names.size())
    throw ConfigError("unknown-electrode", "electrode index " + std::to_string(electrode_index) + " out of range");
  return dc_basis(solver, std::vector<std::string>{names[electrode_index]}, grid, eval);
}

inline BoundaryCondition current_boundary_condition(const SurfaceMesh& mesh, const TrapScenario& s,
                                                    const ConductionProfile& prof) {
  BoundaryCondition bc = BoundaryCondition::grounded(mesh);
  for (std::size_t k : conduction_panels(mesh)) bc.panel_potentials[k] = prof.at_point(mesh[k].centroid, s.cavity_half_length);
  return bc;
}

// Fiber conduction profile imposed on the fiber surface panels, electrodes grounded.
inline PotentialMap surface_current_potential(BoundarySolver& solver, const TrapScenario& s, double sigma_fiber,
                                              const Grid& grid, const EvalOptions& eval = {}) {
  grid.validate();
  const ConductionProfile prof = solve_fiber_conduction(s, sigma_fiber);
  if (prof.peak() == 0.0) {
    PotentialMap m;
    m.grid = grid;
    m.kind = MapKind::current_potential_V;
    m.values.assign(grid.size(), 0.0);
    return m;
  }
  return potential_map_from(solver.solve(current_boundary_condition(solver.mesh(), s, prof)), grid,
                            MapKind::current_potential_V, eval);
}

// Phi = Phi_RF + sum_i V_i Phi_DC,i + Phi_current, all in eV for unit charge.
inline PotentialMap total_potential(const PotentialMap& pseudo, const std::vector<std::pair<const PotentialMap*, double>>& dc,
                                    const PotentialMap* current) {
  pseudo.validate();
  if (pseudo.kind != MapKind::pseudo_potential_eV) throw AnalysisError("grid-mismatch", "first map must be a pseudopotential");
  PotentialMap out = pseudo;
  out.kind = MapKind::total_eV;
  for (const auto& [map, volts] : dc) {
    if (!(map->grid == pseudo.grid)) throw AnalysisError("grid-mismatch", "DC map grid differs from pseudopotential grid");
    if (map->kind != MapKind::dc_potential_V) throw AnalysisError("grid-mismatch", "expected a DC potential map");
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += volts * map->values[i];
  }
  if (current) {
    if (!(current->grid == pseudo.grid)) throw AnalysisError("grid-mismatch", "current map grid differs");
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += current->values[i];
  }
  return out;
}

// DC potential of the bare blade trap (no fibers, endcaps at their scenario voltage)
// at the front face of the shield. A shield biased there disturbs the trap least.
inline double matched_shield_voltage(const TrapScenario& s, const Resolution& res = {}, const SolverOptions& opt = {}) {
  validate(s);
  SurfaceMesh blades;
  detail::build_blades(blades, s, res);
  BoundaryCondition bc = BoundaryCondition::grounded(blades);
  for (auto& [e, v] : bc.potentials)
    if (is_endcap_electrode(e)) v = s.endcap_voltage;
  const FieldSolution sol = solve(blades, bc, opt);
  const double front = s.cavity_half_length - (s.shielding == Shielding::gold_mask ? s.mask->thickness : 0.0);
  const auto v = evaluate_potential(sol, {Vec3(0.0, 0.0, front), Vec3(0.0, 0.0, -front)});
  return 0.5 * (v[0] + v[1]);
}

inline TrapScenario resolve_shield_bias(TrapScenario s, const Resolution& res = {}, const SolverOptions& opt = {}) {
  if (s.shield_voltage_matched && s.shielding != Shielding::unshielded) s.shield_voltage = matched_shield_voltage(s, res, opt);
  return s;
}

// One scenario's solver plus the pieces of the confinement potential.
class TrapModel {
 public:
  explicit TrapModel(TrapScenario s, const Resolution& res = {}, SolverOptions opt = {}, EvalOptions eval = {})
      : hash_(scenario_hash(s)),
        scenario_(resolve_shield_bias(std::move(s), res, opt)),
        solver_(std::make_shared<const SurfaceMesh>(build_scenario_mesh(scenario_, res)), opt),
        eval_(eval) {}

  const TrapScenario& scenario() const { return scenario_; }
  const SurfaceMesh& mesh() const { return solver_.mesh(); }
  BoundarySolver& solver() { return solver_; }
  const std::string& hash() const { return hash_; }

  const FieldSolution& rf_solution() {
    if (!rf_) rf_ = solver_.solve(rf_boundary_condition(mesh(), scenario_.rf_amplitude));
    return *rf_;
  }

  PotentialMap pseudo(const Grid& g) {
    return tag(pseudopotential(rf_solution(), g, scenario_.ion_mass, scenario_.rf_angular_frequency, eval_));
  }
  PotentialMap endcaps(const Grid& g) { return tag(dc_basis(solver_, electrodes_where(is_endcap_electrode), g, eval_)); }
  std::optional<PotentialMap> shields(const Grid& g) {
    const auto names = electrodes_where(is_shield_electrode);
    if (names.empty()) return std::nullopt;
    return tag(dc_basis(solver_, names, g, eval_));
  }
  PotentialMap current(const Grid& g) {
    return tag(surface_current_potential(solver_, scenario_, scenario_.fiber_conductivity, g, eval_));
  }

  struct Parts {
    PotentialMap pseudo, endcaps, current, total;
    std::optional<PotentialMap> shields;
  };

  Parts parts(const Grid& g) {
    Parts p{pseudo(g), endcaps(g), current(g), {}, shields(g)};
    std::vector<std::pair<const PotentialMap*, double>> dc = {{&p.endcaps, scenario_.endcap_voltage}};
    if (p.shields) dc.emplace_back(&*p.shields, scenario_.shield_voltage);
    p.total = tag(total_potential(p.pseudo, dc, &p.current));
    return p;
  }

 private:
  template <class Pred>
  std::vector<std::string> electrodes_where(Pred pred) const {
    std::vector<std::string> out;
    for (const auto& e : mesh().electrodes())
      if (pred(e)) out.push_back(e);
    return out;
  }
  PotentialMap tag(PotentialMap m) const {
    m.scenario_hash = hash_;
    m.solver_tolerance = solver_.options().tolerance;
    return m;
  }

  std::string hash_;
  TrapScenario scenario_;
  BoundarySolver solver_;
  EvalOptions eval_;
  std::optional<FieldSolution> rf_;
};

}  // namespace fibershield
