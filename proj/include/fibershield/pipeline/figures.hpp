#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fibershield/analysis/line_profile.hpp"
#include "fibershield/heating/curves.hpp"
#include "fibershield/pipeline/manifest.hpp"
#include "fibershield/pipeline/presets.hpp"
#include "fibershield/trap/trap_model.hpp"

namespace fibershield {

// ---- trapping potential along the trap axis ------------------------------------

struct Figure2Options {
  double half_range = 700e-6;  // line through the trap centre along y
  double step = 2e-6;
  double fit_window = 200e-6;
  double prominence = 1e-3;    // eV
  Resolution resolution;
  SolverOptions solver;
  EvalOptions eval;
};

struct Figure2Result {
  std::string label;
  TrapScenario scenario;  // shield bias resolved
  TrapModel::Parts parts;
  LineProfile profile;
  QuadraticFit fit;
  WellReport wells;
  std::optional<double> secular_frequency;  // rad/s
};

inline Figure2Result compute_figure2_case(const Figure2Case& c, const Figure2Options& opt = {}) {
  TrapModel model(c.scenario, opt.resolution, opt.solver, opt.eval);
  Figure2Result r;
  r.label = c.label;
  r.scenario = model.scenario();
  r.parts = model.parts(Grid::line(1, opt.half_range, opt.step));
  r.profile = profile_from_map(r.parts.total);
  r.fit = quadratic_fit(r.profile, opt.fit_window);
  r.wells = detect_double_well(r.profile, opt.prominence);
  if (r.fit.curvature > 0.0) r.secular_frequency = secular_frequency(r.fit, r.scenario.ion_mass);
  return r;
}

inline void write_figure2(const std::vector<Figure2Result>& results, RunManifest& man) {
  for (const auto& r : results) {
    auto w = man.csv({"y_m", "phi_rf_eV", "phi_dc_eV", "phi_current_eV", "phi_total_eV", "quadratic_fit_eV", "residual_eV"});
    w.comment("case " + r.label + ", scenario " + scenario_hash(r.scenario));
    const auto& p = r.parts;
    for (std::size_t i = 0; i < r.profile.offsets.size(); ++i) {
      const double y = r.profile.offsets[i];
      double dc = r.scenario.endcap_voltage * p.endcaps.values[i];
      if (p.shields) dc += r.scenario.shield_voltage * p.shields->values[i];
      const double fit = r.fit.curvature * (y - r.fit.vertex_offset) * (y - r.fit.vertex_offset) + r.fit.vertex_value;
      w.row({y, p.pseudo.values[i], dc, p.current.values[i], p.total.values[i], fit, p.total.values[i] - fit}, 12);
    }
    man.save("figure2_" + r.label + ".csv", w);
  }
  auto s = man.csv({"case", "shielding", "current_density_A_per_m2", "conductivity_S_per_m", "shield_V", "well",
                    "barrier_eV", "minimum_offset_m", "fit_window_m", "fit_max_residual_eV", "curvature_eV_per_m2",
                    "secular_frequency_Hz"});
  for (const auto& r : results) {
    const auto& sc = r.scenario;
    s.row({r.label, std::string(to_string(sc.shielding)), io::fmt(sc.surface_current_density), io::fmt(sc.fiber_conductivity),
           io::fmt(sc.shielding == Shielding::unshielded ? 0.0 : sc.shield_voltage, 8), r.wells.is_double ? "double" : "single",
           io::fmt(r.wells.barrier, 8), io::fmt(r.wells.minimum_offset, 8), io::fmt(r.fit.window),
           io::fmt(r.fit.max_abs_residual, 8), io::fmt(r.fit.curvature, 8),
           r.secular_frequency ? io::fmt(*r.secular_frequency / (2.0 * constants::pi), 8) : std::string("nan")});
  }
  man.save("figure2_summary.csv", s);
}

// ---- heating rate against cavity length ------------------------------------------

struct Figure3Result {
  std::vector<HeatingCurve> curves;
  std::vector<PowerLawFit> fits;
  std::optional<HeatingCurve> slab;
  std::optional<PowerLawFit> slab_fit;
};

inline Figure3Result compute_figure3(const std::vector<CurveSpec>& specs, const std::vector<double>& lengths,
                                     const HeatingOptions& opt = {}, bool with_slab = true) {
  Figure3Result r;
  for (const auto& s : specs) {
    r.curves.push_back(heating_vs_length(s.scenario, lengths, opt, s.label));
    r.fits.push_back(fit_power_law(r.curves.back()));
  }
  if (with_slab) {
    r.slab = slab_heating_curve(specs.empty() ? TrapScenario{} : specs.front().scenario, lengths, opt);
    r.slab_fit = fit_power_law(*r.slab);
  }
  return r;
}

inline void write_figure3(const Figure3Result& r, RunManifest& man) {
  auto c = man.csv({"curve", "exposed_radius_m", "length_m", "distance_m", "rate_phonons_per_ms", "field_integral_V2_m",
                    "psd_V2_per_m2_Hz", "delta_m", "panels"});
  const auto add = [&](const HeatingCurve& h) {
    for (std::size_t i = 0; i < h.lengths.size(); ++i) {
      const auto& d = h.details[i];
      c.row({h.label, io::fmt(h.exposed_radius), io::fmt(h.lengths[i]), io::fmt(0.5 * h.lengths[i]), io::fmt(h.rates[i]),
             io::fmt(d.integral), io::fmt(d.psd), io::fmt(d.delta), std::to_string(d.panels)});
    }
  };
  for (const auto& h : r.curves) add(h);
  if (r.slab) add(*r.slab);
  man.save("figure3_curves.csv", c);

  auto a = man.csv({"curve", "exposed_radius_m", "alpha", "alpha_stderr", "prefactor", "r_squared", "points"});
  for (std::size_t i = 0; i < r.curves.size(); ++i) {
    const auto& f = r.fits[i];
    a.row({r.curves[i].label, io::fmt(r.curves[i].exposed_radius), io::fmt(f.alpha, 8), io::fmt(f.alpha_stderr, 6),
           io::fmt(f.prefactor), io::fmt(f.r_squared, 8), std::to_string(f.points)});
  }
  if (r.slab) {
    const auto& f = *r.slab_fit;
    a.row({"slab", io::fmt(r.slab->exposed_radius), io::fmt(f.alpha, 8), io::fmt(f.alpha_stderr, 6), io::fmt(f.prefactor),
           io::fmt(f.r_squared, 8), std::to_string(f.points)});
  }
  man.save("figure3_alpha.csv", a);
}

// ---- extrapolation table ---------------------------------------------------------

// Loss tangent that makes the simulated bare fiber at the reference length match the
// reported rate. Rates are linear in tan(delta), so one run suffices.
inline double calibrate_loss_tangent(const TrapScenario& bare, double length, double rate, const HeatingOptions& opt = {}) {
  TrapScenario s = bare;
  s.set_cavity_length(length);
  const NoiseResult r = scenario_heating(s, opt);
  return s.loss_tangent * rate / r.rate;
}

struct ExtrapolationRow {
  std::string quantity;
  double length = 0.0;  // m
  double reported = 0.0;
  std::optional<double> computed;
  std::string note;
};

struct SimulatedRates {
  double loss_tangent = 0.0;  // calibrated
  double bare_500 = 0.0, bare_230 = 0.0, tube_230 = 0.0, mask_230 = 0.0;
};

inline SimulatedRates simulate_reference_rates(const HeatingOptions& opt = {}) {
  SimulatedRates s;
  TrapScenario bare = make_scenario(Shielding::unshielded);
  s.loss_tangent = calibrate_loss_tangent(bare, 500e-6, reference::bare_rate_500um, opt);
  const auto run = [&](Shielding sh, double L) {
    TrapScenario sc = make_scenario(sh);
    sc.loss_tangent = s.loss_tangent;
    sc.set_cavity_length(L);
    return scenario_heating(sc, opt).rate;
  };
  s.bare_500 = run(Shielding::unshielded, 500e-6);
  s.bare_230 = run(Shielding::unshielded, 230e-6);
  s.tube_230 = run(Shielding::metal_tube, 230e-6);
  s.mask_230 = run(Shielding::gold_mask, 230e-6);
  return s;
}

inline std::vector<ExtrapolationRow> extrapolation_table(const std::optional<SimulatedRates>& sim = std::nullopt) {
  std::vector<ExtrapolationRow> rows;
  const double formula = extrapolate_heating(reference::bare_rate_500um, 500e-6, 230e-6, reference::bare_alpha);
  rows.push_back({"bare fiber baseline", 500e-6, reference::bare_rate_500um,
                  sim ? std::optional<double>(sim->bare_500) : std::nullopt, "calibration point for tan(delta)"});
  rows.push_back({"bare fiber extrapolated (alpha 4.02)", 230e-6, reference::extrapolated_rate_230um, formula,
                  "reported value disagrees with n_ref (L_ref/L)^alpha"});
  if (sim) rows.push_back({"bare fiber simulated", 230e-6, formula, sim->bare_230, "compared with the extrapolation"});
  rows.push_back({"metal tube simulated", 230e-6, reference::tube_rate_230um,
                  sim ? std::optional<double>(sim->tube_230) : std::nullopt, ""});
  rows.push_back({"gold mask simulated", 230e-6, reference::mask_rate_230um,
                  sim ? std::optional<double>(sim->mask_230) : std::nullopt, ""});
  rows.push_back({"gold mask measured", 230e-6, reference::measured_rate, std::nullopt,
                  "experimental; reproduced only by the trace fit"});
  return rows;
}

inline void write_extrapolation(const std::vector<ExtrapolationRow>& rows, const std::optional<SimulatedRates>& sim,
                                RunManifest& man) {
  auto w = man.csv({"quantity", "length_m", "reported_phonons_per_ms", "computed_phonons_per_ms", "ratio", "note"});
  if (sim) w.comment("calibrated loss tangent " + io::fmt(sim->loss_tangent, 8));
  for (const auto& r : rows)
    w.row({r.quantity, io::fmt(r.length), io::fmt(r.reported, 8), r.computed ? io::fmt(*r.computed, 8) : std::string(""),
           r.computed ? io::fmt(*r.computed / r.reported, 6) : std::string(""), r.note});
  man.save("extrapolation.csv", w);
}

}  // namespace fibershield
