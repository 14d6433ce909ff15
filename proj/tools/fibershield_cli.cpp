#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fibershield/fibershield.hpp"

namespace fs = fibershield;

namespace {

struct Globals {
  std::string scenario_path;
  std::string out_dir = "out";
  double solver_tol = 1e-3;
  unsigned seed = 0;
  std::size_t threads = 0;
  double resolution_scale = 1.0;
};

fs::TrapScenario base_scenario(const Globals& g) {
  if (g.scenario_path.empty()) return fs::make_scenario(fs::Shielding::gold_mask);
  return fs::load_scenario(g.scenario_path);
}

fs::Resolution resolution(const Globals& g) {
  return g.resolution_scale == 1.0 ? fs::Resolution{} : fs::Resolution{}.scaled(g.resolution_scale);
}

fs::SolverOptions solver_options(const Globals& g) {
  fs::SolverOptions o;
  o.tolerance = g.solver_tol;
  o.threads = g.threads;
  return o;
}

fs::EvalOptions eval_options(const Globals& g) {
  fs::EvalOptions e;
  e.threads = g.threads;
  return e;
}

fs::HeatingOptions heating_options(const Globals& g) {
  fs::HeatingOptions h;
  h.resolution = resolution(g);
  h.solver = solver_options(g);
  h.eval = eval_options(g);
  return h;
}

void record_globals(fs::RunManifest& m, const Globals& g) {
  m.input("seed", std::to_string(g.seed));
  m.input("solver_tol", fs::io::fmt(g.solver_tol));
  m.input("resolution_scale", fs::io::fmt(g.resolution_scale));
  m.set_solver_tolerance(g.solver_tol);
}

std::vector<double> parse_lengths(const std::vector<std::string>& items, const std::string& key) {
  std::vector<double> out;
  for (const auto& it : items) out.push_back(fs::detail::parse_quantity(it, fs::detail::QuantityKind::length, key));
  return out;
}

// Content hash, so the manifest does not depend on where the input lives.
std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fs::ConfigError("missing-file", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return fs::hex64(fs::fnv1a64(ss.str()));
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

// Shielding geometry from a curve spec, everything else from the base scenario.
fs::CurveSpec with_shielding(const fs::TrapScenario& base, const std::string& r) {
  fs::CurveSpec c = fs::curve_spec(r);
  fs::TrapScenario s = base;
  s.shielding = c.scenario.shielding;
  s.tube = c.scenario.tube;
  s.mask = c.scenario.mask;
  fs::validate(s);
  c.scenario = s;
  return c;
}

// Drive and material parameters of the scenario file carried onto a preset.
fs::TrapScenario with_material(fs::TrapScenario preset, const fs::TrapScenario& from) {
  preset.ion_mass = from.ion_mass;
  preset.temperature = from.temperature;
  preset.relative_permittivity = from.relative_permittivity;
  preset.loss_tangent = from.loss_tangent;
  preset.axial_secular_frequency = from.axial_secular_frequency;
  preset.rf_amplitude = from.rf_amplitude;
  preset.rf_angular_frequency = from.rf_angular_frequency;
  return preset;
}

std::string fit_report(const fs::QuadraticFit& f, const fs::WellReport& w, std::optional<double> omega) {
  std::ostringstream o;
  o << "well: " << (w.is_double ? "double" : "single") << '\n';
  o << "minima_m:";
  for (double m : w.minima) o << ' ' << fs::io::fmt(m, 8);
  o << '\n';
  if (w.is_double) {
    o << "barrier_eV: " << fs::io::fmt(w.barrier, 8) << '\n';
    o << "minimum_offset_m: " << fs::io::fmt(w.minimum_offset, 8) << '\n';
    o << "maximum_offset_m: " << fs::io::fmt(w.maximum_offset, 8) << '\n';
  }
  o << "fit_window_m: " << fs::io::fmt(f.window) << '\n';
  o << "fit_samples: " << f.samples << '\n';
  o << "curvature_eV_per_m2: " << fs::io::fmt(f.curvature, 10) << '\n';
  o << "vertex_offset_m: " << fs::io::fmt(f.vertex_offset, 10) << '\n';
  o << "vertex_value_eV: " << fs::io::fmt(f.vertex_value, 10) << '\n';
  o << "max_abs_residual_eV: " << fs::io::fmt(f.max_abs_residual, 8) << '\n';
  o << "secular_frequency_Hz: " << (omega ? fs::io::fmt(*omega / (2.0 * fs::constants::pi), 8) : std::string("nan")) << '\n';
  return o.str();
}

// ---- potential ---------------------------------------------------------------------

struct PotentialArgs {
  std::string axis = "y";
  std::string half = "700um";
  std::string step = "2um";
  std::vector<std::string> components{"total"};
  std::string cache_dir;
  bool no_cache = false;
};

void run_potential(const Globals& g, const PotentialArgs& a) {
  const fs::TrapScenario s = base_scenario(g);
  const int axis = a.axis == "x" ? 0 : a.axis == "y" ? 1 : a.axis == "z" ? 2 : -1;
  if (axis < 0) throw fs::ConfigError("invalid-argument", "axis must be x, y or z");
  const double half = fs::detail::parse_quantity(a.half, fs::detail::QuantityKind::length, "half");
  const double step = fs::detail::parse_quantity(a.step, fs::detail::QuantityKind::length, "step");
  if (!(half > 0.0) || !(step > 0.0)) throw fs::ConfigError("invalid-argument", "half and step must be > 0");
  const fs::Grid grid = fs::Grid::line(axis, half, step);
  static const std::vector<std::string> known{"pseudo", "endcaps", "shields", "current", "total"};
  for (const auto& c : a.components)
    if (std::find(known.begin(), known.end(), c) == known.end())
      throw fs::ConfigError("invalid-argument", "unknown component '" + c + "'");

  fs::RunManifest man("potential", g.out_dir);
  record_globals(man, g);
  man.scenario("scenario", s);
  man.input("grid", a.axis + ":" + fs::io::fmt(half) + ":" + fs::io::fmt(step));
  man.input("components", join(a.components));

  // Cache key: everything that changes the numbers.
  const std::string key = fs::hex64(fs::fnv1a64(fs::serialize_scenario(s) + "|" + fs::io::fmt(g.solver_tol) + "|" +
                                                fs::io::fmt(g.resolution_scale) + "|" + a.axis + "|" + fs::io::fmt(half) +
                                                "|" + fs::io::fmt(step)));
  const std::filesystem::path cache = a.cache_dir.empty() ? std::filesystem::path(g.out_dir) / "cache" : std::filesystem::path(a.cache_dir);
  const auto cache_file = [&](const std::string& c) { return (cache / (key + "_" + c + ".fsmap")).string(); };

  std::map<std::string, fs::PotentialMap> maps;
  bool hit = !a.no_cache;
  for (const auto& c : a.components) {
    if (!hit) break;
    if (std::filesystem::exists(cache_file(c))) maps[c] = fs::load_map_binary(cache_file(c));
    else hit = false;
  }
  if (!hit) {
    maps.clear();
    man.stage("solve", [&] {
      fs::TrapModel model(s, resolution(g), solver_options(g), eval_options(g));
      auto p = model.parts(grid);
      maps["pseudo"] = p.pseudo;
      maps["endcaps"] = p.endcaps;
      maps["current"] = p.current;
      maps["total"] = p.total;
      if (p.shields) maps["shields"] = *p.shields;
    });
    if (!a.no_cache) {
      std::filesystem::create_directories(cache);
      for (const auto& [c, m] : maps) fs::save_map_binary(m, cache_file(c));
    }
  }
  for (const auto& c : a.components) {
    auto it = maps.find(c);
    if (it == maps.end()) throw fs::ConfigError("invalid-argument", "scenario has no '" + c + "' component");
    auto w = fs::map_to_csv(it->second, man.hash());
    w.comment("component " + c + ", scenario " + it->second.scenario_hash);
    man.save("potential_" + c + ".csv", w);
  }
  man.write();
  std::cout << "potential: wrote " << a.components.size() << " map(s) to " << g.out_dir << (hit ? " (cached)" : "") << '\n';
}

// ---- analyze-line --------------------------------------------------------------------

struct AnalyzeArgs {
  std::string profile;
  std::string column;
  std::string window = "200um";
  double prominence = 1e-3;
};

void run_analyze(const Globals& g, const AnalyzeArgs& a) {
  const fs::TrapScenario s = base_scenario(g);
  const fs::io::CsvTable t = fs::io::read_csv(a.profile);
  const std::size_t vc = a.column.empty() ? t.column_any({"phi_total_eV", "total_eV", "value"}) : t.column(a.column);
  // Abscissa: the first position column that varies.
  std::optional<std::size_t> xc;
  for (const char* name : {"offset_m", "y_m", "x_m", "z_m"}) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), name);
    if (it == t.columns.end()) continue;
    const std::size_t c = static_cast<std::size_t>(it - t.columns.begin());
    if (t.rows.size() > 1 && t.number(0, c) != t.number(1, c)) {
      xc = c;
      break;
    }
  }
  if (!xc) throw fs::ConfigError("parse", "profile has no varying position column");
  fs::LineProfile p;
  p.axis = fs::Vec3::Unit(t.columns[*xc] == "x_m" ? 0 : t.columns[*xc] == "z_m" ? 2 : 1);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    p.offsets.push_back(t.number(r, *xc));
    p.values.push_back(t.number(r, vc));
  }
  const double window = fs::detail::parse_quantity(a.window, fs::detail::QuantityKind::length, "window");

  fs::RunManifest man("analyze-line", g.out_dir);
  record_globals(man, g);
  man.input("profile", file_digest(a.profile));
  man.input("column", t.columns[vc]);
  man.input("window", fs::io::fmt(window));
  man.input("prominence", fs::io::fmt(a.prominence));
  man.input("ion_mass", fs::io::fmt(s.ion_mass));

  const auto [fit, wells] = man.stage("analyze", [&] {
    return std::pair{fs::quadratic_fit(p, window), fs::detect_double_well(p, a.prominence)};
  });
  std::optional<double> omega;
  if (fit.curvature > 0.0) omega = fs::secular_frequency(fit, s.ion_mass);

  auto w = man.csv({"well", "minima", "barrier_eV", "minimum_offset_m", "fit_window_m", "curvature_eV_per_m2",
                    "vertex_offset_m", "max_abs_residual_eV", "secular_frequency_Hz"});
  w.row({wells.is_double ? "double" : "single", std::to_string(wells.minima.size()), fs::io::fmt(wells.barrier, 8),
         fs::io::fmt(wells.minimum_offset, 8), fs::io::fmt(fit.window), fs::io::fmt(fit.curvature, 10),
         fs::io::fmt(fit.vertex_offset, 10), fs::io::fmt(fit.max_abs_residual, 8),
         omega ? fs::io::fmt(*omega / (2.0 * fs::constants::pi), 8) : std::string("nan")});
  man.save("analysis.csv", w);
  const std::string report = fit_report(fit, wells, omega);
  man.save_text("fit_report.txt", report);
  man.write();
  std::cout << report;
}

// ---- heating -------------------------------------------------------------------------

struct HeatingArgs {
  std::string r;
  std::vector<std::string> lengths;
  double delta = 1e-3;
  std::string out = "heating.csv";
};

void run_heating(const Globals& g, const HeatingArgs& a) {
  const fs::TrapScenario base = base_scenario(g);
  const fs::CurveSpec spec = a.r.empty() ? fs::CurveSpec{std::string(fs::to_string(base.shielding)), base}
                                         : with_shielding(base, a.r);
  std::vector<double> lengths = a.lengths.empty() ? std::vector<double>{2.0 * base.cavity_half_length}
                                                  : parse_lengths(a.lengths, "lengths");
  std::sort(lengths.begin(), lengths.end());
  if (!(a.delta > 0.0)) throw fs::ConfigError("invalid-argument", "delta ratio must be > 0");
  fs::HeatingOptions opt = heating_options(g);
  opt.delta_ratio = a.delta;

  fs::RunManifest man("heating", g.out_dir);
  record_globals(man, g);
  man.scenario("scenario", spec.scenario);
  std::vector<std::string> ls;
  for (double L : lengths) ls.push_back(fs::io::fmt(L));
  man.input("lengths", join(ls));
  man.input("delta_ratio", fs::io::fmt(a.delta));

  std::vector<fs::NoiseResult> results(lengths.size());
  man.stage("heating", [&] {
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      fs::TrapScenario s = spec.scenario;
      s.set_cavity_length(lengths[i]);
      results[i] = fs::scenario_heating(s, opt);
    }
  });
  std::optional<fs::PowerLawFit> fit;
  if (lengths.size() >= 4) {
    std::vector<double> d, r;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      d.push_back(0.5 * lengths[i]);
      r.push_back(results[i].rate);
    }
    fit = fs::fit_power_law(d, r);
  }
  auto w = man.csv({"curve", "length_m", "rate_phonons_per_ms", "psd_V2_per_m2_Hz", "field_integral_V2_m", "delta_m",
                    "linearity_change", "panels"});
  if (fit) w.comment("alpha " + fs::io::fmt(fit->alpha, 8) + " +- " + fs::io::fmt(fit->alpha_stderr, 4));
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const auto& r = results[i];
    w.row({spec.label, fs::io::fmt(lengths[i]), fs::io::fmt(r.rate), fs::io::fmt(r.psd), fs::io::fmt(r.integral),
           fs::io::fmt(r.delta), fs::io::fmt(r.linearity_change, 4), std::to_string(r.panels)});
  }
  man.save(a.out, w);
  std::ostringstream rep;
  rep << "curve: " << spec.label << '\n';
  for (std::size_t i = 0; i < lengths.size(); ++i)
    rep << "L_m " << fs::io::fmt(lengths[i]) << "  rate_phonons_per_ms " << fs::io::fmt(results[i].rate, 6) << '\n';
  if (fit)
    rep << "alpha: " << fs::io::fmt(fit->alpha, 6) << " +- " << fs::io::fmt(fit->alpha_stderr, 3)
        << "  r_squared: " << fs::io::fmt(fit->r_squared, 8) << '\n';
  man.save_text("heating_report.txt", rep.str());
  man.write();
  std::cout << rep.str();
}

// ---- metrology -----------------------------------------------------------------------

int index_of(const std::string& v, const char* a, const char* b, const std::string& what) {
  if (v == a || v == "0") return 0;
  if (v == b || v == "1") return 1;
  throw fs::ConfigError("parse", "bad " + what + " label '" + v + "'");
}

void run_align(const Globals& g, const std::string& path) {
  const auto t = fs::io::read_csv(path);
  const std::size_t cf = t.column("fiber"), ce = t.column("edge"), cx = t.column_any({"x_m", "x"}),
                    cy = t.column_any({"y_m", "y"}), cs = t.column_any({"sigma_m", "sigma"});
  fs::EdgePointSet set;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const int f = index_of(t.rows[r][cf], "left", "right", "fiber");
    const int e = index_of(t.rows[r][ce], "upper", "lower", "edge");
    set.edges[f][e].push_back({t.number(r, cx), t.number(r, cy), t.number(r, cs)});
  }
  fs::RunManifest man("align", g.out_dir);
  record_globals(man, g);
  man.input("edges", file_digest(path));
  const auto res = man.stage("fit", [&] { return fs::fit_alignment(set); });
  auto w = man.csv({"offset_m", "offset_sigma_m", "angle_rad", "angle_sigma_rad"});
  w.row({res.offset, res.offset_sigma, res.angle, res.angle_sigma}, 8);
  man.save("alignment.csv", w);
  man.write();
  std::cout << "offset_um " << fs::io::fmt(res.offset * 1e6, 5) << " +- " << fs::io::fmt(res.offset_sigma * 1e6, 3)
            << "\nangle_mrad " << fs::io::fmt(res.angle * 1e3, 5) << " +- " << fs::io::fmt(res.angle_sigma * 1e3, 3)
            << '\n';
}

struct FinesseArgs {
  std::vector<double> markers;
  double fwhm = 0.0;
  std::vector<double> finesse;
};

void run_finesse(const Globals& g, const FinesseArgs& a) {
  std::vector<double> values = a.finesse;
  if (!a.markers.empty()) values.insert(values.begin(), fs::finesse_from_scan(a.markers, a.fwhm));
  if (values.empty()) throw fs::ConfigError("invalid-argument", "give --markers/--fwhm or --finesse");
  fs::RunManifest man("finesse", g.out_dir);
  record_globals(man, g);
  std::vector<std::string> vs;
  for (double v : values) vs.push_back(fs::io::fmt(v));
  man.input("finesse", join(vs));
  auto w = man.csv({"finesse", "loss_ppm", "loss_change_ppm"});
  const double l0 = fs::loss_from_finesse(values.front());
  for (double F : values) {
    const double l = fs::loss_from_finesse(F);
    w.row({F, l, l - l0}, 8);
    std::cout << "finesse " << fs::io::fmt(F, 8) << "  loss_ppm " << fs::io::fmt(l, 6) << "  change_ppm "
              << fs::io::fmt(l - l0, 4) << '\n';
  }
  man.save("finesse.csv", w);
  man.write();
}

void run_skin_depth(const Globals& g, double rho, const std::string& freq) {
  const double f = fs::detail::parse_quantity(freq, fs::detail::QuantityKind::frequency, "frequency");
  fs::RunManifest man("skin-depth", g.out_dir);
  record_globals(man, g);
  man.input("resistivity", fs::io::fmt(rho));
  man.input("frequency", fs::io::fmt(f));
  const double d = fs::skin_depth(rho, f);
  auto w = man.csv({"resistivity_ohm_m", "frequency_Hz", "skin_depth_m"});
  w.row({rho, f, d}, 8);
  man.save("skin_depth.csv", w);
  man.write();
  std::cout << "skin_depth_um " << fs::io::fmt(d * 1e6, 5) << '\n';
}

void run_charging(const Globals& g, double charge, double days) {
  fs::RunManifest man("charging", g.out_dir);
  record_globals(man, g);
  man.input("charge_per_um2", fs::io::fmt(charge));
  man.input("days", fs::io::fmt(days));
  const double i = fs::equilibrium_current_density(charge, days * 86400.0);
  auto w = man.csv({"charge_e_per_um2", "duration_s", "current_density_A_per_m2"});
  w.row({charge, days * 86400.0, i}, 8);
  man.save("charging.csv", w);
  man.write();
  std::cout << "current_density_A_per_m2 " << fs::io::fmt(i, 5) << '\n';
}

void run_trace_fit(const Globals& g, const std::string& path) {
  const auto t = fs::io::read_csv(path);
  const std::size_t ct = t.column_any({"tau_ms", "delay_ms"}), cn = t.column("nbar");
  std::optional<std::size_t> cs;
  if (std::find(t.columns.begin(), t.columns.end(), "sigma") != t.columns.end()) cs = t.column("sigma");
  std::vector<fs::TracePoint> trace;
  for (std::size_t r = 0; r < t.rows.size(); ++r) trace.push_back({t.number(r, ct), t.number(r, cn), cs ? t.number(r, *cs) : 0.0});
  fs::RunManifest man("trace-fit", g.out_dir);
  record_globals(man, g);
  man.input("trace", file_digest(path));
  const auto f = man.stage("fit", [&] { return fs::heating_rate_from_trace(trace); });
  auto w = man.csv({"slope_phonons_per_ms", "slope_sigma_phonons_per_ms", "intercept_phonons", "chi2", "points"});
  w.row({fs::io::fmt(f.slope, 10), fs::io::fmt(f.slope_sigma, 6), fs::io::fmt(f.intercept, 8), fs::io::fmt(f.chi2, 6),
         std::to_string(f.points)});
  man.save("trace_fit.csv", w);
  man.write();
  std::cout << "heating_rate_phonons_per_ms " << fs::io::fmt(f.slope, 6) << " +- " << fs::io::fmt(f.slope_sigma, 3) << '\n';
}

// ---- figures --------------------------------------------------------------------------

struct Figure2Args {
  std::vector<std::string> cases;
  std::string half = "700um";
  std::string step = "2um";
  std::string window = "200um";
};

void run_figure2_cmd(const Globals& g, const Figure2Args& a) {
  fs::Figure2Options opt;
  opt.half_range = fs::detail::parse_quantity(a.half, fs::detail::QuantityKind::length, "half");
  opt.step = fs::detail::parse_quantity(a.step, fs::detail::QuantityKind::length, "step");
  opt.fit_window = fs::detail::parse_quantity(a.window, fs::detail::QuantityKind::length, "window");
  opt.resolution = resolution(g);
  opt.solver = solver_options(g);
  opt.eval = eval_options(g);
  std::vector<fs::Figure2Case> cases;
  for (auto& c : fs::figure2_cases())
    if (a.cases.empty() || std::find(a.cases.begin(), a.cases.end(), c.label) != a.cases.end()) cases.push_back(c);
  if (cases.empty()) throw fs::ConfigError("invalid-argument", "no matching figure2 cases");
  if (!g.scenario_path.empty()) {
    const auto from = base_scenario(g);
    for (auto& c : cases) c.scenario = with_material(c.scenario, from);
  }

  fs::RunManifest man("figure2", g.out_dir);
  record_globals(man, g);
  for (const auto& c : cases) man.scenario(c.label, c.scenario);
  man.input("line", fs::io::fmt(opt.half_range) + ":" + fs::io::fmt(opt.step));
  man.input("window", fs::io::fmt(opt.fit_window));
  std::vector<fs::Figure2Result> results;
  for (const auto& c : cases) results.push_back(man.stage(c.label, [&] { return fs::compute_figure2_case(c, opt); }));
  fs::write_figure2(results, man);
  man.write();
  for (const auto& r : results)
    std::cout << r.label << ": " << (r.wells.is_double ? "double" : "single") << " well, barrier_eV "
              << fs::io::fmt(r.wells.barrier, 4) << ", offset_um " << fs::io::fmt(r.wells.minimum_offset * 1e6, 4)
              << ", residual_meV " << fs::io::fmt(r.fit.max_abs_residual * 1e3, 4) << '\n';
}

struct Figure3Args {
  std::vector<std::string> r{"bare", "tube", "30um"};
  std::vector<std::string> lengths;
  bool no_slab = false;
  double delta = 1e-3;
};

void run_figure3_cmd(const Globals& g, const Figure3Args& a) {
  const std::vector<double> lengths = a.lengths.empty() ? fs::default_figure3_lengths() : parse_lengths(a.lengths, "lengths");
  std::vector<fs::CurveSpec> specs;
  const std::optional<fs::TrapScenario> from =
      g.scenario_path.empty() ? std::nullopt : std::optional<fs::TrapScenario>(base_scenario(g));
  for (const auto& r : a.r) {
    auto c = fs::curve_spec(r);
    if (from) c.scenario = with_material(c.scenario, *from);
    specs.push_back(c);
  }
  // Canonical order: unshielded first, then tube, then masks of decreasing opening.
  std::stable_sort(specs.begin(), specs.end(), [](const fs::CurveSpec& x, const fs::CurveSpec& y) {
    const auto rank = [](const fs::CurveSpec& c) {
      return c.scenario.shielding == fs::Shielding::unshielded ? 0 : c.scenario.shielding == fs::Shielding::metal_tube ? 1 : 2;
    };
    if (rank(x) != rank(y)) return rank(x) < rank(y);
    return fs::exposed_radius(x.scenario) > fs::exposed_radius(y.scenario);
  });
  fs::HeatingOptions opt = heating_options(g);
  opt.delta_ratio = a.delta;

  fs::RunManifest man("figure3", g.out_dir);
  record_globals(man, g);
  for (const auto& c : specs) man.scenario(c.label, c.scenario);
  std::vector<std::string> ls;
  for (double L : lengths) ls.push_back(fs::io::fmt(L));
  man.input("lengths", join(ls));
  man.input("slab", a.no_slab ? "no" : "yes");
  man.input("delta_ratio", fs::io::fmt(a.delta));

  fs::Figure3Result res;
  for (const auto& c : specs) {
    res.curves.push_back(man.stage(c.label, [&] { return fs::heating_vs_length(c.scenario, lengths, opt, c.label); }));
    res.fits.push_back(fs::fit_power_law(res.curves.back()));
  }
  if (!a.no_slab) {
    res.slab = man.stage("slab", [&] {
      return fs::slab_heating_curve(specs.empty() ? fs::TrapScenario{} : specs.front().scenario, lengths, opt);
    });
    res.slab_fit = fs::fit_power_law(*res.slab);
  }
  fs::write_figure3(res, man);
  man.write();
  for (std::size_t i = 0; i < res.curves.size(); ++i)
    std::cout << res.curves[i].label << ": alpha " << fs::io::fmt(res.fits[i].alpha, 5) << " +- "
              << fs::io::fmt(res.fits[i].alpha_stderr, 2) << '\n';
  if (res.slab_fit)
    std::cout << "slab: alpha " << fs::io::fmt(res.slab_fit->alpha, 5) << " +- " << fs::io::fmt(res.slab_fit->alpha_stderr, 2)
              << '\n';
}

void run_extrapolate(const Globals& g, bool simulate) {
  fs::RunManifest man("extrapolate", g.out_dir);
  record_globals(man, g);
  man.input("simulate", simulate ? "yes" : "no");
  std::optional<fs::SimulatedRates> sim;
  if (simulate) sim = man.stage("simulate", [&] { return fs::simulate_reference_rates(heating_options(g)); });
  const auto rows = fs::extrapolation_table(sim);
  fs::write_extrapolation(rows, sim, man);
  man.write();
  for (const auto& r : rows)
    std::cout << r.quantity << " @ " << fs::io::fmt(r.length * 1e6, 4) << " um: reported " << fs::io::fmt(r.reported, 6)
              << (r.computed ? ", computed " + fs::io::fmt(*r.computed, 6) : std::string()) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fiber-cavity ion trap: charging, shielding and heating-rate simulations"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--scenario", g.scenario_path, "scenario file (YAML)");
  app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--solver-tol", g.solver_tol, "relative collocation residual")->capture_default_str();
  app.add_option("--seed", g.seed, "seed for any randomised step")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--resolution-scale", g.resolution_scale, ">1 coarser mesh, <1 finer")->capture_default_str();

  PotentialArgs pa;
  auto* pot = app.add_subcommand("potential", "potential maps along a line through the trap centre");
  pot->add_option("--axis", pa.axis, "x, y or z")->capture_default_str();
  pot->add_option("--half", pa.half, "half range")->capture_default_str();
  pot->add_option("--step", pa.step, "sample spacing")->capture_default_str();
  pot->add_option("--component", pa.components, "pseudo, endcaps, shields, current, total")->delimiter(',');
  pot->add_option("--cache-dir", pa.cache_dir, "binary map cache (default <out-dir>/cache)");
  pot->add_flag("--no-cache", pa.no_cache);

  AnalyzeArgs aa;
  auto* ana = app.add_subcommand("analyze-line", "quadratic fit and well detection on a line profile");
  ana->add_option("--profile", aa.profile, "profile CSV")->required();
  ana->add_option("--column", aa.column, "value column (eV)");
  ana->add_option("--window", aa.window, "fit half window")->capture_default_str();
  ana->add_option("--prominence", aa.prominence, "minimum barrier for a double well, eV")->capture_default_str();

  HeatingArgs ha;
  auto* heat = app.add_subcommand("heating", "dielectric-noise heating rate");
  heat->add_option("--r", ha.r, "bare, tube or exposed mask radius (e.g. 30um)");
  heat->add_option("--lengths", ha.lengths, "cavity lengths, e.g. 150um,300um")->delimiter(',');
  heat->add_option("--delta", ha.delta, "displacement as a fraction of d")->capture_default_str();
  heat->add_option("--out", ha.out, "output CSV name")->capture_default_str();

  std::string edges;
  auto* align = app.add_subcommand("align", "fiber alignment from edge points");
  align->add_option("--edges", edges, "CSV with fiber,edge,x,y,sigma")->required();

  FinesseArgs fa;
  auto* fin = app.add_subcommand("finesse", "finesse and round-trip loss");
  fin->add_option("--markers", fa.markers, "FSR marker positions")->delimiter(',');
  fin->add_option("--fwhm", fa.fwhm, "linewidth in marker units");
  fin->add_option("--finesse", fa.finesse, "finesse values")->delimiter(',');

  double rho = fs::gold_resistivity;
  std::string freq = "20MHz";
  auto* skin = app.add_subcommand("skin-depth", "skin depth of a non-magnetic conductor");
  skin->add_option("--resistivity", rho, "Ohm m")->capture_default_str();
  skin->add_option("--frequency", freq, "e.g. 20MHz")->capture_default_str();

  double charge = 4.0, days = 7.0;
  auto* chg = app.add_subcommand("charging", "surface current density from accumulated charge");
  chg->add_option("--charge", charge, "elementary charges per um^2")->capture_default_str();
  chg->add_option("--days", days, "accumulation time")->capture_default_str();

  std::string trace;
  auto* tf = app.add_subcommand("trace-fit", "heating rate from phonon number vs delay");
  tf->add_option("--trace", trace, "CSV with tau_ms,nbar,sigma")->required();

  Figure2Args f2;
  auto* fig2 = app.add_subcommand("figure2", "axial potential profiles for the charging cases");
  fig2->add_option("--case", f2.cases, "subset of cases")->delimiter(',');
  fig2->add_option("--half", f2.half)->capture_default_str();
  fig2->add_option("--step", f2.step)->capture_default_str();
  fig2->add_option("--window", f2.window)->capture_default_str();

  Figure3Args f3;
  auto* fig3 = app.add_subcommand("figure3", "heating rate vs cavity length and fitted exponents");
  fig3->add_option("--r", f3.r, "curves: bare, tube, radii")->delimiter(',')->capture_default_str();
  fig3->add_option("--lengths", f3.lengths, "cavity lengths")->delimiter(',');
  fig3->add_flag("--no-slab", f3.no_slab, "skip the planar control");
  fig3->add_option("--delta", f3.delta)->capture_default_str();

  bool simulate = false;
  auto* ext = app.add_subcommand("extrapolate", "reference heating-rate table");
  ext->add_flag("--simulate", simulate, "add simulated rates, loss tangent calibrated on the bare 500 um point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "error[config/usage]: " << e.what() << '\n';
    return static_cast<int>(fs::ErrorCategory::config);
  }

  if (g.threads > 0) fs::default_thread_count() = g.threads;
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (*pot) run_potential(g, pa);
    else if (*ana) run_analyze(g, aa);
    else if (*heat) run_heating(g, ha);
    else if (*align) run_align(g, edges);
    else if (*fin) run_finesse(g, fa);
    else if (*skin) run_skin_depth(g, rho, freq);
    else if (*chg) run_charging(g, charge, days);
    else if (*tf) run_trace_fit(g, trace);
    else if (*fig2) run_figure2_cmd(g, f2);
    else if (*fig3) run_figure3_cmd(g, f3);
    else if (*ext) run_extrapolate(g, simulate);
  } catch (const fs::Error& e) {
    std::cerr << "error[" << fs::category_name(e.category()) << "/" << e.code() << "] in " << command << ": " << e.what()
              << '\n';
    if (!fs::last_failed_stage().empty()) std::cerr << "stage: " << fs::last_failed_stage() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error[solver/internal] in " << command << ": " << e.what() << '\n';
    return static_cast<int>(fs::ErrorCategory::solver);
  }
  return 0;
}
