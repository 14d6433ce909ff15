#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <yaml-cpp/yaml.h>

#include "fibershield/geometry/scenario.hpp"

namespace fibershield {

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

enum class QuantityKind { length, frequency, plain };

// "125 um", "60mm", "2.2e-3", "20 MHz". Lengths normalise to meters, frequencies to Hz.
inline double parse_quantity(const std::string& text, QuantityKind kind, const std::string& key) {
  const std::string s = trim(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("parse", "key '" + key + "': cannot parse number from '" + text + "'");
  }
  const std::string unit = trim(s.substr(used));
  if (unit.empty()) return value;
  if (kind == QuantityKind::length) {
    if (unit == "m") return value;
    if (unit == "mm") return value * 1e-3;
    if (unit == "um" || unit == "\xC2\xB5m" || unit == "\xCE\xBCm") return value * 1e-6;
    if (unit == "nm") return value * 1e-9;
    if (unit == "cm") return value * 1e-2;
  } else if (kind == QuantityKind::frequency) {
    if (unit == "Hz") return value;
    if (unit == "kHz") return value * 1e3;
    if (unit == "MHz") return value * 1e6;
    if (unit == "GHz") return value * 1e9;
  }
  throw ConfigError("parse", "key '" + key + "': unsupported unit '" + unit + "'");
}

inline std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class ScenarioReader {
 public:
  explicit ScenarioReader(const YAML::Node& root) : root_(root) {}

  void read(const char* section, const char* key, double& out, QuantityKind kind) const {
    const YAML::Node node = lookup(section, key);
    if (node) out = parse_quantity(node.as<std::string>(), kind, full(section, key));
  }
  void read_int(const char* section, const char* key, int& out) const {
    const YAML::Node node = lookup(section, key);
    if (!node) return;
    try {
      out = node.as<int>();
    } catch (const YAML::Exception&) {
      throw ConfigError("parse", "key '" + full(section, key) + "' must be an integer");
    }
  }
  bool has_section(const char* section) const { return static_cast<bool>(root_[section]); }

  // Missing keys come back as an invalid node, so `if (node)` means "present".
  YAML::Node lookup(const char* section, const char* key) const {
    if (section == nullptr) return root_[key];
    const YAML::Node sec = root_[section];
    if (!sec) return sec;
    if (!sec.IsMap()) throw ConfigError("parse", std::string("section '") + section + "' must be a map");
    return sec[key];
  }

 private:
  static std::string full(const char* section, const char* key) {
    return section ? std::string(section) + "." + key : std::string(key);
  }
  YAML::Node root_;
};

}  // namespace detail

inline TrapScenario parse_scenario(const std::string& text) {
  using detail::QuantityKind;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("parse", std::string("scenario is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("parse", "scenario root must be a map");
  const detail::ScenarioReader r(root);

  TrapScenario s;
  if (root["shielding"]) s.shielding = parse_shielding(root["shielding"].as<std::string>());

  r.read("fiber", "diameter", s.fiber_diameter, QuantityKind::length);
  r.read("fiber", "length", s.fiber_length, QuantityKind::length);
  r.read_int("fiber", "count", s.fiber_count);
  r.read("fiber", "exposed_tip_length", s.exposed_tip_length, QuantityKind::length);

  if (r.has_section("tube")) {
    TubeParams t;
    r.read("tube", "inner_diameter", t.inner_diameter, QuantityKind::length);
    r.read("tube", "outer_diameter", t.outer_diameter, QuantityKind::length);
    s.tube = t;
  } else if (s.shielding == Shielding::metal_tube) {
    s.tube = TubeParams{};
  }
  if (r.has_section("mask")) {
    MaskParams m;
    r.read("mask", "thickness", m.thickness, QuantityKind::length);
    r.read("mask", "exposed_radius", m.exposed_radius, QuantityKind::length);
    if (const auto d = r.lookup("mask", "exposed_diameter"))
      m.exposed_radius = 0.5 * detail::parse_quantity(d.as<std::string>(), QuantityKind::length, "mask.exposed_diameter");
    s.mask = m;
  } else if (s.shielding == Shielding::gold_mask) {
    s.mask = MaskParams{};
  }

  r.read("cavity", "half_length", s.cavity_half_length, QuantityKind::length);
  if (const auto L = r.lookup("cavity", "length")) {
    if (r.lookup("cavity", "half_length"))
      throw ConfigError("invalid-scenario", "give either cavity.length or cavity.half_length, not both");
    s.set_cavity_length(detail::parse_quantity(L.as<std::string>(), QuantityKind::length, "cavity.length"));
  }

  r.read("blades", "rf_width", s.blades.rf_width, QuantityKind::length);
  r.read("blades", "edge_distance", s.blades.edge_distance, QuantityKind::length);
  r.read("blades", "height", s.blades.height, QuantityKind::length);
  r.read("blades", "endcap_gap", s.blades.endcap_gap, QuantityKind::length);
  r.read("blades", "endcap_length", s.blades.endcap_length, QuantityKind::length);

  r.read("drive", "rf_amplitude", s.rf_amplitude, QuantityKind::plain);
  r.read("drive", "rf_angular_frequency", s.rf_angular_frequency, QuantityKind::plain);
  if (const auto f = r.lookup("drive", "rf_frequency"))
    s.rf_angular_frequency = 2.0 * constants::pi *
        detail::parse_quantity(f.as<std::string>(), QuantityKind::frequency, "drive.rf_frequency");
  r.read("drive", "endcap_voltage", s.endcap_voltage, QuantityKind::plain);
  if (const auto v = r.lookup("drive", "shield_voltage"); v && v.as<std::string>() == "matched")
    s.shield_voltage_matched = true;
  else
    r.read("drive", "shield_voltage", s.shield_voltage, QuantityKind::plain);

  r.read("charging", "surface_current_density", s.surface_current_density, QuantityKind::plain);
  r.read("charging", "fiber_conductivity", s.fiber_conductivity, QuantityKind::plain);

  r.read("ion", "mass", s.ion_mass, QuantityKind::plain);
  r.read("ion", "axial_angular_frequency", s.axial_secular_frequency, QuantityKind::plain);
  if (const auto f = r.lookup("ion", "axial_frequency"))
    s.axial_secular_frequency = 2.0 * constants::pi *
        detail::parse_quantity(f.as<std::string>(), QuantityKind::frequency, "ion.axial_frequency");

  r.read("material", "relative_permittivity", s.relative_permittivity, QuantityKind::plain);
  r.read("material", "loss_tangent", s.loss_tangent, QuantityKind::plain);
  r.read("material", "temperature", s.temperature, QuantityKind::plain);

  validate(s);
  return s;
}

inline TrapScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing-file", "cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// Canonical form: SI numbers at round-trip precision, fixed key order.
inline std::string serialize_scenario(const TrapScenario& s) {
  using detail::format_exact;
  std::ostringstream o;
  o << "shielding: " << to_string(s.shielding) << '\n';
  o << "fiber:\n"
    << "  diameter: " << format_exact(s.fiber_diameter) << '\n'
    << "  length: " << format_exact(s.fiber_length) << '\n'
    << "  count: " << s.fiber_count << '\n'
    << "  exposed_tip_length: " << format_exact(s.exposed_tip_length) << '\n';
  if (s.tube)
    o << "tube:\n"
      << "  inner_diameter: " << format_exact(s.tube->inner_diameter) << '\n'
      << "  outer_diameter: " << format_exact(s.tube->outer_diameter) << '\n';
  if (s.mask)
    o << "mask:\n"
      << "  thickness: " << format_exact(s.mask->thickness) << '\n'
      << "  exposed_radius: " << format_exact(s.mask->exposed_radius) << '\n';
  o << "cavity:\n"
    << "  half_length: " << format_exact(s.cavity_half_length) << '\n';
  o << "blades:\n"
    << "  rf_width: " << format_exact(s.blades.rf_width) << '\n'
    << "  edge_distance: " << format_exact(s.blades.edge_distance) << '\n'
    << "  height: " << format_exact(s.blades.height) << '\n'
    << "  endcap_gap: " << format_exact(s.blades.endcap_gap) << '\n'
    << "  endcap_length: " << format_exact(s.blades.endcap_length) << '\n';
  o << "drive:\n"
    << "  rf_amplitude: " << format_exact(s.rf_amplitude) << '\n'
    << "  rf_angular_frequency: " << format_exact(s.rf_angular_frequency) << '\n'
    << "  endcap_voltage: " << format_exact(s.endcap_voltage) << '\n'
    << "  shield_voltage: " << (s.shield_voltage_matched ? std::string("matched") : format_exact(s.shield_voltage)) << '\n';
  o << "charging:\n"
    << "  surface_current_density: " << format_exact(s.surface_current_density) << '\n'
    << "  fiber_conductivity: " << format_exact(s.fiber_conductivity) << '\n';
  o << "ion:\n"
    << "  mass: " << format_exact(s.ion_mass) << '\n'
    << "  axial_angular_frequency: " << format_exact(s.axial_secular_frequency) << '\n';
  o << "material:\n"
    << "  relative_permittivity: " << format_exact(s.relative_permittivity) << '\n'
    << "  loss_tangent: " << format_exact(s.loss_tangent) << '\n'
    << "  temperature: " << format_exact(s.temperature) << '\n';
  return o.str();
}

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string scenario_hash(const TrapScenario& s) { return hex64(fnv1a64(serialize_scenario(s))); }

}  // namespace fibershield
