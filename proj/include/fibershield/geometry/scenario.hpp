#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "fibershield/constants.hpp"
#include "fibershield/error.hpp"

namespace fibershield {

enum class Shielding { unshielded, metal_tube, gold_mask };

inline std::string_view to_string(Shielding s) {
  switch (s) {
    case Shielding::unshielded: return "unshielded";
    case Shielding::metal_tube: return "metal_tube";
    case Shielding::gold_mask: return "gold_mask";
  }
  return "?";
}

inline Shielding parse_shielding(std::string_view s) {
  if (s == "unshielded" || s == "none" || s == "bare") return Shielding::unshielded;
  if (s == "metal_tube" || s == "tube") return Shielding::metal_tube;
  if (s == "gold_mask" || s == "mask") return Shielding::gold_mask;
  throw ConfigError("invalid-scenario", "unknown shielding '" + std::string(s) + "'");
}

struct TubeParams {
  double inner_diameter = 150e-6;
  double outer_diameter = 190e-6;
  bool operator==(const TubeParams&) const = default;
};

struct MaskParams {
  double thickness = 10e-6;
  double exposed_radius = 30e-6;
  bool operator==(const MaskParams&) const = default;
};

// Segmented blade trap. Four blades run parallel to the y (trap) axis with their
// knife edges at `edge_distance` from it, at 45/135/225/315 degrees in the x-z
// plane. Each blade carries a central RF segment and two endcap segments, so the
// fibers enter along z through the gaps between blade pairs.
struct BladeGeometry {
  double rf_width = 2.2e-3;         // RF segment length along y
  double edge_distance = 600e-6;    // trap axis to blade edge
  double height = 1.5e-3;           // radial extent of each blade
  double endcap_gap = 100e-6;       // gap between RF and endcap segments
  double endcap_length = 2.0e-3;
  bool operator==(const BladeGeometry&) const = default;
};

struct TrapScenario {
  Shielding shielding = Shielding::gold_mask;

  double fiber_diameter = 125e-6;
  double fiber_length = 60e-3;
  int fiber_count = 2;                   // 2: symmetric cavity, fibers at z = +-d
  double exposed_tip_length = 200e-6;    // unshielded: charged lateral segment

  std::optional<TubeParams> tube;
  std::optional<MaskParams> mask;

  double cavity_half_length = 115e-6;    // d, ion to mirror; L = 2d

  BladeGeometry blades;

  double rf_amplitude = 30.0;                                     // V0
  double rf_angular_frequency = 2.0 * constants::pi * 20e6;       // Omega_RF
  double endcap_voltage = 100.0;
  double shield_voltage = 0.0;
  bool shield_voltage_matched = false;   // bias the shield at the bare-trap potential of its front face

  double surface_current_density = 1e-12;  // i+, A/m^2
  double fiber_conductivity = 1e-16;       // S/m

  double ion_mass = constants::barium138_ion_mass;
  double temperature = 295.0;
  double relative_permittivity = 3.8;
  double loss_tangent = 1e-4;
  double axial_secular_frequency = 2.0 * constants::pi * 2.85e6;  // along the fiber axis, rad/s

  double cavity_length() const { return 2.0 * cavity_half_length; }
  void set_cavity_length(double L) { cavity_half_length = 0.5 * L; }
  double fiber_radius() const { return 0.5 * fiber_diameter; }

  // Radius of the outermost metal around the fiber (or the fiber itself).
  double outer_radius() const {
    switch (shielding) {
      case Shielding::metal_tube: return tube ? 0.5 * tube->outer_diameter : fiber_radius();
      case Shielding::gold_mask: return fiber_radius() + (mask ? mask->thickness : 0.0);
      default: return fiber_radius();
    }
  }

  bool operator==(const TrapScenario&) const = default;
};

inline TrapScenario make_scenario(Shielding s) {
  TrapScenario sc;
  sc.shielding = s;
  if (s == Shielding::metal_tube) sc.tube = TubeParams{};
  if (s == Shielding::gold_mask) sc.mask = MaskParams{};
  return sc;
}

namespace detail {
inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("invalid-scenario", msg);
}
inline void require_positive(double v, const char* name) {
  require(std::isfinite(v) && v > 0.0, std::string(name) + " must be > 0");
}
}  // namespace detail

inline void validate(const TrapScenario& s) {
  using detail::require;
  using detail::require_positive;
  require_positive(s.fiber_diameter, "fiber_diameter");
  require_positive(s.fiber_length, "fiber_length");
  require_positive(s.exposed_tip_length, "exposed_tip_length");
  require_positive(s.cavity_half_length, "cavity_half_length");
  require(s.fiber_count == 1 || s.fiber_count == 2, "fiber_count must be 1 or 2");
  require(s.exposed_tip_length < s.fiber_length, "exposed_tip_length must be shorter than the fiber");
  require_positive(s.blades.rf_width, "blades.rf_width");
  require_positive(s.blades.edge_distance, "blades.edge_distance");
  require_positive(s.blades.height, "blades.height");
  require_positive(s.blades.endcap_gap, "blades.endcap_gap");
  require_positive(s.blades.endcap_length, "blades.endcap_length");
  require_positive(s.rf_angular_frequency, "rf_angular_frequency");
  require(std::isfinite(s.rf_amplitude) && std::isfinite(s.endcap_voltage) && std::isfinite(s.shield_voltage),
          "voltages must be finite");
  require(std::isfinite(s.surface_current_density) && s.surface_current_density >= 0.0,
          "surface_current_density must be >= 0");
  require_positive(s.fiber_conductivity, "fiber_conductivity");
  require_positive(s.ion_mass, "ion_mass");
  require_positive(s.temperature, "temperature");
  require(std::isfinite(s.relative_permittivity) && s.relative_permittivity >= 1.0,
          "relative_permittivity must be >= 1");
  require(std::isfinite(s.loss_tangent) && s.loss_tangent >= 0.0, "loss_tangent must be >= 0");
  require_positive(s.axial_secular_frequency, "axial_secular_frequency");

  switch (s.shielding) {
    case Shielding::unshielded:
      require(!s.tube && !s.mask, "unshielded scenario must not carry tube or mask parameters");
      break;
    case Shielding::metal_tube:
      require(s.tube.has_value() && !s.mask, "metal_tube scenario needs tube parameters and no mask");
      require_positive(s.tube->inner_diameter, "tube.inner_diameter");
      require_positive(s.tube->outer_diameter, "tube.outer_diameter");
      require(s.tube->inner_diameter > s.fiber_diameter, "tube inner diameter must exceed the fiber diameter");
      require(s.tube->outer_diameter > s.tube->inner_diameter, "tube outer diameter must exceed the inner diameter");
      break;
    case Shielding::gold_mask:
      require(s.mask.has_value() && !s.tube, "gold_mask scenario needs mask parameters and no tube");
      require_positive(s.mask->thickness, "mask.thickness");
      require_positive(s.mask->exposed_radius, "mask.exposed_radius");
      require(s.mask->exposed_radius <= s.fiber_radius(), "exposed radius must not exceed the fiber radius");
      require(s.mask->thickness < s.cavity_half_length, "mask front would reach the ion");
      break;
  }

  // Fibers pass between neighbouring blades; keep a clearance of one fiber radius.
  const double edge_offset = s.blades.edge_distance * std::sqrt(0.5);
  require(edge_offset > s.outer_radius() + s.fiber_radius(), "fiber assembly collides with the blade edges");
}

}  // namespace fibershield
