#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fibershield/error.hpp"
#include "fibershield/geometry/mesh.hpp"
#include "fibershield/io/csv.hpp"

namespace fibershield {

enum class MapKind : std::uint8_t { pseudo_potential_eV = 0, dc_potential_V = 1, current_potential_V = 2, total_eV = 3 };

inline const char* to_string(MapKind k) {
  switch (k) {
    case MapKind::pseudo_potential_eV: return "pseudo_potential_eV";
    case MapKind::dc_potential_V: return "dc_potential_V";
    case MapKind::current_potential_V: return "current_potential_V";
    case MapKind::total_eV: return "total_eV";
  }
  return "?";
}

inline const char* value_column(MapKind k) {
  switch (k) {
    case MapKind::pseudo_potential_eV: return "phi_rf_eV";
    case MapKind::dc_potential_V: return "phi_dc_V";
    case MapKind::current_potential_V: return "phi_current_V";
    case MapKind::total_eV: return "phi_total_eV";
  }
  return "value";
}

// Axis-aligned sample grid; x varies fastest.
struct Grid {
  std::vector<double> x{0.0}, y{0.0}, z{0.0};

  std::size_t size() const { return x.size() * y.size() * z.size(); }
  Vec3 point(std::size_t i) const {
    const std::size_t ix = i % x.size();
    const std::size_t iy = (i / x.size()) % y.size();
    const std::size_t iz = i / (x.size() * y.size());
    return {x[ix], y[iy], z[iz]};
  }
  std::vector<Vec3> points() const {
    std::vector<Vec3> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = point(i);
    return out;
  }
  bool operator==(const Grid&) const = default;

  void validate() const {
    for (const auto* axis : {&x, &y, &z}) {
      if (axis->empty()) throw ConfigError("invalid-grid", "grid axis is empty");
      for (std::size_t i = 0; i < axis->size(); ++i) {
        if (!std::isfinite((*axis)[i])) throw ConfigError("invalid-grid", "grid coordinate is not finite");
        if (i > 0 && !((*axis)[i] > (*axis)[i - 1]))
          throw ConfigError("invalid-grid", "grid axis must be strictly increasing");
      }
    }
  }

  // Line through the origin along axis 0/1/2 covering [-half, half] in steps of `step`.
  static Grid line(int axis, double half, double step) {
    const int n = static_cast<int>(std::lround(half / step));
    std::vector<double> v;
    for (int k = -n; k <= n; ++k) v.push_back(k * step);
    Grid g;
    (axis == 0 ? g.x : axis == 1 ? g.y : g.z) = v;
    return g;
  }
};

struct PotentialMap {
  Grid grid;
  MapKind kind = MapKind::total_eV;
  std::vector<double> values;
  std::string scenario_hash;
  double solver_tolerance = 0.0;

  void validate() const {
    grid.validate();
    if (values.size() != grid.size()) throw AnalysisError("grid-mismatch", "map values do not match grid size");
    for (double v : values)
      if (!std::isfinite(v)) throw AnalysisError("non-finite", "potential map contains non-finite values");
  }
};

// Position columns plus the value column named after the map kind.
inline io::CsvWriter map_to_csv(const PotentialMap& m, const std::string& manifest_hash) {
  io::CsvWriter w(manifest_hash, {"x_m", "y_m", "z_m", value_column(m.kind)});
  w.comment(std::string("kind ") + to_string(m.kind) + ", scenario " + m.scenario_hash + ", solver_tol " +
            io::fmt(m.solver_tolerance, 6));
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    const Vec3 p = m.grid.point(i);
    w.row({io::fmt(p.x()), io::fmt(p.y()), io::fmt(p.z()), io::fmt(m.values[i], 15)});
  }
  return w;
}

namespace detail {
inline constexpr char map_magic[8] = {'F', 'S', 'P', 'M', 'A', 'P', '0', '1'};

template <class T>
void put(std::ostream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ConfigError("cache-corrupt", "truncated potential map cache");
  return v;
}
}  // namespace detail

inline void save_map_binary(const PotentialMap& m, const std::string& path) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw ConfigError("io", "cannot write '" + path + "'");
  o.write(detail::map_magic, sizeof detail::map_magic);
  detail::put(o, static_cast<std::uint8_t>(m.kind));
  detail::put(o, m.solver_tolerance);
  detail::put(o, static_cast<std::uint32_t>(m.scenario_hash.size()));
  o.write(m.scenario_hash.data(), static_cast<std::streamsize>(m.scenario_hash.size()));
  for (const auto* axis : {&m.grid.x, &m.grid.y, &m.grid.z}) {
    detail::put(o, static_cast<std::uint64_t>(axis->size()));
    o.write(reinterpret_cast<const char*>(axis->data()), static_cast<std::streamsize>(axis->size() * sizeof(double)));
  }
  detail::put(o, static_cast<std::uint64_t>(m.values.size()));
  o.write(reinterpret_cast<const char*>(m.values.data()), static_cast<std::streamsize>(m.values.size() * sizeof(double)));
}

inline PotentialMap load_map_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("missing-file", "cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, detail::map_magic, sizeof magic) != 0)
    throw ConfigError("cache-corrupt", "not a potential map cache: '" + path + "'");
  PotentialMap m;
  m.kind = static_cast<MapKind>(detail::get<std::uint8_t>(in));
  m.solver_tolerance = detail::get<double>(in);
  const auto hlen = detail::get<std::uint32_t>(in);
  m.scenario_hash.resize(hlen);
  in.read(m.scenario_hash.data(), hlen);
  for (auto* axis : {&m.grid.x, &m.grid.y, &m.grid.z}) {
    const auto n = detail::get<std::uint64_t>(in);
    axis->resize(n);
    in.read(reinterpret_cast<char*>(axis->data()), static_cast<std::streamsize>(n * sizeof(double)));
  }
  const auto nv = detail::get<std::uint64_t>(in);
  m.values.resize(nv);
  in.read(reinterpret_cast<char*>(m.values.data()), static_cast<std::streamsize>(nv * sizeof(double)));
  if (!in) throw ConfigError("cache-corrupt", "truncated potential map cache");
  m.validate();
  return m;
}

}  // namespace fibershield
