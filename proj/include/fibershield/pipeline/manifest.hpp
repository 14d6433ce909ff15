#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fibershield/geometry/scenario_io.hpp"
#include "fibershield/io/csv.hpp"

namespace fibershield {

inline constexpr const char* version = "1.0.0";

// Name of the stage that threw most recently, for error reports.
inline std::string& last_failed_stage() {
  static std::string s;
  return s;
}

// Identifies a run by its inputs only, so identical invocations produce identical
// files. Timings are kept out of the hash and out of the CSVs.
class RunManifest {
 public:
  RunManifest(std::string command, std::string out_dir) : command_(std::move(command)), out_dir_(std::move(out_dir)) {}

  void input(const std::string& key, const std::string& value) { inputs_.emplace_back(key, value); }
  void scenario(const std::string& key, const TrapScenario& s) {
    input(key, serialize_scenario(s));
    scenario_hashes_.emplace_back(key, scenario_hash(s));
  }
  void set_solver_tolerance(double t) { solver_tolerance_ = t; }

  std::string hash() const {
    std::string canon = std::string("fibershield ") + version + "\n" + command_ + "\n";
    for (const auto& [k, v] : inputs_) canon += k + "=" + v + "\n";
    return hex64(fnv1a64(canon));
  }

  // Saves a CSV under out_dir and records it.
  std::string save(const std::string& name, const io::CsvWriter& w) {
    std::filesystem::create_directories(out_dir_);
    const std::string path = (std::filesystem::path(out_dir_) / name).string();
    w.save(path);
    outputs_.push_back(name);
    return path;
  }
  void save_text(const std::string& name, const std::string& text) {
    std::filesystem::create_directories(out_dir_);
    std::ofstream o(std::filesystem::path(out_dir_) / name, std::ios::binary);
    if (!o) throw ConfigError("io", "cannot write '" + name + "'");
    o << "# fibershield manifest " << hash() << '\n' << text;
    outputs_.push_back(name);
  }

  io::CsvWriter csv(std::vector<std::string> columns) const { return io::CsvWriter(hash(), std::move(columns)); }

  template <class F>
  auto stage(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    last_failed_stage() = name;  // left set if f throws
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      stages_.emplace_back(name, seconds_since(t0));
      last_failed_stage().clear();
    } else {
      auto r = f();
      stages_.emplace_back(name, seconds_since(t0));
      last_failed_stage().clear();
      return r;
    }
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["manifest_hash"] = hash();
    j["command"] = command_;
    j["version"] = version;
    j["modules"] = {{"geometry", version}, {"field_solver", version}, {"trap_model", version},
                    {"potential_analysis", version}, {"heating_model", version}, {"metrology", version}};
    j["solver_tolerance"] = solver_tolerance_;
    auto& sc = j["scenarios"] = nlohmann::ordered_json::object();
    for (const auto& [k, h] : scenario_hashes_) sc[k] = h;
    auto& in = j["inputs"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : inputs_) in[k] = v;
    j["outputs"] = outputs_;
    auto& st = j["stage_seconds"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : stages_) st[k] = v;
    return j;
  }

  void write() const {
    std::filesystem::create_directories(out_dir_);
    std::ofstream o(std::filesystem::path(out_dir_) / "manifest.json", std::ios::binary);
    o << to_json().dump(2) << '\n';
  }

  const std::string& out_dir() const { return out_dir_; }
  const std::vector<std::string>& outputs() const { return outputs_; }

 private:
  static double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  std::string command_, out_dir_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> scenario_hashes_;
  std::vector<std::string> outputs_;
  std::vector<std::pair<std::string, double>> stages_;
  double solver_tolerance_ = 0.0;
};

}  // namespace fibershield
