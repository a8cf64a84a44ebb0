#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fracmod/luxemburg.hpp"
#include "fracmod/modular.hpp"

namespace fracmod {

inline constexpr const char* kArtifactVersion = "fracmod 0.1.0";

// Flat keyed configuration (key = value lines). The explicit keys are the
// config's identity: the cache key and the JSON echo both derive from them.
struct StudyConfig {
  std::map<std::string, std::string> kv;

  static StudyConfig parse_file(const std::string& path);
  static StudyConfig parse_text(const std::string& text);

  bool has(const std::string& key) const { return kv.count(key) > 0; }
  std::string get(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  long long get_int(const std::string& key, long long dflt) const;
  bool get_flag(const std::string& key, bool dflt) const;
  std::vector<double> get_grid(const std::string& key, const std::vector<double>& dflt) const;

  void set(const std::string& key, const std::string& value) { kv[key] = value; }

  std::string canonical() const;  // sorted "key = value" lines
  std::string hash() const;       // fnv-1a 64 of canonical(), hex
};

// Assembled study inputs.
YoungSpec spec_from_config(const StudyConfig& cfg);
SamplingPlan plan_from_config(const StudyConfig& cfg, int dim);

struct StudyRow {
  double s = 0;
  double scaled_modular = 0;
  double limit = 0;
  double abs_err = 0;
  double rel_err = 0;
  double tail_bound = 0;
  double stderr_ = 0;
  double wall_ms = 0;
};

struct StudyResult {
  std::string kind;
  std::vector<StudyRow> rows;
  double limit_value = 0;
  double fitted_rate = 0;        // slope of log(rel_err) vs log(1-s)
  int monotone_violations = 0;   // increases of rel_err along the grid
  bool informational = false;    // hypothesis gate: u outside C^2_c
  double dual_path_max_rel = 0;  // example suites: closed vs generic limit density
  double total_wall_ms = 0;
  bool cache_hit = false;
  std::map<std::string, std::string> config;
  std::string version;

  bool operator==(const StudyResult& other) const;
};

StudyResult run_bbm_study(const StudyConfig& cfg);
StudyResult run_aniso_study(const StudyConfig& cfg);
StudyResult run_norm_study(const StudyConfig& cfg);
// which: "doublephase" | "log" | "varexp"
StudyResult run_example_suite(const std::string& which, StudyConfig cfg);
// dispatch on cfg["study"]
StudyResult run_study(const StudyConfig& cfg);

struct PropertyCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct PropertyReport {
  std::vector<PropertyCheck> checks;
  bool all_ok() const;
  std::string summary() const;
};

// inject_corrupted adds a spec with deliberately wrong declared growth bounds
// as a regular check, forcing a visible (H3) failure end to end.
PropertyReport run_property_suite(std::uint64_t seed, bool inject_corrupted = false);

// Emission. Returns the paths written.
std::vector<std::string> emit_csv(const StudyResult& r, const std::string& dir);
std::vector<std::string> emit_json(const StudyResult& r, const std::string& dir);
std::vector<std::string> emit_plot(const StudyResult& r, const std::string& dir);
std::string result_basename(const StudyResult& r);

std::string study_to_json(const StudyResult& r);
StudyResult study_from_json(const std::string& text);

// Cache: one JSON file per config hash, written atomically (tmp + rename).
std::optional<StudyResult> cache_lookup(const StudyConfig& cfg, const std::string& dir);
void cache_store(const StudyConfig& cfg, const StudyResult& r, const std::string& dir);

// Runs the study through the cache (unless cfg["cache"] = off).
StudyResult run_study_cached(const StudyConfig& cfg);

}  // namespace fracmod
