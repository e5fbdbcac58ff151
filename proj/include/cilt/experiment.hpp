#pragma once

#include <map>
#include <string>
#include <vector>

#include "cilt/numerics.hpp"

namespace cilt {

// Flat, typed key-value configuration with sections. Numbers carry exactness:
// rationals are written "p/q" and reach the parameter module unrounded.
// Unknown keys are rejected at validation.
struct ConfigValue {
  std::string raw;

  long long as_int() const;
  double as_real() const;          // accepts "p/q"
  Complex as_complex() const;      // "re" or "re+imi" / "re-imi"
  bool has_slash() const { return raw.find('/') != std::string::npos; }
  long long rat_num() const;
  long long rat_den() const;
};

struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, ConfigValue> keys;  // "section.key" -> value
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir;

  bool has(const std::string& k) const { return keys.count(k) > 0; }
  const ConfigValue& at(const std::string& k) const;
  ConfigValue get_or(const std::string& k, const std::string& fallback) const;
};

// Parses the "[section]\nkey = value" format; the experiment name comes from
// the top-level key `experiment` or the CLI subcommand.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Run record: config echo, results with provenance tags, wall time. Complex
// values serialize as {re, im} pairs of decimal strings.
struct RunRecord {
  std::string experiment;
  std::map<std::string, ConfigValue> config_echo;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::string library_version;
  // name -> (value, provenance)
  struct Entry {
    Complex value{0, 0};
    double error = 0.0;
    std::string provenance;
    bool is_complex = false;
  };
  std::map<std::string, Entry> results;

  std::string to_json() const;
  static RunRecord from_json(const std::string& text);
};

// Validates and dispatches to the owning module; writes the record (and any
// CSV plot tables) under out_dir when set.
RunRecord run_experiment(const ExperimentConfig& config);

// Field-wise comparison; sigma-aware for MC entries. Returns the report text
// and sets ok = false on breach.
struct CompareReport {
  bool ok = true;
  std::string text;
};
CompareReport compare_records(const RunRecord& a, const RunRecord& b,
                              double tolerance);

}  // namespace cilt
