#pragma once

// Experiment configuration. INI text with the sections [model], [grid],
// [ic], [analysis], [output]; the same keys nested one level deep are
// accepted as JSON. Every key is documented in README.md.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lvfront/front.hpp"
#include "lvfront/model.hpp"
#include "lvfront/pde.hpp"
#include "lvfront/supersub.hpp"

namespace lvf {

struct AnalysisConfig {
  double level = 0.5;

  bool speed = true;  // u and v front speeds over [speed_lo, speed_hi]
  double speed_lo = -1.0, speed_hi = -1.0;  // negative: second half of the run

  bool shift = false;  // h(t) against the bistable front
  double shift_lo = -1.0, shift_hi = -1.0;  // negative: last quartile
  double shift_half_width = 20.0;
  double shift_bracket = 10.0;

  bool bramson = false;
  std::optional<double> bramson_c;  // default c_u
  double bramson_lo = 100.0, bramson_hi = -1.0;
  std::vector<double> bramson_t0{0.0};

  bool kpp_match = false;  // u against the minimal-speed KPP profile at the final time
  double kpp_bracket = 20.0;

  bool extinction = false;  // sup of v over x >= 0, log-linear fit over the second half

  bool segregation = false;
  double segregation_factor = 0.5;  // cone speed as a fraction of c_uv

  bool terrace = false;

  double wave_L = 60.0;
  std::size_t wave_n = 4801;

  std::optional<SuperSubParams> pair;   // comparison pair for supersub-verify / certify-invasion
  std::optional<double> certify_time;   // default: the pair's T_star
  Lattice lattice;
};

struct OutputConfig {
  std::string dir = "out";
  std::string run_id = "run";
  std::uint64_t seed = 1;
  double snapshot_dt = 1.0;
  bool final_state = true;
};

struct ExperimentConfig {
  ModelParams model;
  Grid grid = Grid::with_spacing(-50.0, 50.0, 0.1);
  double dt = 0.004;
  bool dt_matched = false;  // dt chosen by kpp_matched_dt(d, r, dx)
  double t_end = 200.0;
  InitialCondition ic;
  AnalysisConfig analysis;
  OutputConfig output;
};

struct ConfigIssue {
  std::string key;        // "section.key", or the section for whole-section problems
  std::string invariant;  // e.g. "positivity", "margin rule", "known keys"
  std::string message;
};

struct ConfigResult {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigIssue> errors;
  bool ok() const noexcept { return config.has_value(); }
  std::string summary() const;
};

/// Flat "section.key" -> value text.
using KeyValues = std::map<std::string, std::string>;

/// Parses INI or JSON (detected by a leading '{') and validates the result.
/// All problems are reported, not only the first one.
ConfigResult parse_config(std::string_view text);
ConfigResult load_config(const std::filesystem::path& path);

/// Validates already flattened keys.
ConfigResult config_from_keys(const KeyValues& kv);

/// Canonical flattened form with every default filled in.
KeyValues config_to_keys(const ExperimentConfig& cfg);
std::string config_to_ini(const ExperimentConfig& cfg);

/// Re-validated copy with one "section.key" replaced.
ConfigResult with_override(const ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Presets shipped in the presets/ directory.
std::vector<std::string> preset_names();
std::filesystem::path preset_path(const std::string& name);

}  // namespace lvf
