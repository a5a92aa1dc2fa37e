#pragma once

// Single runs and parameter sweeps driven by an ExperimentConfig.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lvfront/config.hpp"
#include "lvfront/serialize.hpp"

namespace lvf {

struct FileRecord {
  std::string path;  // relative to the output directory
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  std::string run_id;
  Json config;     // canonical echo, defaults filled in
  Json versions;
  Json results;    // key scalars of every analysis that ran
  double wall_clock = 0.0;  // seconds; the only non-deterministic field
  std::vector<std::string> warnings;
  std::vector<std::string> errors;
  std::vector<FileRecord> files;  // everything written except manifest.json itself
  int exit_code = 0;              // 0 ok, 2 numerical failure

  Json to_json() const;
};

/// Runs the simulation and every requested analysis, writing the outputs
/// and manifest.json into `out_dir`. Module errors are recorded in the
/// manifest rather than thrown.
RunManifest run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct SweepAxis {
  std::string key;                  // "section.key"
  std::vector<std::string> values;  // as config text
};

/// "model.b=2,2.5,3" or an inclusive range "model.b=2:4:0.5".
SweepAxis parse_axis(const std::string& spec);

struct SweepOptions {
  bool simulate = false;  // also run the full experiment per row
  unsigned threads = 1;
};

struct SweepRow {
  std::size_t index = 0;
  std::vector<std::string> point;  // one value per axis
  bool ok = true;
  std::string error;
  std::optional<double> c_uv;
  std::string prediction;  // sign prediction of c_uv
  std::string verdict;     // "match", "mismatch", "unknown" or "n/a"
  std::optional<double> u_speed, v_speed, kappa;
};

inline constexpr std::size_t kMaxSweepPoints = 10000;
inline constexpr double kZeroSpeedTol = 1e-4;

/// Cartesian product of the axes in row-major order (last axis fastest).
/// Rows run concurrently; the result is in row order regardless of
/// scheduling. Failed rows keep their error text and the sweep continues.
std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::vector<SweepAxis>& axes,
                            const std::filesystem::path& out_dir, const SweepOptions& opt = {});

CsvTable sweep_csv(const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows);

/// Sign class of a computed speed, Zero within kZeroSpeedTol.
SignVerdict speed_sign(double c) noexcept;

}  // namespace lvf
