#pragma once

// Deterministic text output: CSV with a header row, '.' as the decimal
// separator and a trailing newline; JSON via nlohmann::json.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lvfront/front.hpp"
#include "lvfront/model.hpp"
#include "lvfront/pde.hpp"
#include "lvfront/supersub.hpp"
#include "lvfront/wave.hpp"

namespace lvf {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form, independent of the C locale. NaN and
/// infinities print as "nan", "inf", "-inf".
std::string format_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  void add_row(const std::vector<double>& values);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Empty cell for nullopt.
std::string cell(const std::optional<double>& x);

void write_text(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

CsvTable state_csv(const Grid& grid, const FieldState& state);
CsvTable wave_csv(const WaveProfile& profile);
CsvTable front_trace_csv(const FrontTrace& trace);
CsvTable bramson_csv(const BramsonFit& fit);
CsvTable series_csv(const std::string& name, const std::vector<double>& t, const std::vector<double>& y);

Json to_json(const ModelParams& p);
Json to_json(const Grid& g);
Json to_json(const SpeedSet& s);
Json to_json(const CharacteristicRoots& r);
Json to_json(const SignPrediction& s);
Json to_json(const DecayFit& f);
Json wave_summary(const WaveProfile& w);
Json to_json(const SuperSubParams& s);
Json to_json(const ConstraintVerdict& v);
Json to_json(const ResidualReport& r);
Json to_json(const CertificateResult& c);
Json to_json(const SpeedEstimate& s);
Json to_json(const BramsonFit& b);
Json to_json(const ShiftEstimate& s);
Json to_json(const LogLinearFit& f);
Json to_json(const TerraceReport& t);

/// Pretty-printed with two-space indentation and a trailing newline.
std::string dump(const Json& j);

}  // namespace lvf
