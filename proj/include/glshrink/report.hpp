#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace glshrink {

inline constexpr int kReportSchemaVersion = 1;

/// One statistic of one experiment cell. Integer columns that do not apply
/// to an experiment are 0; `regime` is empty outside coverage runs.
struct ReportRow {
  std::string experiment;
  std::string prior;
  std::int64_t n = 0;
  std::int64_t q = 0;
  int k = 0;
  double tau_or_c = 0.0;
  std::string regime;
  double alpha = 0.0;
  std::string statistic;
  double value = 0.0;
  double se = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

struct Report {
  int schema_version = kReportSchemaVersion;
  nlohmann::json config;
  std::vector<ReportRow> rows;

  void append(const Report& other);
  /// First row with the given experiment/prior/n/k/statistic, or nullptr.
  const ReportRow* find(const std::string& statistic, const std::string& prior, std::int64_t n, int k,
                        double tau_or_c = -1.0, const std::string& regime = {}) const;
};

/// Fixed column order, 17 significant digits for every real.
std::string report_csv(const Report& report);
nlohmann::json report_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

/// %.17g formatting, the round-trip representation used for all output.
std::string format_double(double v);

/// Writes via a temporary file in the same directory and renames it over
/// `path`, so readers never see a partial file. Throws IoError.
void write_file_atomic(const std::string& path, const std::string& content);

void write_report(const Report& report, const std::string& csv_path, const std::string& json_path = {});

}  // namespace glshrink
