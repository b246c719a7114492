#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "glshrink/harness.hpp"
#include "glshrink/linalg.hpp"
#include "glshrink/priors.hpp"

namespace glshrink {

enum class Command { Estimate, Radius, RiskSim, CoverageSim, ContractionSim, ValidatePrior };

std::string_view to_string(Command c);
/// Throws ConfigError for an unknown name.
Command command_from_string(std::string_view name);

/// Everything one CLI invocation needs. Loaded from a JSON file, then
/// overridden field by field by command-line flags.
///
/// Keys: command, input, output, json_output, prior, covariance (inline
/// k × k array or a path to a CSV file), seed, threads, alpha, beta, rho,
/// multiplier, k, experiment. Unknown keys are errors.
struct CliConfig {
  Command command = Command::Estimate;
  std::string input;
  std::string output;
  std::string json_output;
  std::optional<PriorSpec> prior;
  Matrix covariance;
  std::string covariance_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0 leaves the OpenMP default
  double alpha = 0.05;
  std::optional<double> beta;
  double rho = 1.0;
  std::optional<double> multiplier;
  int k = 1;
  std::optional<ExperimentConfig> experiment;
};

nlohmann::json config_to_json(const CliConfig& cfg);
CliConfig config_from_json(const nlohmann::json& j);
/// Reads and parses a JSON config file; IoError or ConfigError.
CliConfig load_config(const std::string& path);

/// Resolves the inline matrix or the CSV path; empty when neither is set.
Matrix resolve_covariance(const CliConfig& cfg);

}  // namespace glshrink
