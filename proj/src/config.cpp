#include "glshrink/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "glshrink/cli.hpp"
#include "glshrink/error.hpp"

namespace glshrink {

namespace {

constexpr std::pair<Command, std::string_view> kCommands[] = {
    {Command::Estimate, "estimate"},         {Command::Radius, "radius"},
    {Command::RiskSim, "risk-sim"},          {Command::CoverageSim, "coverage-sim"},
    {Command::ContractionSim, "contraction-sim"}, {Command::ValidatePrior, "validate-prior"},
};

template <class T>
T get_as(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config key '") + key + "': " + e.what());
  }
}

nlohmann::json matrix_to_json(const Matrix& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  const auto k = static_cast<Eigen::Index>(rows.size());
  Matrix m(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != k) {
      throw Error(ErrorCode::ConfigError, "covariance must be a square array of arrays");
    }
    for (Eigen::Index c = 0; c < k; ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

}  // namespace

std::string_view to_string(Command c) {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return name;
  }
  return "unknown";
}

Command command_from_string(std::string_view name) {
  for (const auto& [cmd, n] : kCommands) {
    if (n == name) return cmd;
  }
  throw Error(ErrorCode::ConfigError, "unknown command '" + std::string(name) + "'");
}

nlohmann::json config_to_json(const CliConfig& cfg) {
  nlohmann::json j;
  j["command"] = std::string(to_string(cfg.command));
  if (!cfg.input.empty()) j["input"] = cfg.input;
  if (!cfg.output.empty()) j["output"] = cfg.output;
  if (!cfg.json_output.empty()) j["json_output"] = cfg.json_output;
  if (cfg.prior) j["prior"] = prior_to_json(*cfg.prior, std::isfinite(prior_tuning(*cfg.prior)));
  if (!cfg.covariance_path.empty()) {
    j["covariance"] = cfg.covariance_path;
  } else if (cfg.covariance.size() > 0) {
    j["covariance"] = matrix_to_json(cfg.covariance);
  }
  if (cfg.seed) j["seed"] = *cfg.seed;
  j["threads"] = cfg.threads;
  j["alpha"] = cfg.alpha;
  if (cfg.beta) j["beta"] = *cfg.beta;
  j["rho"] = cfg.rho;
  if (cfg.multiplier) j["multiplier"] = *cfg.multiplier;
  j["k"] = cfg.k;
  if (cfg.experiment) j["experiment"] = experiment_to_json(*cfg.experiment);
  return j;
}

CliConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  static const char* const kKeys[] = {"command", "input", "output", "json_output", "prior", "covariance", "seed",
                                      "threads", "alpha",  "beta",  "rho",    "multiplier",  "k",     "experiment"};
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || key == k;
    if (!known) throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  }
  CliConfig cfg;
  if (j.contains("command")) cfg.command = command_from_string(get_as<std::string>(j, "command"));
  if (j.contains("input")) cfg.input = get_as<std::string>(j, "input");
  if (j.contains("output")) cfg.output = get_as<std::string>(j, "output");
  if (j.contains("json_output")) cfg.json_output = get_as<std::string>(j, "json_output");
  if (j.contains("prior")) cfg.prior = prior_from_json(j.at("prior"), false);
  if (j.contains("covariance")) {
    const auto& c = j.at("covariance");
    try {
      if (c.is_string()) {
        cfg.covariance_path = c.get<std::string>();
      } else {
        cfg.covariance = matrix_from_json(c);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("config key 'covariance': ") + e.what());
    }
  }
  if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("threads")) cfg.threads = get_as<int>(j, "threads");
  if (j.contains("alpha")) cfg.alpha = get_as<double>(j, "alpha");
  if (j.contains("beta")) cfg.beta = get_as<double>(j, "beta");
  if (j.contains("rho")) cfg.rho = get_as<double>(j, "rho");
  if (j.contains("multiplier")) cfg.multiplier = get_as<double>(j, "multiplier");
  if (j.contains("k")) cfg.k = get_as<int>(j, "k");
  if (j.contains("experiment")) cfg.experiment = experiment_from_json(j.at("experiment"));
  if (cfg.threads < 0) throw Error(ErrorCode::ConfigError, "threads must be ≥ 0");
  if (cfg.k < 1) throw Error(ErrorCode::ConfigError, "k must be ≥ 1");
  return cfg;
}

CliConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
  return config_from_json(j);
}

Matrix resolve_covariance(const CliConfig& cfg) {
  if (!cfg.covariance_path.empty()) return load_observations(cfg.covariance_path).values;
  return cfg.covariance;
}

}  // namespace glshrink
