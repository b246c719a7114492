#include "glshrink/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include "glshrink/config.hpp"
#include "glshrink/credible.hpp"
#include "glshrink/error.hpp"
#include "glshrink/estimator.hpp"
#include "glshrink/harness.hpp"
#include "glshrink/report.hpp"

namespace glshrink {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                        : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(const std::string& field, double& out) {
  if (field.empty()) return false;
  const char* first = field.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace

Observations parse_observations(std::istream& in) {
  Observations obs;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0, width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row(fields.size());
    std::size_t bad = fields.size();
    for (std::size_t c = 0; c < fields.size() && bad == fields.size(); ++c) {
      if (!parse_number(fields[c], row[c])) bad = c;
    }
    if (first) {
      first = false;
      width = fields.size();
      if (bad != fields.size()) {
        obs.had_header = true;
        continue;
      }
    }
    if (fields.size() != width) {
      throw Error(ErrorCode::RaggedRows, "row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                             " fields, expected " + std::to_string(width));
    }
    if (bad != fields.size()) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(line_no) + ", column " + std::to_string(bad + 1) +
                                             ": '" + fields[bad] + "' is not a number");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, "no numeric rows");
  obs.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      obs.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return obs;
}

Observations load_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return parse_observations(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + std::string(e.what()).substr(to_string(e.code()).size() + 2));
  }
}

namespace {

// Flag values; `count()` on the option tells whether the flag was given.
struct Flags {
  std::string config, input, output, json_output, family, L, covariance;
  double a = 0, tau = 0, d = 0, c = 0, alpha = 0, beta = 0, rho = 0, multiplier = 0;
  std::uint64_t seed = 0;
  int threads = 0, k = 0;
  std::int64_t replicates = 0;
  bool print_config = false;
};

struct Options {
  CLI::Option *input, *output, *json_output, *family, *L, *a, *tau, *d, *c, *covariance, *seed, *threads, *alpha,
      *beta, *rho, *multiplier, *k, *replicates;
};

Options add_flags(CLI::App* sub, Flags& f) {
  Options o{};
  sub->add_option("--config", f.config, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  o.input = sub->add_option("-i,--input", f.input, "Observation CSV (n rows, k columns, optional header)");
  o.output = sub->add_option("-o,--output", f.output, "Output CSV path (default: stdout)");
  o.json_output = sub->add_option("--json-output", f.json_output, "Also write a JSON report (simulations)");
  o.family = sub->add_option("--family", f.family, "Prior family")->check(CLI::IsMember({"gl", "eig"}));
  o.L = sub->add_option("--L", f.L, "Slowly varying factor: horseshoe, constant, saturating_power(p)");
  o.a = sub->add_option("--a", f.a, "Global-local exponent a");
  o.tau = sub->add_option("--tau", f.tau, "Global-local tuning tau");
  o.d = sub->add_option("--d", f.d, "EIG shape d");
  o.c = sub->add_option("--c", f.c, "EIG scale c");
  o.covariance = sub->add_option("--covariance", f.covariance, "Covariance CSV (k x k); default identity");
  o.seed = sub->add_option("--seed", f.seed, "Master seed for simulations");
  o.threads = sub->add_option("--threads", f.threads, "Worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
  o.alpha = sub->add_option("--alpha", f.alpha, "Credible level is 1 - alpha");
  o.beta = sub->add_option("--beta", f.beta, "Radius constant beta (default alpha + 0.01)");
  o.rho = sub->add_option("--rho", f.rho, "Radius constant rho");
  o.multiplier = sub->add_option("--multiplier", f.multiplier, "Radius multiplier L (default from alpha, beta)");
  o.k = sub->add_option("--k", f.k, "Dimension for validate-prior");
  o.replicates = sub->add_option("--replicates", f.replicates, "Replicates per simulation cell");
  sub->add_flag("--print-config", f.print_config, "Print the merged config as JSON and exit");
  return o;
}

PriorSpec default_prior(bool eig) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (eig) return ExpInvGamma{0.5, nan};
  GlobalLocal gl;
  gl.tau = nan;
  return gl;
}

// Applies flags over the config file values.
void merge_flags(CliConfig& cfg, const Flags& f, const Options& o) {
  if (*o.input) cfg.input = f.input;
  if (*o.output) cfg.output = f.output;
  if (*o.json_output) cfg.json_output = f.json_output;
  if (*o.covariance) {
    cfg.covariance_path = f.covariance;
    cfg.covariance.resize(0, 0);
  }
  if (*o.seed) cfg.seed = f.seed;
  if (*o.threads) cfg.threads = f.threads;
  if (*o.alpha) cfg.alpha = f.alpha;
  if (*o.beta) cfg.beta = f.beta;
  if (*o.rho) cfg.rho = f.rho;
  if (*o.multiplier) cfg.multiplier = f.multiplier;
  if (*o.k) cfg.k = f.k;

  const bool any_prior = *o.family || *o.L || *o.a || *o.tau || *o.d || *o.c;
  if (!any_prior) return;
  const bool want_eig = *o.family ? f.family == "eig" : (cfg.prior ? !is_global_local(*cfg.prior) : (*o.d || *o.c));
  PriorSpec p = cfg.prior && is_global_local(*cfg.prior) != want_eig ? *cfg.prior : default_prior(want_eig);
  if (auto* gl = std::get_if<GlobalLocal>(&p)) {
    if (*o.d || *o.c) throw Error(ErrorCode::ConfigError, "--d/--c apply to the eig family");
    if (*o.L) gl->L = slowly_varying_from_name(f.L);
    if (*o.a) gl->a = f.a;
    if (*o.tau) gl->tau = f.tau;
  } else {
    auto& e = std::get<ExpInvGamma>(p);
    if (*o.L || *o.a || *o.tau) throw Error(ErrorCode::ConfigError, "--L/--a/--tau apply to the gl family");
    if (*o.d) e.d = f.d;
    if (*o.c) e.c = f.c;
  }
  cfg.prior = p;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    write_file_atomic(path, content);
  }
}

const PriorSpec& require_tuned_prior(const CliConfig& cfg) {
  if (!cfg.prior) throw Error(ErrorCode::ConfigError, "a prior is required (config 'prior' or --family)");
  if (!std::isfinite(prior_tuning(*cfg.prior))) throw Error(ErrorCode::ConfigError, "prior needs tau (gl) or c (eig)");
  return *cfg.prior;
}

Covariance covariance_or_identity(const CliConfig& cfg, int k) {
  const Matrix m = resolve_covariance(cfg);
  if (m.size() == 0) return Covariance::identity(k);
  if (m.rows() != k || m.cols() != k) {
    throw Error(ErrorCode::DimensionMismatch, "covariance is " + std::to_string(m.rows()) + "x" +
                                                  std::to_string(m.cols()) + " but observations have k=" +
                                                  std::to_string(k));
  }
  return Covariance::make(m);
}

int cmd_estimate(const CliConfig& cfg) {
  const PriorSpec& prior = require_tuned_prior(cfg);
  if (cfg.input.empty()) throw Error(ErrorCode::ConfigError, "estimate needs --input");
  const Observations obs = load_observations(cfg.input);
  const int k = static_cast<int>(obs.values.cols());
  const Covariance cov = covariance_or_identity(cfg, k);
  const EstimateBatch est = posterior_mean_batch(obs.values, cov, prior);
  std::ostringstream out;
  for (int j = 0; j < k; ++j) out << "estimate_" << j + 1 << ',';
  out << "weight,s\n";
  for (Eigen::Index i = 0; i < obs.values.rows(); ++i) {
    for (int j = 0; j < k; ++j) out << format_double(est.estimates(i, j)) << ',';
    out << format_double(est.weights(i)) << ',' << format_double(est.stats(i)) << '\n';
  }
  emit(cfg.output, out.str());
  std::cerr << "estimate: " << obs.values.rows() << " rows, k=" << k << '\n';
  return 0;
}

int cmd_radius(const CliConfig& cfg) {
  const PriorSpec& prior = require_tuned_prior(cfg);
  if (cfg.input.empty()) throw Error(ErrorCode::ConfigError, "radius needs --input");
  const Observations obs = load_observations(cfg.input);
  const int k = static_cast<int>(obs.values.cols());
  const Covariance cov = covariance_or_identity(cfg, k);
  RadiusOptions opt;
  opt.beta = cfg.beta;
  opt.rho = cfg.rho;
  opt.multiplier = cfg.multiplier;
  // Validates the constants before any quadrature runs.
  (void)adjusted_radius(1.0, prior, k, cfg.alpha, opt);
  const EstimateBatch est = posterior_mean_batch(obs.values, cov, prior);
  const std::vector<double> raw = credible_radius_batch(cfg.alpha, obs.values, cov, prior);
  std::ostringstream out;
  out << "s,weight,raw_radius,adjusted_radius\n";
  for (Eigen::Index i = 0; i < obs.values.rows(); ++i) {
    const RadiusResult r = adjusted_radius(raw[static_cast<std::size_t>(i)], prior, k, cfg.alpha, opt);
    out << format_double(est.stats(i)) << ',' << format_double(est.weights(i)) << ',' << format_double(r.raw_radius)
        << ',' << format_double(r.adjusted_radius) << '\n';
  }
  emit(cfg.output, out.str());
  std::cerr << "radius: " << obs.values.rows() << " rows, k=" << k << ", alpha=" << cfg.alpha << '\n';
  return 0;
}

int cmd_validate(const CliConfig& cfg) {
  if (!cfg.prior) throw Error(ErrorCode::ConfigError, "validate-prior needs a prior");
  PriorSpec p = *cfg.prior;
  if (!std::isfinite(prior_tuning(p))) p = with_tuning(p, 0.01);
  const ValidationReport rep = validate_prior(p, cfg.k);
  if (!rep.ok()) {
    for (const auto& v : rep.violations) std::cerr << "invalid prior: " << v << '\n';
    return 2;
  }
  emit(cfg.output, "ok " + prior_label(p) + " k=" + std::to_string(cfg.k) + "\n");
  return 0;
}

int cmd_simulate(const CliConfig& cfg, ExperimentKind kind, const Options& o, const Flags& f) {
  ExperimentConfig exp = cfg.experiment.value_or(ExperimentConfig{});
  if (cfg.experiment && exp.kind != kind) {
    throw Error(ErrorCode::ConfigError, "experiment kind '" + std::string(to_string(exp.kind)) +
                                            "' does not match the command");
  }
  exp.kind = kind;
  if (!cfg.experiment) {
    if (kind == ExperimentKind::Contraction) exp.replicates = 100;
    if (kind == ExperimentKind::Coverage) {
      exp.replicates = 2000;
      exp.dims = {2};
    }
  }
  if (cfg.prior) {
    exp.priors = {*cfg.prior};
  } else if (exp.priors.empty()) {
    exp.priors = {default_prior(false), default_prior(true)};
  }
  const Matrix cov = resolve_covariance(cfg);
  if (cov.size() > 0) {
    exp.covariance = cov;
    exp.dims = {static_cast<int>(cov.rows())};
  }
  if (cfg.seed) exp.master_seed = *cfg.seed;
  if (*o.replicates) exp.replicates = f.replicates;
  if (*o.alpha) exp.alpha = cfg.alpha;
  if (cfg.beta) exp.beta = cfg.beta;
  if (*o.rho) exp.rho = cfg.rho;
  if (cfg.multiplier) exp.multiplier = cfg.multiplier;
  validate_experiment(exp);
  const Report rep = run_experiment(exp);
  emit(cfg.output, report_csv(rep));
  if (!cfg.json_output.empty()) write_file_atomic(cfg.json_output, report_json(rep).dump(2) + "\n");
  std::cerr << to_string(kind) << ": " << rep.rows.size() << " rows, seed " << exp.master_seed << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Global-local shrinkage estimation, credible sets and simulation experiments", "glshrink"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  Flags f;
  const std::pair<Command, const char*> cmds[] = {
      {Command::Estimate, "Posterior mean estimates, weights and s for each observation row"},
      {Command::Radius, "Raw and adjusted credible radii for each observation row"},
      {Command::RiskSim, "Risk ratio experiment over an n grid"},
      {Command::CoverageSim, "S/M/L credible-ball coverage experiment"},
      {Command::ContractionSim, "Posterior contraction experiment"},
      {Command::ValidatePrior, "Check a prior's conditions; exit 2 if violated"},
  };
  std::vector<std::pair<CLI::App*, Options>> subs;
  for (const auto& [cmd, desc] : cmds) {
    CLI::App* sub = app.add_subcommand(std::string(to_string(cmd)), desc);
    subs.emplace_back(sub, add_flags(sub, f));
  }
  app.footer(
      "Precedence: command-line flag > config file value > built-in default.\n"
      "Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i].first->parsed()) continue;
      const Command cmd = cmds[i].first;
      const Options& o = subs[i].second;
      CliConfig cfg = f.config.empty() ? CliConfig{} : load_config(f.config);
      cfg.command = cmd;
      merge_flags(cfg, f, o);
      if (f.print_config) {
        std::cout << config_to_json(cfg).dump(2) << '\n';
        return 0;
      }
      if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
      switch (cmd) {
        case Command::Estimate: return cmd_estimate(cfg);
        case Command::Radius: return cmd_radius(cfg);
        case Command::ValidatePrior: return cmd_validate(cfg);
        case Command::RiskSim: return cmd_simulate(cfg, ExperimentKind::Risk, o, f);
        case Command::CoverageSim: return cmd_simulate(cfg, ExperimentKind::Coverage, o, f);
        case Command::ContractionSim: return cmd_simulate(cfg, ExperimentKind::Contraction, o, f);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_config_error(e.code()) ? 2 : 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("glshrink");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace glshrink
