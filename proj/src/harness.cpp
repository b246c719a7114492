#include "glshrink/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "glshrink/error.hpp"
#include "glshrink/estimator.hpp"
#include "glshrink/posterior.hpp"
#include "glshrink/quadrature.hpp"
#include "glshrink/sampler.hpp"
#include "glshrink/specfun.hpp"
#include "glshrink/weight_table.hpp"

namespace glshrink {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Sample mean and standard error, summed in index order.
MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  const auto n = static_cast<double>(v.size());
  if (v.empty()) return out;
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

Covariance covariance_for(const ExperimentConfig& cfg, int k) {
  if (cfg.covariance.size() == 0) return Covariance::identity(k);
  if (cfg.covariance.rows() != k || cfg.covariance.cols() != k) {
    throw Error(ErrorCode::DimensionMismatch, "covariance is " + std::to_string(cfg.covariance.rows()) + "x" +
                                                  std::to_string(cfg.covariance.cols()) + " but k=" + std::to_string(k));
  }
  return Covariance::make(cfg.covariance);
}

PriorSpec tuned_prior(const PriorSpec& p, std::int64_t n, std::int64_t q) {
  if (std::isfinite(prior_tuning(p))) return p;
  const double a = prior_exponent(p);
  return with_tuning(p, is_global_local(p) ? tau_from_sparsity(n, q, a) : c_from_sparsity(n, q, a));
}

std::string cell_label(std::string_view kind, const PriorSpec& p, int k, std::int64_t n, double tuning,
                       std::string_view extra = {}) {
  return std::string(kind) + "|" + prior_label(p) + "|k=" + std::to_string(k) + "|n=" + std::to_string(n) +
         "|t=" + format_double(tuning) + (extra.empty() ? "" : "|" + std::string(extra));
}

ReportRow base_row(const ExperimentConfig& cfg, const PriorSpec& p, std::int64_t n, std::int64_t q, int k) {
  ReportRow r;
  r.experiment = std::string(to_string(cfg.kind));
  r.prior = prior_label(p);
  r.n = n;
  r.q = q;
  r.k = k;
  r.tau_or_c = prior_tuning(p);
  r.alpha = cfg.alpha;
  r.replicates = cfg.replicates;
  r.seed = cfg.master_seed;
  return r;
}

void add_stat(Report& rep, ReportRow row, std::string statistic, double value, double se, double wall_ms) {
  row.statistic = std::move(statistic);
  row.value = value;
  row.se = se;
  row.wall_ms = wall_ms;
  rep.rows.push_back(std::move(row));
}

RegimeConstants regime_constants_for(const ExperimentConfig& cfg, const PriorSpec& p) {
  RegimeConstants rc = default_regime_constants(p);
  if (cfg.K_S) rc.K_S = *cfg.K_S;
  if (cfg.K_M) rc.K_M = *cfg.K_M;
  if (cfg.K_L) rc.K_L = *cfg.K_L;
  validate_regime_constants(rc, p);
  return rc;
}

RadiusOptions radius_options(const ExperimentConfig& cfg) {
  RadiusOptions opt;
  opt.beta = cfg.beta;
  opt.rho = cfg.rho;
  opt.adaptive_rho = cfg.adaptive_rho;
  opt.multiplier = cfg.multiplier;
  return opt;
}

// Adds C z to every row of `means`, z standard normal.
Matrix add_noise(const Matrix& means, const Covariance& cov, Stream& stream) {
  const Matrix c = cov.chol();
  Matrix x = means;
  Vector z(means.cols());
  for (Eigen::Index i = 0; i < means.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = stream.normal();
    x.row(i) += (c * z).transpose();
  }
  return x;
}

Report begin_report(const ExperimentConfig& cfg) {
  validate_experiment(cfg);
  Report rep;
  rep.config = experiment_to_json(cfg);
  return rep;
}

}  // namespace

// ---------------------------------------------------------------------------
// Means

Matrix generate_means(const SparseMeansSpec& spec, const Covariance& cov, Stream& stream) {
  if (spec.n < 1 || spec.k < 1) throw Error(ErrorCode::InvalidSpec, "need n >= 1 and k >= 1");
  if (spec.q < 0 || spec.q > spec.n) throw Error(ErrorCode::InvalidSpec, "need 0 <= q <= n");
  if (!(spec.signal_sq_mahal > 0.0) || !std::isfinite(spec.signal_sq_mahal)) {
    throw Error(ErrorCode::InvalidSpec, "signal_sq_mahal must be positive");
  }
  if (cov.dim() != spec.k) throw Error(ErrorCode::DimensionMismatch, "covariance dimension differs from k");
  Matrix means = Matrix::Zero(spec.n, spec.k);
  if (spec.q == 0) return means;

  std::vector<std::int64_t> rows(static_cast<std::size_t>(spec.n));
  std::iota(rows.begin(), rows.end(), 0);
  if (spec.placement == Placement::Random) {
    for (std::int64_t i = 0; i < spec.q; ++i) {
      const auto span = static_cast<double>(spec.n - i);
      const auto j = i + std::min(static_cast<std::int64_t>(stream.uniform() * span), spec.n - i - 1);
      std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    }
  }

  Vector fixed;
  if (spec.direction == Direction::Fixed) {
    fixed = spec.fixed_direction.size() == 0 ? Vector::Unit(spec.k, 0) : spec.fixed_direction;
    if (fixed.size() != spec.k) throw Error(ErrorCode::InvalidSpec, "fixed_direction has the wrong length");
    if (!(cov.mahalanobis_sq(fixed) > 0.0)) throw Error(ErrorCode::InvalidSpec, "fixed_direction is zero");
  }
  const Matrix c = cov.chol();
  for (std::int64_t i = 0; i < spec.q; ++i) {
    Vector v;
    if (spec.direction == Direction::Fixed) {
      v = fixed;
    } else {
      Vector z(spec.k);
      do {
        for (int j = 0; j < spec.k; ++j) z(j) = stream.normal();
      } while (z.squaredNorm() == 0.0);
      v = c * z;
    }
    v *= std::sqrt(spec.signal_sq_mahal / cov.mahalanobis_sq(v));
    means.row(rows[static_cast<std::size_t>(i)]) = v.transpose();
  }
  return means;
}

std::int64_t count_nonzero_rows(const Matrix& means) {
  std::int64_t c = 0;
  for (Eigen::Index i = 0; i < means.rows(); ++i) c += means.row(i).cwiseAbs().maxCoeff() > 0.0 ? 1 : 0;
  return c;
}

// ---------------------------------------------------------------------------
// Config

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Risk: return "risk";
    case ExperimentKind::Contraction: return "contraction";
    case ExperimentKind::Coverage: return "coverage";
    case ExperimentKind::Calibration: return "calibration";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  for (auto k : {ExperimentKind::Risk, ExperimentKind::Contraction, ExperimentKind::Coverage,
                 ExperimentKind::Calibration}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorCode::ConfigError, "unknown experiment kind '" + std::string(name) + "'");
}

namespace {

Regime regime_from_string(const std::string& s) {
  if (s == "S") return Regime::S;
  if (s == "M") return Regime::M;
  if (s == "L") return Regime::L;
  throw Error(ErrorCode::ConfigError, "unknown regime '" + s + "'");
}

template <class T>
T get_as(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ConfigError, std::string("experiment field '") + key + "' has the wrong type");
  }
}

}  // namespace

nlohmann::json experiment_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(cfg.kind));
  auto& priors = j["priors"] = nlohmann::json::array();
  for (const auto& p : cfg.priors) priors.push_back(prior_to_json(p));
  j["dims"] = cfg.dims;
  if (cfg.covariance.size() > 0) {
    auto& m = j["covariance"] = nlohmann::json::array();
    for (Eigen::Index r = 0; r < cfg.covariance.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(cfg.covariance.cols()));
      for (Eigen::Index c = 0; c < cfg.covariance.cols(); ++c) row[static_cast<std::size_t>(c)] = cfg.covariance(r, c);
      m.push_back(row);
    }
  }
  j["n_grid"] = cfg.n_grid;
  j["q_exponent"] = cfg.q_exponent;
  if (cfg.q_fixed) j["q"] = *cfg.q_fixed;
  j["signal_multiplier"] = cfg.signal_multiplier;
  j["placement"] = cfg.placement == Placement::FirstQ ? "first_q" : "random";
  j["direction"] = cfg.direction == Direction::Fixed ? "fixed" : "random";
  j["table_tol"] = cfg.table_tol;
  j["posterior_draws"] = cfg.posterior_draws;
  if (std::isfinite(cfg.slack)) j["slack"] = cfg.slack;
  j["norm"] = cfg.norm == ContractionNorm::Mahalanobis ? "mahalanobis" : "euclidean";
  j["tuning_grid"] = cfg.tuning_grid;
  auto& regimes = j["regimes"] = nlohmann::json::array();
  for (Regime r : cfg.regimes) regimes.push_back(std::string(to_string(r)));
  j["alpha"] = cfg.alpha;
  if (cfg.beta) j["beta"] = *cfg.beta;
  j["rho"] = cfg.rho;
  j["adaptive_rho"] = cfg.adaptive_rho;
  if (cfg.multiplier) j["multiplier"] = *cfg.multiplier;
  if (cfg.K_S) j["K_S"] = *cfg.K_S;
  if (cfg.K_M) j["K_M"] = *cfg.K_M;
  if (cfg.K_L) j["K_L"] = *cfg.K_L;
  j["s_grid"] = cfg.s_grid;
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.master_seed;
  return j;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "experiment must be a JSON object");
  static const char* const kKeys[] = {"kind", "priors", "dims", "covariance", "n_grid", "q_exponent", "q",
                                      "signal_multiplier", "placement", "direction", "table_tol",
                                      "posterior_draws", "slack", "norm", "tuning_grid", "regimes", "alpha",
                                      "beta", "rho", "adaptive_rho", "multiplier", "K_S", "K_M", "K_L", "s_grid",
                                      "replicates", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw Error(ErrorCode::ConfigError, "unknown experiment key '" + key + "'");
    }
  }
  ExperimentConfig cfg;
  if (j.contains("kind")) cfg.kind = experiment_kind_from_string(get_as<std::string>(j, "kind"));
  if (j.contains("priors")) {
    if (!j.at("priors").is_array()) throw Error(ErrorCode::ConfigError, "'priors' must be an array");
    for (const auto& p : j.at("priors")) cfg.priors.push_back(prior_from_json(p, false));
  }
  if (j.contains("dims")) cfg.dims = get_as<std::vector<int>>(j, "dims");
  if (j.contains("covariance")) {
    const auto rows = get_as<std::vector<std::vector<double>>>(j, "covariance");
    const auto k = static_cast<Eigen::Index>(rows.size());
    cfg.covariance.resize(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != k) {
        throw Error(ErrorCode::ConfigError, "covariance must be square");
      }
      for (Eigen::Index c = 0; c < k; ++c) cfg.covariance(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  if (j.contains("n_grid")) cfg.n_grid = get_as<std::vector<std::int64_t>>(j, "n_grid");
  if (j.contains("q_exponent")) cfg.q_exponent = get_as<double>(j, "q_exponent");
  if (j.contains("q")) cfg.q_fixed = get_as<std::int64_t>(j, "q");
  if (j.contains("signal_multiplier")) cfg.signal_multiplier = get_as<double>(j, "signal_multiplier");
  if (j.contains("placement")) {
    const auto s = get_as<std::string>(j, "placement");
    if (s != "first_q" && s != "random") throw Error(ErrorCode::ConfigError, "placement must be first_q or random");
    cfg.placement = s == "first_q" ? Placement::FirstQ : Placement::Random;
  }
  if (j.contains("direction")) {
    const auto s = get_as<std::string>(j, "direction");
    if (s != "fixed" && s != "random") throw Error(ErrorCode::ConfigError, "direction must be fixed or random");
    cfg.direction = s == "fixed" ? Direction::Fixed : Direction::Random;
  }
  if (j.contains("table_tol")) cfg.table_tol = get_as<double>(j, "table_tol");
  if (j.contains("posterior_draws")) cfg.posterior_draws = get_as<std::int64_t>(j, "posterior_draws");
  if (j.contains("slack")) cfg.slack = get_as<double>(j, "slack");
  if (j.contains("norm")) {
    const auto s = get_as<std::string>(j, "norm");
    if (s != "mahalanobis" && s != "euclidean") throw Error(ErrorCode::ConfigError, "norm must be mahalanobis or euclidean");
    cfg.norm = s == "mahalanobis" ? ContractionNorm::Mahalanobis : ContractionNorm::Euclidean;
  }
  if (j.contains("tuning_grid")) cfg.tuning_grid = get_as<std::vector<double>>(j, "tuning_grid");
  if (j.contains("regimes")) {
    cfg.regimes.clear();
    for (const auto& s : get_as<std::vector<std::string>>(j, "regimes")) cfg.regimes.push_back(regime_from_string(s));
  }
  if (j.contains("alpha")) cfg.alpha = get_as<double>(j, "alpha");
  if (j.contains("beta")) cfg.beta = get_as<double>(j, "beta");
  if (j.contains("rho")) cfg.rho = get_as<double>(j, "rho");
  if (j.contains("adaptive_rho")) cfg.adaptive_rho = get_as<bool>(j, "adaptive_rho");
  if (j.contains("multiplier")) cfg.multiplier = get_as<double>(j, "multiplier");
  if (j.contains("K_S")) cfg.K_S = get_as<double>(j, "K_S");
  if (j.contains("K_M")) cfg.K_M = get_as<double>(j, "K_M");
  if (j.contains("K_L")) cfg.K_L = get_as<double>(j, "K_L");
  if (j.contains("s_grid")) cfg.s_grid = get_as<std::vector<double>>(j, "s_grid");
  if (j.contains("replicates")) cfg.replicates = get_as<std::int64_t>(j, "replicates");
  if (j.contains("seed")) cfg.master_seed = get_as<std::uint64_t>(j, "seed");
  return cfg;
}

std::int64_t sparsity_count(const ExperimentConfig& cfg, std::int64_t n) {
  if (cfg.q_fixed) return *cfg.q_fixed;
  return static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(n), cfg.q_exponent) - 1e-12));
}

void validate_experiment(const ExperimentConfig& cfg) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
  if (cfg.replicates < 1) bad("replicates must be >= 1");
  if (cfg.priors.empty()) bad("at least one prior is required");
  if (cfg.dims.empty()) bad("at least one dimension is required");
  for (int k : cfg.dims) {
    if (k < 1) bad("dimensions must be >= 1");
    if (cfg.covariance.size() > 0 && cfg.covariance.rows() != k) {
      throw Error(ErrorCode::DimensionMismatch, "covariance does not match k=" + std::to_string(k));
    }
  }
  if (cfg.covariance.size() > 0) (void)Covariance::make(cfg.covariance);
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1)");

  const bool sparse = cfg.kind == ExperimentKind::Risk || cfg.kind == ExperimentKind::Contraction;
  if (sparse) {
    if (cfg.n_grid.empty()) bad("n_grid is empty");
    for (auto n : cfg.n_grid) {
      const auto q = sparsity_count(cfg, n);
      if (q < 1 || q > n) throw Error(ErrorCode::InvalidCounts, "need 1 <= q <= n for n=" + std::to_string(n));
    }
    if (!(cfg.signal_multiplier > 0.0)) bad("signal_multiplier must be positive");
    if (!(cfg.table_tol > 0.0)) bad("table_tol must be positive");
  }
  if (cfg.kind == ExperimentKind::Contraction) {
    if (cfg.posterior_draws < 1) bad("posterior_draws must be >= 1");
    if (std::isfinite(cfg.slack) && !(cfg.slack > 0.0)) bad("slack must be positive");
  }
  if (cfg.kind == ExperimentKind::Coverage || cfg.kind == ExperimentKind::Calibration) {
    if (cfg.tuning_grid.empty()) bad("tuning_grid is empty");
    for (double t : cfg.tuning_grid) {
      if (!(t > 0.0 && t < 1.0)) bad("tuning values must lie in (0, 1)");
    }
  }
  if (cfg.kind == ExperimentKind::Calibration) {
    for (double s : cfg.s_grid) {
      if (!(s >= 0.0) || !std::isfinite(s)) bad("s_grid values must be finite and >= 0");
    }
  }
  for (const auto& p : cfg.priors) {
    const double tuning = prior_tuning(p);
    if (!sparse && !std::isfinite(tuning) && cfg.tuning_grid.empty()) bad("prior needs tau/c");
    const PriorSpec probe = std::isfinite(tuning) ? p : with_tuning(p, 0.01);
    for (int k : cfg.dims) {
      const auto report = validate_prior(probe, k);
      if (!report.ok()) throw Error(ErrorCode::DomainError, report.violations.front());
      if (cfg.kind == ExperimentKind::Coverage) (void)adjusted_radius(1.0, probe, k, cfg.alpha, radius_options(cfg));
    }
    if (cfg.kind == ExperimentKind::Coverage) (void)regime_constants_for(cfg, probe);
  }
}

double wilson_se(std::int64_t successes, std::int64_t trials) {
  if (trials < 1) return std::numeric_limits<double>::quiet_NaN();
  constexpr double z = 1.959963984540054;
  const auto n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double half = z / (1.0 + z * z / n) * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
  return half / z;
}

// ---------------------------------------------------------------------------
// Risk

namespace {

// E w(s)² s for s ~ χ²_k: the expected loss of one zero mean. Beyond s_max
// the weight is taken as 1.
double zero_mean_loss(const WeightTable& table, int k) {
  const double dof = k;
  auto f = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double w = table.lookup(s);
    return w * w * s * std::exp(chisq_log_pdf(s, dof));
  };
  quad::Options opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-9;
  const auto res = quad::integrate<double>(f, std::span<const double>(table.grid), opt);
  // E[s; s > s_max] = k Q(k/2 + 1, s_max/2).
  return res.value + dof * reg_inc_gamma_upper(0.5 * dof + 1.0, 0.5 * table.s_max);
}

}  // namespace

Report run_risk_experiment(const ExperimentConfig& cfg) {
  Report rep = begin_report(cfg);
  for (const auto& prior0 : cfg.priors) {
    for (int k : cfg.dims) {
      const Covariance cov = covariance_for(cfg, k);
      for (auto n : cfg.n_grid) {
        const auto start = Clock::now();
        const auto q = sparsity_count(cfg, n);
        const PriorSpec prior = tuned_prior(prior0, n, q);
        const double log_ratio = std::log(static_cast<double>(n) / static_cast<double>(q));
        const double signal_sq = cfg.signal_multiplier * cfg.signal_multiplier * 2.0 * log_ratio;
        const WeightTable table = build_weight_table(prior, k, 4.0 * signal_sq + 40.0 + 10.0 * k, cfg.table_tol);
        SparseMeansSpec spec{n, q, k, signal_sq, cfg.placement, cfg.direction, {}};
        const std::string label = cell_label("risk", prior, k, n, prior_tuning(prior));

        const auto reps = static_cast<std::size_t>(cfg.replicates);
        std::vector<double> total(reps), zero(reps), signal(reps), identity(reps);
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t r = 0; r < cfg.replicates; ++r) {
          Stream stream = derive_stream(cfg.master_seed, static_cast<std::uint64_t>(r), label);
          const Matrix theta = generate_means(spec, cov, stream);
          const Matrix x = add_noise(theta, cov, stream);
          const EstimateBatch est = posterior_mean_batch_serial(x, cov, prior, &table);
          double lz = 0.0, ls = 0.0, li = 0.0;
          for (Eigen::Index i = 0; i < n; ++i) {
            const double loss = cov.mahalanobis_sq((est.estimates.row(i) - theta.row(i)).transpose());
            (theta.row(i).cwiseAbs().maxCoeff() > 0.0 ? ls : lz) += loss;
            li += cov.mahalanobis_sq((x.row(i) - theta.row(i)).transpose());
          }
          const auto ri = static_cast<std::size_t>(r);
          total[ri] = (lz + ls) / (2.0 * q * log_ratio);
          zero[ri] = lz / (q * log_ratio);
          signal[ri] = ls / (2.0 * q * log_ratio);
          identity[ri] = li / (2.0 * q * log_ratio);
        }
        const double ms = elapsed_ms(start);
        const ReportRow row = base_row(cfg, prior, n, q, k);
        const auto t = mean_se(total), z = mean_se(zero), s = mean_se(signal), id = mean_se(identity);
        add_stat(rep, row, "risk_ratio", t.mean, t.se, ms);
        add_stat(rep, row, "zero_block", z.mean, z.se, ms);
        // Quadrature value of the zero-block expectation; no Monte Carlo error.
        add_stat(rep, row, "zero_block_exact", static_cast<double>(n - q) * zero_mean_loss(table, k) / (q * log_ratio),
                 0.0, ms);
        add_stat(rep, row, "signal_block", s.mean, s.se, ms);
        add_stat(rep, row, "identity_ratio", id.mean, id.se, ms);
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Contraction

Report run_contraction_experiment(const ExperimentConfig& cfg) {
  Report rep = begin_report(cfg);
  const auto draws = static_cast<std::size_t>(cfg.posterior_draws);
  for (const auto& prior0 : cfg.priors) {
    for (int k : cfg.dims) {
      const Covariance cov = covariance_for(cfg, k);
      const Matrix c = cov.chol();
      for (auto n : cfg.n_grid) {
        const auto start = Clock::now();
        const auto q = sparsity_count(cfg, n);
        const PriorSpec prior = tuned_prior(prior0, n, q);
        const double log_ratio = std::log(static_cast<double>(n) / static_cast<double>(q));
        const double radius = q * log_ratio;
        const double slack = std::isfinite(cfg.slack) ? cfg.slack : std::log(static_cast<double>(n));
        const double signal_sq = cfg.signal_multiplier * cfg.signal_multiplier * 2.0 * log_ratio;
        SparseMeansSpec spec{n, q, k, signal_sq, cfg.placement, cfg.direction, {}};
        const std::string label = cell_label("contraction", prior, k, n, prior_tuning(prior));
        const bool euclid = cfg.norm == ContractionNorm::Euclidean;

        const auto reps = static_cast<std::size_t>(cfg.replicates);
        std::vector<double> p_est(reps), p_truth(reps), mean_sq(reps);
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t r = 0; r < cfg.replicates; ++r) {
          Stream stream = derive_stream(cfg.master_seed, static_cast<std::uint64_t>(r), label);
          const Matrix theta = generate_means(spec, cov, stream);
          const Matrix x = add_noise(theta, cov, stream);
          std::vector<double> est_tot(draws, 0.0), truth_tot(draws, 0.0);
          std::vector<double> xv(static_cast<std::size_t>(k)), bv(static_cast<std::size_t>(k));
          Vector dev(k);
          for (Eigen::Index i = 0; i < n; ++i) {
            const Vector xw = cov.whiten(x.row(i).transpose());
            const Vector tw = cov.whiten(theta.row(i).transpose());
            const PosteriorKernel kern(prior, k, xw.squaredNorm());
            const double w = kern.shrinkage_weight();
            const KappaSampler sampler(kern);
            for (int j = 0; j < k; ++j) {
              xv[static_cast<std::size_t>(j)] = xw(j);
              bv[static_cast<std::size_t>(j)] = w * xw(j) - tw(j);
            }
            for (std::size_t m = 0; m < draws; ++m) {
              const double om = 1.0 / (1.0 + std::exp(sampler.sample_logit(stream)));
              const double shift = om - w, sd = std::sqrt(om);
              // Whitened θ - θ̂ given κ.
              double de = 0.0, dt = 0.0;
              for (int j = 0; j < k; ++j) {
                const auto jj = static_cast<std::size_t>(j);
                const double d = shift * xv[jj] + sd * stream.normal();
                dev(j) = d;
                de += d * d;
                dt += (d + bv[jj]) * (d + bv[jj]);
              }
              if (euclid) {
                de = (c * dev).squaredNorm();
                Vector b(k);
                for (int j = 0; j < k; ++j) b(j) = dev(j) + bv[static_cast<std::size_t>(j)];
                dt = (c * b).squaredNorm();
              }
              est_tot[m] += de;
              truth_tot[m] += dt;
            }
          }
          std::size_t ce = 0, ct = 0;
          double sum = 0.0;
          for (std::size_t m = 0; m < draws; ++m) {
            ce += est_tot[m] > radius ? 1 : 0;
            ct += truth_tot[m] > slack * radius ? 1 : 0;
            sum += est_tot[m];
          }
          const auto ri = static_cast<std::size_t>(r);
          p_est[ri] = static_cast<double>(ce) / static_cast<double>(draws);
          p_truth[ri] = static_cast<double>(ct) / static_cast<double>(draws);
          mean_sq[ri] = sum / static_cast<double>(draws) / radius;
        }
        const double ms = elapsed_ms(start);
        const ReportRow row = base_row(cfg, prior, n, q, k);
        const auto e = mean_se(p_est), t = mean_se(p_truth), m = mean_se(mean_sq);
        add_stat(rep, row, "exceed_estimator", e.mean, e.se, ms);
        add_stat(rep, row, "exceed_truth", t.mean, t.se, ms);
        add_stat(rep, row, "posterior_spread", m.mean, m.se, ms);
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Coverage

Report run_coverage_experiment(const ExperimentConfig& cfg) {
  Report rep = begin_report(cfg);
  const RadiusOptions opt = radius_options(cfg);
  for (const auto& prior0 : cfg.priors) {
    for (int k : cfg.dims) {
      const Covariance cov = covariance_for(cfg, k);
      const Matrix c = cov.chol();
      for (double tuning : cfg.tuning_grid) {
        const PriorSpec prior = with_tuning(prior0, tuning);
        const RegimeConstants rc = regime_constants_for(cfg, prior);
        for (Regime regime : cfg.regimes) {
          const auto start = Clock::now();
          const double norm_sq = regime_placement(regime, prior, rc);
          const Vector theta0 = c * (std::sqrt(norm_sq) * Vector::Unit(k, 0));
          const std::string label = cell_label("coverage", prior, k, 1, tuning, to_string(regime));

          const auto reps = static_cast<std::size_t>(cfg.replicates);
          std::vector<unsigned char> hit(reps);
          std::vector<double> raw(reps), adj(reps), mult(reps);
#pragma omp parallel for schedule(dynamic)
          for (std::int64_t r = 0; r < cfg.replicates; ++r) {
            Stream stream = derive_stream(cfg.master_seed, static_cast<std::uint64_t>(r), label);
            Vector z(k);
            for (int j = 0; j < k; ++j) z(j) = stream.normal();
            const Vector x = theta0 + c * z;
            const PosteriorKernel kern(prior, k, cov.mahalanobis_sq(x));
            const Vector theta_hat = kern.shrinkage_weight() * x;
            const DistanceDistribution dist(kern);
            const double r_hat = credible_radius(cfg.alpha, dist);
            const RadiusResult res = adjusted_radius(r_hat, prior, k, cfg.alpha, opt);
            const auto ri = static_cast<std::size_t>(r);
            hit[ri] = contains(res, theta0, theta_hat, cov) ? 1 : 0;
            raw[ri] = r_hat;
            adj[ri] = res.adjusted_radius;
            mult[ri] = res.multiplier;
          }
          const double ms = elapsed_ms(start);
          std::int64_t covered = 0;
          for (auto h : hit) covered += h;
          ReportRow row = base_row(cfg, prior, 1, 1, k);
          row.regime = std::string(to_string(regime));
          const auto ra = mean_se(raw), ad = mean_se(adj), mu = mean_se(mult);
          add_stat(rep, row, "coverage", static_cast<double>(covered) / static_cast<double>(reps),
                   wilson_se(covered, cfg.replicates), ms);
          add_stat(rep, row, "raw_radius", ra.mean, ra.se, ms);
          add_stat(rep, row, "adjusted_radius", ad.mean, ad.se, ms);
          add_stat(rep, row, "multiplier", mu.mean, mu.se, ms);
          add_stat(rep, row, "theta_norm_sq", norm_sq, 0.0, ms);
          const Regime classified = classify_regime_sq(norm_sq, prior, rc);
          add_stat(rep, row, "placement_classified", classified == regime ? 1.0 : 0.0, 0.0, ms);
        }
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Calibration

Report run_calibration_experiment(const ExperimentConfig& cfg) {
  Report rep = begin_report(cfg);
  constexpr std::int64_t kBlock = 1000;
  for (const auto& prior0 : cfg.priors) {
    for (int k : cfg.dims) {
      for (double tuning : cfg.tuning_grid) {
        const PriorSpec prior = with_tuning(prior0, tuning);
        for (double s : cfg.s_grid) {
          const auto start = Clock::now();
          const PosteriorKernel kern(prior, k, s);
          const double w = kern.shrinkage_weight();
          const DistanceDistribution dist(kern);
          const double r_hat = credible_radius(cfg.alpha, dist);
          const KappaSampler sampler(kern);
          Vector xw = Vector::Zero(k);
          xw(0) = std::sqrt(s);
          const std::string label = cell_label("calibration", prior, k, 1, tuning, "s=" + format_double(s));

          const std::int64_t blocks = (cfg.replicates + kBlock - 1) / kBlock;
          std::vector<std::int64_t> inside(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(dynamic)
          for (std::int64_t b = 0; b < blocks; ++b) {
            Stream stream = derive_stream(cfg.master_seed, static_cast<std::uint64_t>(b), label);
            const std::int64_t end = std::min(cfg.replicates, (b + 1) * kBlock);
            std::int64_t cnt = 0;
            Vector z(k);
            for (std::int64_t m = b * kBlock; m < end; ++m) {
              const double om = 1.0 / (1.0 + std::exp(sampler.sample_logit(stream)));
              for (int j = 0; j < k; ++j) z(j) = stream.normal();
              const double d = ((om - w) * xw + std::sqrt(om) * z).squaredNorm();
              cnt += d <= r_hat ? 1 : 0;
            }
            inside[static_cast<std::size_t>(b)] = cnt;
          }
          const double ms = elapsed_ms(start);
          std::int64_t total = 0;
          for (auto v : inside) total += v;
          ReportRow row = base_row(cfg, prior, 1, 0, k);
          row.regime = "s=" + format_double(s);
          add_stat(rep, row, "containment", static_cast<double>(total) / static_cast<double>(cfg.replicates),
                   wilson_se(total, cfg.replicates), ms);
          add_stat(rep, row, "raw_radius", r_hat, 0.0, ms);
        }
      }
    }
  }
  return rep;
}

Report run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::Risk: return run_risk_experiment(cfg);
    case ExperimentKind::Contraction: return run_contraction_experiment(cfg);
    case ExperimentKind::Coverage: return run_coverage_experiment(cfg);
    case ExperimentKind::Calibration: return run_calibration_experiment(cfg);
  }
  throw Error(ErrorCode::ConfigError, "unknown experiment kind");
}

}  // namespace glshrink
