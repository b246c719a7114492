#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "glshrink/credible.hpp"
#include "glshrink/linalg.hpp"
#include "glshrink/priors.hpp"
#include "glshrink/report.hpp"
#include "glshrink/rng.hpp"

namespace glshrink {

enum class Placement { FirstQ, Random };
enum class Direction { Fixed, Random };

/// Nearly-black mean configuration: q of the n rows are nonzero, each with
/// squared Mahalanobis norm `signal_sq_mahal`.
struct SparseMeansSpec {
  std::int64_t n = 0;
  std::int64_t q = 0;
  int k = 1;
  double signal_sq_mahal = 1.0;
  Placement placement = Placement::FirstQ;
  Direction direction = Direction::Fixed;
  /// Used with Direction::Fixed; empty means e₁.
  Vector fixed_direction;
};

/// Throws InvalidSpec for q > n, n < 1, k < 1 or a non-positive signal.
Matrix generate_means(const SparseMeansSpec& spec, const Covariance& cov, Stream& stream);

/// Number of nonzero rows; the L₀[q] membership predicate is
/// count_nonzero_rows(m) ≤ q.
std::int64_t count_nonzero_rows(const Matrix& means);

enum class ExperimentKind { Risk, Contraction, Coverage, Calibration };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

enum class ContractionNorm { Mahalanobis, Euclidean };

/// Declarative description of one experiment family. Fields that a kind does
/// not use are ignored. A prior whose tau/c is NaN is tuned from (n, q).
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Risk;
  std::vector<PriorSpec> priors;
  std::vector<int> dims{1};
  /// Covariance as a k × k matrix; empty means identity for every k.
  Matrix covariance;

  // risk, contraction
  std::vector<std::int64_t> n_grid{200, 1000, 5000};
  /// q = ⌈n^q_exponent⌉ unless q_fixed is set.
  double q_exponent = 0.25;
  std::optional<std::int64_t> q_fixed;
  /// ‖θ₀‖_Σ = signal_multiplier · √(2 log(n/q)).
  double signal_multiplier = 1.0;
  Placement placement = Placement::FirstQ;
  Direction direction = Direction::Fixed;
  double table_tol = 1e-9;

  // contraction
  std::int64_t posterior_draws = 1000;
  /// Truth-centered slack M_n; NaN means log n.
  double slack = std::numeric_limits<double>::quiet_NaN();
  ContractionNorm norm = ContractionNorm::Mahalanobis;

  // coverage, calibration
  std::vector<double> tuning_grid{1e-2, 1e-3, 1e-4};
  std::vector<Regime> regimes{Regime::S, Regime::M, Regime::L};
  double alpha = 0.05;
  std::optional<double> beta;
  double rho = 1.0;
  bool adaptive_rho = false;
  std::optional<double> multiplier;
  std::optional<double> K_S, K_M, K_L;
  /// Calibration: observations placed at these values of s.
  std::vector<double> s_grid{0.0, 1.0, 4.0, 10.0, 25.0, 60.0};

  std::int64_t replicates = 200;
  std::uint64_t master_seed = 20240611;
};

nlohmann::json experiment_to_json(const ExperimentConfig& cfg);
/// Unknown keys throw ConfigError.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
/// Checks counts, probabilities and the credible-set constants.
void validate_experiment(const ExperimentConfig& cfg);

std::int64_t sparsity_count(const ExperimentConfig& cfg, std::int64_t n);

/// R̂ = Σᵢ E‖θ̂ᵢ − θ₀ᵢ‖²_Σ / (2q log(n/q)) and the zero-block sum over
/// q log(n/q), per (prior, k, n). Replicates run in parallel.
Report run_risk_experiment(const ExperimentConfig& cfg);
/// Posterior probability that Σᵢ‖θᵢ − θ̂ᵢ‖² exceeds q log(n/q), and that
/// Σᵢ‖θᵢ − θ₀ᵢ‖² exceeds M_n q log(n/q), averaged over replicates.
Report run_contraction_experiment(const ExperimentConfig& cfg);
/// Frequency with which the adjusted credible ball covers θ₀, per
/// (prior, tuning, regime), with Wilson standard errors.
Report run_coverage_experiment(const ExperimentConfig& cfg);
/// Frequency with which the raw credible ball contains θ drawn from its own
/// posterior, per (prior, k, s); the target is 1 − α.
Report run_calibration_experiment(const ExperimentConfig& cfg);

Report run_experiment(const ExperimentConfig& cfg);

/// Standard error of a proportion from the Wilson score interval at z = 1.96:
/// the half-width divided by z.
double wilson_se(std::int64_t successes, std::int64_t trials);

}  // namespace glshrink
