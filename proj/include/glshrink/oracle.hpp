#pragma once

#include <cstdint>

#include "glshrink/linalg.hpp"
#include "glshrink/priors.hpp"

namespace glshrink {

/// Brute-force references for the quadrature and sampling paths. They use
/// different discretizations on purpose: a uniform midpoint rule in
/// t = logit κ, and importance sampling in κ. Single-threaded.
struct OracleConfig {
  std::int64_t grid_points = 1'000'000;
  std::int64_t mc_draws = 1'000'000;
  std::uint64_t seed = 20240611;
  double t_lo = -100.0;
  double t_hi = 300.0;
  int bootstrap = 100;
};

struct OracleValue {
  double value = 0.0;
  double error = 0.0;
};

/// ∫₀¹ of the unnormalized κ kernel by the midpoint rule on N and 2N
/// points, Richardson-extrapolated; error = |extrapolated - fine|.
OracleValue grid_normalizer(const PriorSpec& prior, int k, double s, const OracleConfig& cfg = {});
/// E(1 - κ | s) from the same grids.
OracleValue grid_weight(const PriorSpec& prior, int k, double s, const OracleConfig& cfg = {});
/// E(κ 1[κ > ξ]) or E(κ 1[κ ≤ ξ]) from the same grids.
OracleValue grid_truncated_moment(const PriorSpec& prior, int k, double s, double xi, bool above,
                                  const OracleConfig& cfg = {});

struct McWeight {
  double value = 0.0;
  double se = 0.0;
  double ess = 0.0;
};

/// Self-normalized importance sampling of E(1 - κ | s) with a
/// Beta(k/2 + a, 1 - a/2) proposal (Beta(d + k/2, 1) for EIG). Throws
/// LowEffectiveSampleSize when the ESS is below 1000.
McWeight mc_weight(const PriorSpec& prior, int k, double s, const OracleConfig& cfg = {});

struct McQuantile {
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Empirical (1 - α) quantile of ‖θ - θ̂‖²_Σ from hierarchical draws (κ from
/// the grid CDF, θ | κ Gaussian) with a percentile-bootstrap 95% interval.
McQuantile mc_distance_quantile(double alpha, const Vector& x, const Covariance& cov, const PriorSpec& prior,
                                const OracleConfig& cfg = {});

}  // namespace glshrink
