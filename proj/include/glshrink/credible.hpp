#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "glshrink/linalg.hpp"
#include "glshrink/posterior.hpp"
#include "glshrink/priors.hpp"

namespace glshrink {

/// Posterior law of D = ‖θ - θ̂‖²_Σ given s.
///
/// Given κ, θ | x ~ N((1-κ)x, (1-κ)Σ), so D / (1-κ) is noncentral χ²_k with
/// ncp = ((1-κ) - w)² s / (1-κ). The CDF mixes these over κ | s. Panels start
/// from the kernel's partition and refinements are kept for later calls, so
/// an instance must not be shared between threads.
class DistanceDistribution {
 public:
  explicit DistanceDistribution(PosteriorKernel kern);

  double cdf(double r) const;
  const PosteriorKernel& kernel() const { return kern_; }
  std::size_t panels() const { return breaks_.size() - 1; }

 private:
  PosteriorKernel kern_;
  mutable std::vector<double> breaks_;
  double log_floor_;
};

double distance_cdf(double r, const Vector& x, const Covariance& cov, const PriorSpec& prior);

/// r̂ with Π(D ≤ r̂ | x) = 1 - α, to within 1e-6 in probability.
double credible_radius(double alpha, const DistanceDistribution& dist);
double credible_radius(double alpha, const Vector& x, const Covariance& cov, const PriorSpec& prior);
/// Rows of `xs` are observations; parallel over rows.
std::vector<double> credible_radius_batch(double alpha, const Matrix& xs, const Covariance& cov,
                                          const PriorSpec& prior);

struct RadiusResult {
  double raw_radius = 0.0;
  double adjusted_radius = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double rho = 0.0;
  double multiplier = 0.0;
  double exponent = 0.0;
};

struct RadiusOptions {
  std::optional<double> beta;        // default alpha + 0.01
  double rho = 1.0;
  bool adaptive_rho = false;         // 8 if r̂ > χ²_{k,β}, else 0.1
  std::optional<double> multiplier;  // default 2 χ²_{k,α} (χ²_{k,β})^{-exponent}
};

/// a / (1 + ρ) for the global-local prior, d / (1 + ρ) for EIG.
double radius_exponent(const PriorSpec& prior, double rho);
/// Strict lower bound χ²_{k,α} (χ²_{k,β})^{-exponent} on the multiplier.
double multiplier_lower_bound(int k, double alpha, double beta, double exponent);

/// L r̂^{exponent}. Throws InvalidConstants when β ≤ α, ρ ≤ 0, L is at or
/// below its bound, a ≥ 1 (global-local) or α ≥ 1/2 (EIG).
RadiusResult adjusted_radius(double raw_radius, const PriorSpec& prior, int k, double alpha,
                             const RadiusOptions& opt = {});

/// ‖θ - θ̂‖²_Σ ≤ adjusted radius (closed ball).
bool contains(const RadiusResult& result, const Vector& theta, const Vector& theta_hat, const Covariance& cov);
bool contains(const RadiusResult& result, const Vector& theta, const Vector& x, const Covariance& cov,
              const PriorSpec& prior);

enum class Regime { S, M, L, Unclassified };

std::string_view to_string(Regime r);

struct RegimeConstants {
  double K_S = 1.0;
  double K_M = 0.5;
  double K_L = 1.5;
  std::function<double(double)> f_tau;
};

/// K_S = 1, K_M = a, K_L = 3a, f(τ) = √log(1/τ); d replaces a for EIG.
RegimeConstants default_regime_constants(const PriorSpec& prior);
/// Throws InvalidConstants unless K_S > 0, K_M < 2a and K_L > 2a.
void validate_regime_constants(const RegimeConstants& rc, const PriorSpec& prior);

Regime classify_regime(const Vector& theta0, const Covariance& cov, const PriorSpec& prior, const RegimeConstants& rc);
Regime classify_regime_sq(double norm_sq, const PriorSpec& prior, const RegimeConstants& rc);

/// Interior point of each regime, as a squared Mahalanobis norm: 0.5 K_S τ,
/// the geometric mean of f(τ)τ and K_M log(1/τ), and 2 K_L log(1/τ).
double regime_placement(Regime regime, const PriorSpec& prior, const RegimeConstants& rc);

}  // namespace glshrink
