#pragma once

#include <vector>

#include "glshrink/priors.hpp"
#include "glshrink/quadrature.hpp"

namespace glshrink {

enum class Side { Above, Below };

/// log κ and log(1 - κ) for κ = 1 / (1 + e^{-t}), without cancellation.
struct LogitPoint {
  double t;
  double log_kappa;
  double log_one_minus;
  double kappa;
  double one_minus;
};

LogitPoint logit_point(double t);

/// Unnormalized log posterior of t = logit κ given s, including the
/// Jacobian κ(1 - κ). Prior-specific constants are folded in once.
class LogitIntegrand {
 public:
  LogitIntegrand(const PriorSpec& prior, int k, double s);

  double operator()(double t) const { return eval(logit_point(t)); }
  double eval(const LogitPoint& p) const;

 private:
  bool gl_;
  double kappa_pow_;   // k/2 + a  or  d + k/2
  double a_;           // GL: exponent on (1 - κ)
  double d1_;          // EIG: d + 1
  double log_tau_;     // GL
  double log_c_;       // EIG
  double half_s_;
  std::function<double(double)> log_L_;
};

/// Normalized posterior of κ given the Mahalanobis statistic s.
///
/// Integration runs on t = logit κ over the support found by
/// quad::locate_support, one vector-valued pass giving the normalizer and
/// the first two moments of 1 - κ. The final panels are kept so the CDF,
/// the sampler and the distance distribution can reuse them.
class PosteriorKernel {
 public:
  /// Throws DomainError for an improper prior or s < 0, QuadratureFailure if
  /// the tolerance is not met within the panel cap.
  PosteriorKernel(const PriorSpec& prior, int k, double s);

  const PriorSpec& prior() const { return prior_; }
  int dim() const { return k_; }
  double s() const { return s_; }
  /// log ∫₀¹ (unnormalized kernel) dκ.
  double log_norm() const { return log_norm_; }
  /// Estimated relative error of the normalizer.
  double quad_error() const { return quad_error_; }

  /// Normalized log density of κ; throws DomainError outside (0, 1).
  double log_post_kappa(double kappa) const;
  /// Normalized log density of t = logit κ.
  double log_density_logit(double t) const;
  double log_unnormalized_logit(double t) const { return integrand_(t); }
  /// Largest normalized log density of t found while locating the support.
  double log_peak_density() const { return shift_ - log_norm_; }

  /// E(1 - κ | s).
  double shrinkage_weight() const { return weight_; }
  /// Var(κ | s); equals 2 dw/ds.
  double kappa_variance() const { return variance_; }

  /// E(κ 1[κ > ξ] | s) or E(κ 1[κ ≤ ξ] | s).
  double truncated_kappa_moment(double xi, Side side) const;
  /// Log of the same, accurate when the moment underflows a double.
  double log_truncated_kappa_moment(double xi, Side side) const;

  /// P(logit κ ≤ t | s) and P(κ ≤ kappa | s).
  double cdf_logit(double t) const;
  double cdf(double kappa) const;

  double t_lo() const { return breaks_.front(); }
  double t_hi() const { return breaks_.back(); }
  /// Panel boundaries in t and the normalized CDF at each of them.
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& cdf_at_breaks() const { return cum_; }

 private:
  PriorSpec prior_;
  int k_;
  double s_;
  LogitIntegrand integrand_;
  double shift_ = 0.0;
  double log_norm_ = 0.0;
  double norm_shifted_ = 0.0;
  double quad_error_ = 0.0;
  double weight_ = 0.0;
  double variance_ = 0.0;
  std::vector<double> breaks_;
  std::vector<double> cum_;
};

}  // namespace glshrink
