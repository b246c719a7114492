#include "glshrink/credible.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "glshrink/error.hpp"
#include "glshrink/estimator.hpp"
#include "glshrink/specfun.hpp"

namespace glshrink {

namespace {

constexpr double kInnerTailMass = 1e-12;
constexpr double kSkipNats = 50.0;
constexpr double kCdfAbsTol = 1e-9;
constexpr double kRootTol = 1e-7;

double tuning_exponent(const PriorSpec& prior) { return prior_exponent(prior); }

}  // namespace

DistanceDistribution::DistanceDistribution(PosteriorKernel kern)
    : kern_(std::move(kern)), breaks_(kern_.breakpoints()), log_floor_(kern_.log_peak_density() - kSkipNats) {}

double DistanceDistribution::cdf(double r) const {
  if (std::isnan(r)) throw Error(ErrorCode::NonFinite, "r is NaN");
  if (r <= 0.0) return 0.0;
  if (std::isinf(r)) return 1.0;
  const double s = kern_.s();
  const double w = kern_.shrinkage_weight();
  const double dof = kern_.dim();
  auto f = [&](double t) {
    const double ld = kern_.log_density_logit(t);
    if (ld < log_floor_) return 0.0;
    const LogitPoint p = logit_point(t);
    const double om = p.one_minus;
    const double diff = om - w;
    const double ncp = diff * diff * s / om;
    return std::exp(ld) * chisq_cdf(r / om, {dof, ncp}, kInnerTailMass);
  };
  quad::Options opt;
  opt.abs_tol = kCdfAbsTol;
  opt.rel_tol = 0.0;
  auto res = quad::integrate<double>(f, std::span<const double>(breaks_), opt);
  if (!res.converged) throw Error(ErrorCode::QuadratureFailure, "distance CDF did not converge");
  if (res.breakpoints.size() > breaks_.size()) breaks_ = std::move(res.breakpoints);
  return std::clamp(res.value, 0.0, 1.0);
}

double distance_cdf(double r, const Vector& x, const Covariance& cov, const PriorSpec& prior) {
  if (x.size() != cov.dim()) throw Error(ErrorCode::DimensionMismatch, "x has the wrong length");
  return DistanceDistribution(PosteriorKernel(prior, cov.dim(), cov.mahalanobis_sq(x))).cdf(r);
}

double credible_radius(double alpha, const DistanceDistribution& dist) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1)");
  const double target = 1.0 - alpha;
  auto g = [&](double r) { return dist.cdf(r) - target; };

  double hi = chisq_upper_quantile(alpha, dist.kernel().dim());
  double g_hi = g(hi);
  int guard = 0;
  while (g_hi < 0.0) {
    if (++guard > 200) throw Error(ErrorCode::RootBracketFailure, "no upper bracket for the credible radius");
    hi *= 2.0;
    g_hi = g(hi);
  }
  // Shrink geometrically first: small radii sit many decades below χ²_{k,α}.
  double lo = 0.0;
  double g_lo = -target;
  for (guard = 0; guard < 400; ++guard) {
    const double m = hi / 8.0;
    const double gm = g(m);
    if (gm < 0.0) {
      lo = m;
      g_lo = gm;
      break;
    }
    hi = m;
    g_hi = gm;
    if (hi < 1e-300) return hi;
  }
  if (std::fabs(g_hi) <= kRootTol) return hi;

  // Illinois false position; halving the stale end keeps it superlinear.
  int side = 0;
  double r = hi;
  for (int it = 0; it < 200; ++it) {
    r = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
    if (!(r > lo && r < hi)) r = 0.5 * (lo + hi);
    const double gr = g(r);
    if (std::fabs(gr) <= kRootTol || (hi - lo) <= 1e-14 * hi) return r;
    if (gr > 0.0) {
      hi = r;
      g_hi = gr;
      if (side == 1) g_lo *= 0.5;
      side = 1;
    } else {
      lo = r;
      g_lo = gr;
      if (side == -1) g_hi *= 0.5;
      side = -1;
    }
  }
  throw Error(ErrorCode::RootBracketFailure, "credible radius root search did not converge");
}

double credible_radius(double alpha, const Vector& x, const Covariance& cov, const PriorSpec& prior) {
  if (x.size() != cov.dim()) throw Error(ErrorCode::DimensionMismatch, "x has the wrong length");
  const DistanceDistribution dist(PosteriorKernel(prior, cov.dim(), cov.mahalanobis_sq(x)));
  return credible_radius(alpha, dist);
}

std::vector<double> credible_radius_batch(double alpha, const Matrix& xs, const Covariance& cov,
                                          const PriorSpec& prior) {
  if (xs.cols() != cov.dim()) throw Error(ErrorCode::DimensionMismatch, "observations have the wrong width");
  const auto n = static_cast<std::int64_t>(xs.rows());
  std::vector<double> out(n);
  bool failed = false;
  ErrorCode code = ErrorCode::QuadratureFailure;
  std::string message;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[i] = credible_radius(alpha, Vector(xs.row(i).transpose()), cov, prior);
    } catch (const Error& e) {
#pragma omp critical(glshrink_radius_error)
      {
        if (!failed) {
          code = e.code();
          message = e.what();
        }
        failed = true;
      }
    }
  }
  if (failed) throw Error(code, message);
  return out;
}

double radius_exponent(const PriorSpec& prior, double rho) { return tuning_exponent(prior) / (1.0 + rho); }

double multiplier_lower_bound(int k, double alpha, double beta, double exponent) {
  return chisq_upper_quantile(alpha, k) * std::pow(chisq_upper_quantile(beta, k), -exponent);
}

RadiusResult adjusted_radius(double raw_radius, const PriorSpec& prior, int k, double alpha,
                             const RadiusOptions& opt) {
  if (!(raw_radius > 0.0) || !std::isfinite(raw_radius)) {
    throw Error(ErrorCode::InvalidConstants, "raw radius must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1)");
  const double beta = opt.beta.value_or(alpha + 0.01);
  if (!(beta > alpha && beta < 1.0)) throw Error(ErrorCode::InvalidConstants, "need alpha < beta < 1");
  if (const auto* gl = std::get_if<GlobalLocal>(&prior)) {
    if (!(gl->a < 1.0)) throw Error(ErrorCode::InvalidConstants, "adjusted radius needs a < 1");
  } else if (!(alpha < 0.5)) {
    throw Error(ErrorCode::InvalidConstants, "EIG credible sets need alpha < 1/2");
  }
  double rho = opt.rho;
  if (opt.adaptive_rho) rho = raw_radius / chisq_upper_quantile(beta, k) > 1.0 ? 8.0 : 0.1;
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidConstants, "rho must be positive");

  RadiusResult out;
  out.raw_radius = raw_radius;
  out.alpha = alpha;
  out.beta = beta;
  out.rho = rho;
  out.exponent = radius_exponent(prior, rho);
  const double bound = multiplier_lower_bound(k, alpha, beta, out.exponent);
  out.multiplier = opt.multiplier.value_or(2.0 * bound);
  if (!(out.multiplier > bound)) {
    throw Error(ErrorCode::InvalidConstants,
                "multiplier " + std::to_string(out.multiplier) + " must exceed " + std::to_string(bound));
  }
  out.adjusted_radius = out.multiplier * std::pow(raw_radius, out.exponent);
  return out;
}

bool contains(const RadiusResult& result, const Vector& theta, const Vector& theta_hat, const Covariance& cov) {
  if (theta.size() != cov.dim() || theta_hat.size() != cov.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "theta has the wrong length");
  }
  return cov.mahalanobis_sq(theta - theta_hat) <= result.adjusted_radius;
}

bool contains(const RadiusResult& result, const Vector& theta, const Vector& x, const Covariance& cov,
              const PriorSpec& prior) {
  return contains(result, theta, posterior_mean(x, cov, prior).estimate, cov);
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::S: return "S";
    case Regime::M: return "M";
    case Regime::L: return "L";
    case Regime::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

RegimeConstants default_regime_constants(const PriorSpec& prior) {
  const double a = tuning_exponent(prior);
  RegimeConstants rc;
  rc.K_S = 1.0;
  rc.K_M = a;
  rc.K_L = 3.0 * a;
  rc.f_tau = [](double tau) { return std::sqrt(std::log(1.0 / tau)); };
  return rc;
}

void validate_regime_constants(const RegimeConstants& rc, const PriorSpec& prior) {
  const double a = tuning_exponent(prior);
  if (!(rc.K_S > 0.0)) throw Error(ErrorCode::InvalidConstants, "K_S must be positive");
  if (!(rc.K_M > 0.0 && rc.K_M < 2.0 * a)) throw Error(ErrorCode::InvalidConstants, "K_M must lie in (0, 2a)");
  if (!(rc.K_L > 2.0 * a)) throw Error(ErrorCode::InvalidConstants, "K_L must exceed 2a");
  if (!rc.f_tau) throw Error(ErrorCode::InvalidConstants, "f_tau is not set");
}

namespace {

double regime_tuning(const PriorSpec& prior) {
  const double t = prior_tuning(prior);
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::InvalidConstants, "regimes need tau (or c) in (0, 1)");
  return t;
}

}  // namespace

Regime classify_regime_sq(double norm_sq, const PriorSpec& prior, const RegimeConstants& rc) {
  validate_regime_constants(rc, prior);
  const double tau = regime_tuning(prior);
  const double log_inv = std::log(1.0 / tau);
  const double s_hi = rc.K_S * tau;
  const double m_lo = rc.f_tau(tau) * tau;
  const double m_hi = rc.K_M * log_inv;
  const double l_lo = rc.K_L * log_inv;
  if (!(s_hi < m_lo && m_lo < m_hi && m_hi < l_lo)) return Regime::Unclassified;
  if (norm_sq <= s_hi) return Regime::S;
  if (norm_sq >= m_lo && norm_sq <= m_hi) return Regime::M;
  if (norm_sq >= l_lo) return Regime::L;
  return Regime::Unclassified;
}

Regime classify_regime(const Vector& theta0, const Covariance& cov, const PriorSpec& prior,
                       const RegimeConstants& rc) {
  if (theta0.size() != cov.dim()) throw Error(ErrorCode::DimensionMismatch, "theta0 has the wrong length");
  return classify_regime_sq(cov.mahalanobis_sq(theta0), prior, rc);
}

double regime_placement(Regime regime, const PriorSpec& prior, const RegimeConstants& rc) {
  validate_regime_constants(rc, prior);
  const double tau = regime_tuning(prior);
  const double log_inv = std::log(1.0 / tau);
  switch (regime) {
    case Regime::S: return 0.5 * rc.K_S * tau;
    case Regime::M: return std::sqrt(rc.f_tau(tau) * tau * rc.K_M * log_inv);
    case Regime::L: return 2.0 * rc.K_L * log_inv;
    case Regime::Unclassified: break;
  }
  throw Error(ErrorCode::InvalidConstants, "no placement for an unclassified regime");
}

}  // namespace glshrink
