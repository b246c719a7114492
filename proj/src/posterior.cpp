#include "glshrink/posterior.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "glshrink/error.hpp"

namespace glshrink {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();


double log_add_exp(double x, double y) {
  const double m = std::max(x, y);
  if (m == kNegInf) return kNegInf;
  return m + std::log1p(std::exp(-std::fabs(x - y)));
}

// Tail mass (relative to the peak) that is tolerated outside the support.
constexpr double kMaxTailRel = 1e-12;

}  // namespace

LogitPoint logit_point(double t) {
  // One exp and one log1p: with e = exp(-|t|), softplus(|t|) = |t| + log1p(e)
  // and softplus(-|t|) = log1p(e).
  LogitPoint p;
  p.t = t;
  const double e = std::exp(-std::fabs(t));
  const double sp = std::log1p(e);
  const double big = 1.0 / (1.0 + e);
  const double small = e * big;
  if (t >= 0.0) {
    p.log_kappa = -sp;
    p.log_one_minus = -t - sp;
    p.kappa = big;
    p.one_minus = small;
  } else {
    p.log_kappa = t - sp;
    p.log_one_minus = -sp;
    p.kappa = small;
    p.one_minus = big;
  }
  return p;
}

LogitIntegrand::LogitIntegrand(const PriorSpec& prior, int k, double s)
    : gl_(is_global_local(prior)), a_(0.0), d1_(0.0), log_tau_(0.0), log_c_(0.0), half_s_(0.5 * s) {
  if (gl_) {
    const auto& gl = std::get<GlobalLocal>(prior);
    kappa_pow_ = 0.5 * k + gl.a;
    a_ = gl.a;
    log_tau_ = std::log(gl.tau);
    log_L_ = gl.L.log_value;
  } else {
    const auto& e = std::get<ExpInvGamma>(prior);
    kappa_pow_ = e.d + 0.5 * k;
    d1_ = e.d + 1.0;
    log_c_ = std::log(e.c);
  }
}

double LogitIntegrand::eval(const LogitPoint& p) const {
  if (gl_) {
    // u = λ² = (1 - κ) / (κ τ), so log u = -t - log τ.
    const double log_L = log_L_(-p.t - log_tau_);
    return kappa_pow_ * p.log_kappa - a_ * p.log_one_minus + log_L - half_s_ * p.kappa;
  }
  return kappa_pow_ * p.log_kappa + p.log_one_minus - d1_ * log_add_exp(p.log_one_minus, p.log_kappa + log_c_) -
         half_s_ * p.kappa;
}

namespace {

void check_kernel_args(const PriorSpec& prior, int k, double s) {
  if (k < 1) throw Error(ErrorCode::DomainError, "dimension k must be >= 1");
  if (!std::isfinite(s)) throw Error(ErrorCode::NonFinite, "s is not finite");
  if (s < 0.0) throw Error(ErrorCode::DomainError, "s must be >= 0");
  if (const auto* gl = std::get_if<GlobalLocal>(&prior)) {
    if (!(gl->a > 0.0) || !(gl->tau > 0.0 && gl->tau < 1.0)) {
      throw Error(ErrorCode::DomainError, "global-local prior needs a > 0 and tau in (0, 1)");
    }
    if (!gl->L.log_value) throw Error(ErrorCode::DomainError, "L has no evaluation function");
    if (!(gl->L.zero_rate > gl->a)) {
      throw Error(ErrorCode::DomainError, "improper kappa-posterior: zero_rate of L must exceed a");
    }
  } else {
    const auto& e = std::get<ExpInvGamma>(prior);
    if (!(e.d > 0.0 && e.d < 1.0) || !(e.c > 0.0) || !std::isfinite(e.c)) {
      throw Error(ErrorCode::DomainError, "EIG prior needs d in (0, 1) and c > 0");
    }
  }
}

}  // namespace

PosteriorKernel::PosteriorKernel(const PriorSpec& prior, int k, double s)
    : prior_((check_kernel_args(prior, k, s), prior)), k_(k), s_(s), integrand_(prior, k, s) {
  const quad::Support sup = quad::locate_support([this](double t) { return integrand_(t); });
  if (!std::isfinite(sup.peak) || sup.breaks.size() < 2) {
    throw Error(ErrorCode::QuadratureFailure, "posterior kernel has no finite mass");
  }
  if (!(sup.tail_rel < kMaxTailRel)) {
    throw Error(ErrorCode::QuadratureFailure, "posterior mass does not decay inside the integration window");
  }
  shift_ = sup.peak;

  auto f = [this](double t) -> std::array<double, 3> {
    const LogitPoint p = logit_point(t);
    const double v = std::exp(integrand_.eval(p) - shift_);
    return {v, v * p.one_minus, v * p.one_minus * p.one_minus};
  };
  quad::Options opt;
  opt.rel_tol = 1e-11;
  opt.rel_tol_first = 1e-13;
  const auto res = quad::integrate<std::array<double, 3>>(f, std::span<const double>(sup.breaks), opt);
  if (!res.converged) {
    throw Error(ErrorCode::QuadratureFailure, "normalizer did not converge for s=" + std::to_string(s));
  }
  const double z = res.value[0];
  if (!(z > 0.0) || !std::isfinite(z)) throw Error(ErrorCode::QuadratureFailure, "non-positive normalizer");
  norm_shifted_ = z;
  log_norm_ = std::log(z) + shift_;
  quad_error_ = (res.error[0] + sup.tail_rel) / z;
  weight_ = std::clamp(res.value[1] / z, 0.0, 1.0);
  variance_ = std::max(0.0, res.value[2] / z - weight_ * weight_);

  breaks_ = res.breakpoints;
  cum_.assign(breaks_.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < res.panels.size(); ++i) {
    acc += res.panels[i].value[0];
    cum_[i + 1] = acc / z;
  }
  cum_.back() = 1.0;
}

double PosteriorKernel::log_post_kappa(double kappa) const {
  if (!(kappa > 0.0 && kappa < 1.0)) throw Error(ErrorCode::DomainError, "kappa must lie in (0, 1)");
  const double t = std::log(kappa) - std::log1p(-kappa);
  return integrand_(t) - std::log(kappa) - std::log1p(-kappa) - log_norm_;
}

double PosteriorKernel::log_density_logit(double t) const { return integrand_(t) - log_norm_; }

double PosteriorKernel::cdf_logit(double t) const {
  if (std::isnan(t)) throw Error(ErrorCode::NonFinite, "t is NaN");
  if (t <= breaks_.front()) return 0.0;
  if (t >= breaks_.back()) return 1.0;
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
  auto f = [this](double x) { return std::exp(integrand_(x) - shift_); };
  const double part = quad::gk15<double>(f, breaks_[i], t).value;
  return std::clamp(cum_[i] + part / norm_shifted_, 0.0, 1.0);
}

double PosteriorKernel::cdf(double kappa) const {
  if (kappa <= 0.0) return 0.0;
  if (kappa >= 1.0) return 1.0;
  return cdf_logit(std::log(kappa) - std::log1p(-kappa));
}

double PosteriorKernel::log_truncated_kappa_moment(double xi, Side side) const {
  if (!(xi > 0.0 && xi < 1.0)) throw Error(ErrorCode::DomainError, "xi must lie in (0, 1)");
  const double t_cut = std::log(xi) - std::log1p(-xi);
  quad::SupportOptions so;
  if (side == Side::Above) so.lo_limit = t_cut; else so.hi_limit = t_cut;
  auto logg = [this](double t) {
    const LogitPoint p = logit_point(t);
    return integrand_.eval(p) + p.log_kappa;
  };
  const quad::Support sup = quad::locate_support(logg, so);
  if (sup.peak == kNegInf || sup.breaks.size() < 2) return kNegInf;
  auto g = [&](double t) { return std::exp(logg(t) - sup.peak); };
  quad::Options opt;
  opt.rel_tol = 1e-11;
  const auto res = quad::integrate<double>(g, std::span<const double>(sup.breaks), opt);
  if (!res.converged) throw Error(ErrorCode::QuadratureFailure, "truncated moment did not converge");
  if (!(res.value > 0.0)) return kNegInf;
  return std::log(res.value) + sup.peak - log_norm_;
}

double PosteriorKernel::truncated_kappa_moment(double xi, Side side) const {
  return std::exp(log_truncated_kappa_moment(xi, side));
}

}  // namespace glshrink
