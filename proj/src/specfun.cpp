#include "glshrink/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "glshrink/error.hpp"
#include "glshrink/quadrature.hpp"

namespace glshrink {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
// Above this noncentrality the Poisson series needs thousands of terms and
// the conditional-normal integral is both cheaper and exact.
constexpr double kSeriesMaxNcp = 1e4;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, std::string(what) + " is not finite");
}

// Series for P(a, x); valid and fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < 100000000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(a * std::log(x) - x - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x); valid for x ≥ a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(a * std::log(x) - x - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x) {
  require_finite(a, "a");
  require_finite(x, "x");
  if (!(a > 0.0) || x < 0.0) {
    throw Error(ErrorCode::DomainError, "incomplete gamma needs a > 0, x >= 0 (a=" + std::to_string(a) +
                                            ", x=" + std::to_string(x) + ")");
  }
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// P((Z + √λ)² ≤ y), with y − λ supplied separately so callers can form it
// without cancellation.
double shifted_square_cdf(double y, double ncp, double y_minus_ncp) {
  if (y <= 0.0) return 0.0;
  const double ry = std::sqrt(y);
  const double rl = std::sqrt(ncp);
  const double upper = y_minus_ncp / (ry + rl);  // √y − √λ
  return std_normal_cdf(upper) - std_normal_cdf(-ry - rl);
}

double shifted_square_cdf(double y, double ncp) { return shifted_square_cdf(y, ncp, y - ncp); }

// χ²_dof(λ) = (Z + √λ)² + V with V ~ χ²_{dof−1}; integrate over V with the
// substitution v = w² so the v^{(dof−3)/2} factor stays smooth at 0.
double noncentral_cdf_conditional(double r, double dof, double ncp) {
  if (dof == 1.0) return shifted_square_cdf(r, ncp);
  const double m = dof - 1.0;
  const double v_max = std::min(r, m + 40.0 * std::sqrt(2.0 * m) + 80.0);
  // The inner probability is 0 or 1 to double precision across the whole
  // range of v when √(r - v) stays far from √λ.
  const double rl = std::sqrt(ncp);
  if (std::sqrt(r) - rl < -38.5) return 0.0;
  if (std::sqrt(r - v_max) - rl > 8.5) return reg_inc_gamma_lower(0.5 * m, 0.5 * v_max);
  const double w_max = std::sqrt(v_max);
  // r − v − λ as (r − λ) − v: with r and λ both huge, forming r − v first
  // rounds away the v dependence and the integrand turns into noise.
  const double delta = r - ncp;
  auto integrand = [&](double w) {
    const double v = w * w;
    if (w <= 0.0) return 0.0;
    return 2.0 * w * std::exp(chisq_log_pdf(v, m)) * shifted_square_cdf(r - v, ncp, delta - v);
  };
  const double mode = std::sqrt(std::max(m - 2.0, 0.0));
  std::vector<double> br{0.0};
  for (double b : {0.5 * mode, mode, mode + 2.0, mode + 5.0}) {
    if (b > 0.0 && b < w_max) br.push_back(b);
  }
  br.push_back(w_max);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  quad::Options opt;
  opt.abs_tol = 1e-15;
  opt.rel_tol = 1e-13;
  const auto res = quad::integrate<double>(integrand, std::span<const double>(br), opt);
  return std::clamp(res.value, 0.0, 1.0);
}

double noncentral_cdf_series(double r, double dof, double ncp, double tail_mass) {
  const double mu = 0.5 * ncp;
  const double x = 0.5 * r;
  const double half = 0.5 * dof;
  const double eps = 0.5 * tail_mass;

  // Poisson weights by ratio recursion from the mode; the geometric bound on
  // each neglected tail decides where to stop.
  const long j0 = static_cast<long>(std::floor(mu));
  const double p0 = std::exp(j0 * std::log(mu) - mu - std::lgamma(j0 + 1.0));
  long j_lo = j0;
  for (double p = p0; j_lo > 0;) {
    const double ratio = j_lo / mu;
    if (ratio < 1.0 && p * ratio / (1.0 - ratio) < eps) break;
    p *= ratio;
    --j_lo;
  }
  long j_hi = j0;
  double p_hi = p0;
  for (;;) {
    const double ratio = mu / (j_hi + 1.0);
    if (ratio < 1.0 && p_hi * ratio / (1.0 - ratio) < eps) break;
    p_hi *= ratio;
    ++j_hi;
  }

  // Downward recursion P(a - 1, x) = P(a, x) + x^{a-1} e^{-x} / Γ(a) only adds
  // positive terms, so it is stable. The increment is carried in log space
  // while it would underflow, since it can grow again as a falls below x.
  double a = half + j_hi;
  double p_central = reg_inc_gamma_lower(a, x);
  const double log_x = std::log(x);
  double log_term = (a - 1.0) * log_x - x - std::lgamma(a);
  constexpr double kUnderflow = -700.0;
  double term = log_term > kUnderflow ? std::exp(log_term) : 0.0;
  double pw = p_hi;
  double sum = pw * p_central;
  for (long j = j_hi; j > j_lo; --j) {
    p_central += term;
    a -= 1.0;
    if (term > 0.0) {
      term *= a / x;
    } else {
      log_term += std::log(a / x);
      if (log_term > kUnderflow) term = std::exp(log_term);
    }
    pw *= j / mu;
    sum += pw * p_central;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace

double log_gamma(double x) {
  require_finite(x, "x");
  if (!(x > 0.0)) throw Error(ErrorCode::DomainError, "log_gamma needs x > 0");
  return std::lgamma(x);
}

double reg_inc_gamma_lower(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return std::min(1.0, gamma_p_series(a, x));
  return std::max(0.0, 1.0 - gamma_q_fraction(a, x));
}

double reg_inc_gamma_upper(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return std::max(0.0, 1.0 - gamma_p_series(a, x));
  return std::min(1.0, gamma_q_fraction(a, x));
}

double chisq_log_pdf(double r, double dof) {
  if (r < 0.0) return -std::numeric_limits<double>::infinity();
  const double h = 0.5 * dof;
  if (r == 0.0) {
    if (h < 1.0) return std::numeric_limits<double>::infinity();
    if (h > 1.0) return -std::numeric_limits<double>::infinity();
    return -std::log(2.0);
  }
  return (h - 1.0) * std::log(r) - 0.5 * r - h * std::log(2.0) - std::lgamma(h);
}

double chisq_cdf(double r, const ChiSqParams& p, double tail_mass) {
  require_finite(r, "r");
  require_finite(p.dof, "dof");
  require_finite(p.ncp, "ncp");
  if (!(p.dof > 0.0) || p.ncp < 0.0) throw Error(ErrorCode::DomainError, "chisq needs dof > 0 and ncp >= 0");
  if (r <= 0.0) return 0.0;
  if (p.ncp == 0.0) return reg_inc_gamma_lower(0.5 * p.dof, 0.5 * r);
  if (p.ncp > kSeriesMaxNcp && p.dof >= 1.0) return noncentral_cdf_conditional(r, p.dof, p.ncp);
  return noncentral_cdf_series(r, p.dof, p.ncp, tail_mass);
}

double chisq_sf(double r, double dof) {
  require_finite(r, "r");
  if (!(dof > 0.0)) throw Error(ErrorCode::DomainError, "chisq needs dof > 0");
  if (r <= 0.0) return 1.0;
  return reg_inc_gamma_upper(0.5 * dof, 0.5 * r);
}

double chisq_upper_quantile(double alpha, double dof) {
  require_finite(alpha, "alpha");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  if (!(dof > 0.0)) throw Error(ErrorCode::DomainError, "chisq needs dof > 0");

  // Residual on whichever tail is small, so tiny alphas keep full precision.
  const bool use_upper = alpha < 0.5;
  auto residual = [&](double q) {
    return use_upper ? chisq_sf(q, dof) - alpha : (1.0 - alpha) - reg_inc_gamma_lower(0.5 * dof, 0.5 * q);
  };
  // Both forms decrease in q and are positive below the root.
  auto g = residual;

  double lo = 0.0;
  double hi = std::max(1.0, dof);
  while (g(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  double q = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    const double gq = g(q);
    if (gq > 0.0) lo = q; else hi = q;
    if (gq == 0.0) break;
    // Newton step, dg/dq = -pdf(q).
    const double pdf = std::exp(chisq_log_pdf(q, dof));
    double next = (pdf > 0.0 && std::isfinite(pdf)) ? q + gq / pdf : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - q) <= 4.0 * kEps * std::max(1.0, q)) {
      q = next;
      break;
    }
    q = next;
  }
  return q;
}

}  // namespace glshrink
