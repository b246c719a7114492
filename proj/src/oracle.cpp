#include "glshrink/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "glshrink/error.hpp"
#include "glshrink/rng.hpp"

namespace glshrink {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Unnormalized κ kernel times the logit Jacobian κ(1 - κ), written directly
// from the κ-space formulas.
struct KappaKernel {
  const PriorSpec& prior;
  int k;
  double s;

  double log_at(double t) const {
    const double kappa = 1.0 / (1.0 + std::exp(-t));
    const double om = 1.0 / (1.0 + std::exp(t));
    if (!(kappa > 0.0) || !(om > 0.0)) return kNegInf;
    double v;
    if (const auto* gl = std::get_if<GlobalLocal>(&prior)) {
      const double u = om / (kappa * gl->tau);
      v = (0.5 * k + gl->a - 1.0) * std::log(kappa) - (gl->a + 1.0) * std::log(om) + gl->L.eval_log(u);
    } else {
      const auto& e = std::get<ExpInvGamma>(prior);
      v = (e.d + 0.5 * k - 1.0) * std::log(kappa) - (e.d + 1.0) * std::log(om + kappa * e.c);
    }
    return v - 0.5 * s * kappa + std::log(kappa) + std::log(om);
  }
};

// Running Σ exp(logv) g_i with a rescaled maximum.
struct LogSums {
  double max = kNegInf;
  double s0 = 0.0;  // Σ f
  double s1 = 0.0;  // Σ f (1 - κ) or f κ, depending on the caller
  void add(double logv, double g) {
    if (logv == kNegInf) return;
    if (logv > max) {
      const double scale = max == kNegInf ? 0.0 : std::exp(max - logv);
      s0 *= scale;
      s1 *= scale;
      max = logv;
    }
    const double f = std::exp(logv - max);
    s0 += f;
    s1 += f * g;
  }
};

LogSums midpoint_sums(const KappaKernel& kern, double a, double b, std::int64_t n, bool kappa_moment) {
  LogSums acc;
  const double h = (b - a) / static_cast<double>(n);
  for (std::int64_t j = 0; j < n; ++j) {
    const double t = a + (static_cast<double>(j) + 0.5) * h;
    const double g = kappa_moment ? 1.0 / (1.0 + std::exp(-t)) : 1.0 / (1.0 + std::exp(t));
    acc.add(kern.log_at(t), g);
  }
  return acc;
}

void check_config(const OracleConfig& cfg) {
  if (cfg.grid_points < 10'000) throw Error(ErrorCode::ConfigError, "oracle grid_points must be >= 1e4");
  if (!(cfg.t_hi > cfg.t_lo)) throw Error(ErrorCode::ConfigError, "oracle window is empty");
}

OracleValue richardson(double coarse, double fine) {
  const double r = (4.0 * fine - coarse) / 3.0;
  return {r, std::fabs(r - fine)};
}

}  // namespace

OracleValue grid_normalizer(const PriorSpec& prior, int k, double s, const OracleConfig& cfg) {
  check_config(cfg);
  const KappaKernel kern{prior, k, s};
  const double width = cfg.t_hi - cfg.t_lo;
  const LogSums c = midpoint_sums(kern, cfg.t_lo, cfg.t_hi, cfg.grid_points, false);
  const LogSums f = midpoint_sums(kern, cfg.t_lo, cfg.t_hi, 2 * cfg.grid_points, false);
  const double ic = std::exp(c.max) * c.s0 * width / static_cast<double>(cfg.grid_points);
  const double iff = std::exp(f.max) * f.s0 * width / static_cast<double>(2 * cfg.grid_points);
  return richardson(ic, iff);
}

OracleValue grid_weight(const PriorSpec& prior, int k, double s, const OracleConfig& cfg) {
  check_config(cfg);
  const KappaKernel kern{prior, k, s};
  const LogSums c = midpoint_sums(kern, cfg.t_lo, cfg.t_hi, cfg.grid_points, false);
  const LogSums f = midpoint_sums(kern, cfg.t_lo, cfg.t_hi, 2 * cfg.grid_points, false);
  return richardson(c.s1 / c.s0, f.s1 / f.s0);
}

OracleValue grid_truncated_moment(const PriorSpec& prior, int k, double s, double xi, bool above,
                                  const OracleConfig& cfg) {
  check_config(cfg);
  if (!(xi > 0.0 && xi < 1.0)) throw Error(ErrorCode::DomainError, "xi must lie in (0, 1)");
  const KappaKernel kern{prior, k, s};
  const double t_cut = std::log(xi) - std::log1p(-xi);
  const double a = above ? t_cut : cfg.t_lo;
  const double b = above ? cfg.t_hi : t_cut;
  auto at = [&](std::int64_t n) {
    const LogSums part = midpoint_sums(kern, a, b, n, true);
    const LogSums all = midpoint_sums(kern, cfg.t_lo, cfg.t_hi, n, false);
    const double hp = (b - a) / static_cast<double>(n);
    const double ha = (cfg.t_hi - cfg.t_lo) / static_cast<double>(n);
    if (part.max == kNegInf) return 0.0;
    return std::exp(part.max - all.max) * part.s1 * hp / (all.s0 * ha);
  };
  return richardson(at(cfg.grid_points), at(2 * cfg.grid_points));
}

McWeight mc_weight(const PriorSpec& prior, int k, double s, const OracleConfig& cfg) {
  if (cfg.mc_draws < 1) throw Error(ErrorCode::ConfigError, "mc_draws must be positive");
  Stream stream = derive_stream(cfg.seed, 0, "oracle.mc_weight");
  // Defensive mixture: a prior-shaped Beta, the same Beta tilted by e^{-sκ/2},
  // and a truncated Lomax on 1 - κ for the spike near κ = 1.
  const auto* gl = std::get_if<GlobalLocal>(&prior);
  const double A = 0.5 * k + prior_exponent(prior);
  const double B = gl ? 1.0 - 0.5 * gl->a : 1.0;
  if (!(B > 0.0)) throw Error(ErrorCode::DomainError, "proposal needs a < 2");
  const double B2 = B + 0.5 * s;
  const double rho = prior_exponent(prior);
  const double scale = prior_tuning(prior);
  const double lomax_z = -std::expm1(rho * (std::log(scale) - std::log1p(scale)));
  auto log_beta = [](double p, double q) { return std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q); };
  const double lb1 = log_beta(A, B), lb2 = log_beta(A, B2);
  const double log_third = -std::log(3.0);

  std::gamma_distribution<double> ga(A, 1.0), gb(B, 1.0), gb2(B2, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  const auto n = static_cast<std::size_t>(cfg.mc_draws);
  std::vector<double> logw(n), g(n);
  double max_lw = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    double kappa, om;
    const int c = pick(stream);
    if (c == 2) {
      const double u = stream.uniform();
      om = scale * std::expm1(-std::log1p(-u * lomax_z) / rho);
      om = std::min(om, 1.0);
      kappa = 1.0 - om;
    } else {
      const double x = ga(stream);
      const double y = c == 0 ? gb(stream) : gb2(stream);
      kappa = x / (x + y);
      om = y / (x + y);
    }
    double lw = kNegInf;
    if (om > 0.0 && kappa > 0.0) {
      const double lk = std::log(kappa), lo = std::log(om);
      double lt;
      if (gl) {
        lt = (A - 1.0) * lk - (gl->a + 1.0) * lo + gl->L.eval_log(om / (kappa * gl->tau));
      } else {
        lt = (A - 1.0) * lk - (rho + 1.0) * std::log(om + kappa * scale);
      }
      lt -= 0.5 * s * kappa;
      const double q0 = (A - 1.0) * lk + (B - 1.0) * lo - lb1;
      const double q1 = (A - 1.0) * lk + (B2 - 1.0) * lo - lb2;
      const double q2 = std::log(rho) + rho * std::log(scale) - (rho + 1.0) * std::log(om + scale) - std::log(lomax_z);
      const double m = std::max({q0, q1, q2});
      const double lq = m + std::log(std::exp(q0 - m) + std::exp(q1 - m) + std::exp(q2 - m)) + log_third;
      lw = lt - lq;
      if (std::isnan(lw)) lw = kNegInf;
    }
    logw[i] = lw;
    g[i] = om;
    max_lw = std::max(max_lw, lw);
  }
  double sw = 0.0, sw2 = 0.0, swg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(logw[i] - max_lw);
    sw += w;
    sw2 += w * w;
    swg += w * g[i];
  }
  McWeight out;
  out.value = swg / sw;
  out.ess = sw * sw / sw2;
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(logw[i] - max_lw) / sw;
    var += w * w * (g[i] - out.value) * (g[i] - out.value);
  }
  out.se = std::sqrt(var);
  if (out.ess < 1000.0) {
    throw Error(ErrorCode::LowEffectiveSampleSize, "importance sampling ESS " + std::to_string(out.ess) + " < 1000");
  }
  return out;
}

McQuantile mc_distance_quantile(double alpha, const Vector& x, const Covariance& cov, const PriorSpec& prior,
                                const OracleConfig& cfg) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1)");
  check_config(cfg);
  if (x.size() != cov.dim()) throw Error(ErrorCode::DimensionMismatch, "x has the wrong length");
  const auto n = static_cast<std::size_t>(cfg.mc_draws);
  if (std::min(alpha, 1.0 - alpha) * static_cast<double>(n) < 50.0) {
    throw Error(ErrorCode::LowEffectiveSampleSize, "too few draws beyond the requested quantile");
  }
  const int k = cov.dim();
  const Vector xw = cov.whiten(x);
  const double s = xw.squaredNorm();
  const double w = grid_weight(prior, k, s, cfg).value;

  // Grid CDF in t, inverted by linear interpolation within a cell.
  const KappaKernel kern{prior, k, s};
  const auto m = static_cast<std::size_t>(cfg.grid_points);
  const double h = (cfg.t_hi - cfg.t_lo) / static_cast<double>(m);
  std::vector<double> logf(m);
  double mx = kNegInf;
  for (std::size_t j = 0; j < m; ++j) {
    logf[j] = kern.log_at(cfg.t_lo + (static_cast<double>(j) + 0.5) * h);
    mx = std::max(mx, logf[j]);
  }
  std::vector<double> cum(m + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j) cum[j + 1] = cum[j] + std::exp(logf[j] - mx);
  const double total = cum[m];
  for (auto& c : cum) c /= total;

  Stream stream = derive_stream(cfg.seed, 0, "oracle.mc_distance_quantile");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = stream.uniform();
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    const std::size_t j = std::min<std::size_t>(m - 1, static_cast<std::size_t>(it - cum.begin()) - 1);
    const double frac = cum[j + 1] > cum[j] ? (u - cum[j]) / (cum[j + 1] - cum[j]) : 0.5;
    const double t = cfg.t_lo + (static_cast<double>(j) + frac) * h;
    const double om = 1.0 / (1.0 + std::exp(t));
    const double sd = std::sqrt(om);
    double acc = 0.0;
    for (int c = 0; c < k; ++c) {
      const double y = (om - w) * xw[c] + sd * stream.normal();
      acc += y * y;
    }
    d[i] = acc;
  }

  auto quantile = [&](std::vector<double>& v) {
    const auto idx = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(v.size()))) - 1;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
    return v[idx];
  };
  McQuantile out;
  std::vector<double> work = d;
  out.value = quantile(work);

  std::vector<double> boots;
  Stream bs = derive_stream(cfg.seed, 1, "oracle.bootstrap");
  for (int b = 0; b < cfg.bootstrap; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      work[i] = d[std::min(n - 1, static_cast<std::size_t>(bs.uniform() * static_cast<double>(n)))];
    }
    boots.push_back(quantile(work));
  }
  if (boots.empty()) {
    out.ci_lo = out.ci_hi = out.value;
  } else {
    std::sort(boots.begin(), boots.end());
    const auto nb = boots.size();
    out.ci_lo = boots[static_cast<std::size_t>(0.025 * static_cast<double>(nb - 1))];
    out.ci_hi = boots[static_cast<std::size_t>(std::ceil(0.975 * static_cast<double>(nb - 1)))];
  }
  return out;
}

}  // namespace glshrink
