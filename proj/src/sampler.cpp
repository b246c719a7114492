#include "glshrink/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "glshrink/error.hpp"

namespace glshrink {

namespace {

constexpr int kMaxDepth = 40;
constexpr double kNegligible = 1e-14;

// 7-point Gauss-Legendre; the kernel's panels already resolve the density, so
// half-panel checks need far less than the kernel's GK15.
template <class F>
double gauss7(const F& f, double a, double b) {
  static constexpr double x[] = {0.9491079123427585, 0.7415311855993945, 0.4058451513773972};
  static constexpr double w[] = {0.1294849661688697, 0.2797053914892766, 0.3818300505051189};
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double sum = 0.4179591836734694 * f(c);
  for (int i = 0; i < 3; ++i) sum += w[i] * (f(c - h * x[i]) + f(c + h * x[i]));
  return sum * h;
}

}  // namespace

double KappaSampler::Segment::eval(double x) const {
  const double x2 = x * x;
  const double x3 = x2 * x;
  return (2 * x3 - 3 * x2 + 1) * f0 + (x3 - 2 * x2 + x) * d0 + (-2 * x3 + 3 * x2) * f1 + (x3 - x2) * d1;
}

KappaSampler::KappaSampler(const PosteriorKernel& kern, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "sampler tolerance must be positive");
  auto density = [&](double t) { return std::exp(kern.log_density_logit(t)); };

  auto make = [&](double a, double b, double fa, double fb, double pa, double pb) {
    Segment s{a, b - a, fa, fb, pa * (b - a), pb * (b - a)};
    const double delta = fb - fa;
    if (delta <= 0.0) {
      s.d0 = s.d1 = 0.0;
      return s;
    }
    const double alpha = s.d0 / delta;
    const double beta = s.d1 / delta;
    const double r2 = alpha * alpha + beta * beta;
    if (r2 > 9.0) {
      const double scale = 3.0 / std::sqrt(r2);
      s.d0 *= scale;
      s.d1 *= scale;
    }
    return s;
  };

  struct Pending {
    double a, b, fa, fb, pa, pb;
    int depth;
  };
  const auto& br = kern.breakpoints();
  const auto& cum = kern.cdf_at_breaks();
  std::vector<double> dens(br.size());
  for (std::size_t i = 0; i < br.size(); ++i) dens[i] = density(br[i]);

  std::vector<Pending> stack;
  for (std::size_t i = br.size() - 1; i-- > 0;) {
    stack.push_back({br[i], br[i + 1], cum[i], cum[i + 1], dens[i], dens[i + 1], 0});
  }
  // Depth-first with the right half pushed first keeps segments in order.
  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    const Segment s = make(p.a, p.b, p.fa, p.fb, p.pa, p.pb);
    if (p.fb - p.fa < kNegligible || p.depth >= kMaxDepth) {
      seg_.push_back(s);
      continue;
    }
    const double m = 0.5 * (p.a + p.b);
    const double fm = p.fa + gauss7(density, p.a, m);
    if (std::fabs(s.eval(0.5) - fm) <= 0.5 * tol) {
      seg_.push_back(s);
      continue;
    }
    const double pm = density(m);
    const double fm_c = std::clamp(fm, p.fa, p.fb);
    stack.push_back({m, p.b, fm_c, p.fb, pm, p.pb, p.depth + 1});
    stack.push_back({p.a, m, p.fa, fm_c, p.pa, pm, p.depth + 1});
  }
  if (seg_.empty()) throw Error(ErrorCode::QuadratureFailure, "sampler has no segments");
  // Renormalize so the table ends exactly at 1.
  const double total = seg_.back().f1;
  starts_.reserve(seg_.size());
  for (auto& s : seg_) {
    s.f0 /= total;
    s.f1 /= total;
    s.d0 /= total;
    s.d1 /= total;
    starts_.push_back(s.f0);
  }
}

double KappaSampler::cdf_logit(double t) const {
  if (t <= seg_.front().a) return 0.0;
  const Segment& last = seg_.back();
  if (t >= last.a + last.h) return 1.0;
  auto it = std::upper_bound(seg_.begin(), seg_.end(), t, [](double v, const Segment& s) { return v < s.a; });
  const Segment& s = *(it - 1);
  return s.eval((t - s.a) / s.h);
}

double KappaSampler::quantile_logit(double u) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), u);
  const std::size_t i = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
  const Segment& s = seg_[i];
  double lo = 0.0, hi = 1.0;
  double x = s.f1 > s.f0 ? std::clamp((u - s.f0) / (s.f1 - s.f0), 0.0, 1.0) : 0.5;
  for (int it_n = 0; it_n < 60; ++it_n) {
    const double g = s.eval(x) - u;
    if (g > 0.0) hi = x; else lo = x;
    const double x2 = x * x;
    const double dg = (6 * x2 - 6 * x) * s.f0 + (3 * x2 - 4 * x + 1) * s.d0 + (-6 * x2 + 6 * x) * s.f1 +
                      (3 * x2 - 2 * x) * s.d1;
    if (dg > 0.0) {
      const double next = x - g / dg;
      if (std::fabs(next - x) < 1e-12) return std::clamp(s.a + next * s.h, -kLogitClamp, kLogitClamp);
      if (next >= lo && next <= hi) {
        x = next;
        continue;
      }
    }
    x = 0.5 * (lo + hi);
  }
  return std::clamp(s.a + x * s.h, -kLogitClamp, kLogitClamp);
}

double KappaSampler::sample_logit(Stream& stream) const { return quantile_logit(stream.uniform()); }

double KappaSampler::sample_kappa(Stream& stream) const { return 1.0 / (1.0 + std::exp(-sample_logit(stream))); }

std::vector<double> KappaSampler::sample_kappa(std::size_t count, Stream& stream) const {
  std::vector<double> out(count);
  for (auto& v : out) v = sample_kappa(stream);
  return out;
}

}  // namespace glshrink
