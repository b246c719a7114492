#pragma once

#include <cstddef>
#include <vector>

#include "glshrink/posterior.hpp"
#include "glshrink/rng.hpp"

namespace glshrink {

/// Inverse-CDF sampler for κ | s.
///
/// The CDF of t = logit κ is tabulated at adaptive knots starting from the
/// kernel's panel boundaries; each segment is a cubic Hermite with the exact
/// density as slope (Fritsch-Carlson limited to stay monotone), split until
/// the midpoint error is below `tol`. Immutable after construction.
class KappaSampler {
 public:
  explicit KappaSampler(const PosteriorKernel& kern, double tol = 1e-6);

  /// One draw of t = logit κ, clamped so κ ∈ [1e-15, 1 - 1e-15].
  double sample_logit(Stream& stream) const;
  double sample_kappa(Stream& stream) const;
  std::vector<double> sample_kappa(std::size_t count, Stream& stream) const;

  /// Inverse of the interpolated CDF.
  double quantile_logit(double u) const;
  /// Interpolated CDF of t.
  double cdf_logit(double t) const;
  std::size_t segments() const { return seg_.size(); }

 private:
  struct Segment {
    double a, h, f0, f1, d0, d1;  // d0, d1 are slopes scaled by h
    double eval(double x) const;
  };
  std::vector<Segment> seg_;
  std::vector<double> starts_;  // CDF at the left end of each segment
};

/// Logit clamp used by all samplers: κ stays in (1e-15, 1 - 1e-15).
inline constexpr double kLogitClamp = 34.538776394910684;

}  // namespace glshrink
