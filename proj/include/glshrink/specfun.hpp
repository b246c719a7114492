#pragma once

namespace glshrink {

/// Chi-square family parameters; ncp = 0 is the central distribution.
struct ChiSqParams {
  double dof = 1.0;
  double ncp = 0.0;
};

double log_gamma(double x);

/// P(a, x) = γ(a, x) / Γ(a).
double reg_inc_gamma_lower(double a, double x);
/// Q(a, x) = 1 - P(a, x), computed without cancellation.
double reg_inc_gamma_upper(double a, double x);

/// Log density of the central chi-square with `dof` degrees of freedom.
double chisq_log_pdf(double r, double dof);

/// P(χ²_dof(ncp) ≤ r). For ncp > 0 this is the Poisson(ncp/2) mixture of
/// central CDFs, truncated once the neglected Poisson mass is below
/// `tail_mass`. Very large ncp switches to an exact one-dimensional integral
/// over the conditional normal representation (see specfun.cpp).
double chisq_cdf(double r, const ChiSqParams& p, double tail_mass = 1e-14);

/// Central upper tail P(χ²_dof > r).
double chisq_sf(double r, double dof);

/// Upper-α quantile χ²_{dof,α}: P(χ²_dof ≤ q) = 1 - α.
double chisq_upper_quantile(double alpha, double dof);

}  // namespace glshrink
