#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "glshrink/quadrature.hpp"
#include "glshrink/rng.hpp"
#include "glshrink/specfun.hpp"
#include "test_util.hpp"

using namespace glshrink;
using namespace glshrink::test;

TEST_SUITE("specfun") {
  TEST_CASE("log_gamma trivial values and Boost agreement") {
    CHECK(log_gamma(1.0) == doctest::Approx(0.0));
    CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-14));
    Engine g(1);
    for (int i = 0; i < 500; ++i) {
      const double x = log_uniform(g, 1e-6, 1e6);
      CHECK(close_rel(log_gamma(x), boost::math::lgamma(x), 1e-13));
    }
    CHECK_ERROR_CODE(log_gamma(0.0), ErrorCode::DomainError);
  }

  TEST_CASE("reg_inc_gamma closed forms") {
    for (double x : {0.0, 0.1, 1.0, 3.0, 20.0}) {
      CHECK(reg_inc_gamma_lower(1.0, x) == doctest::Approx(-std::expm1(-x)).epsilon(1e-14));
      CHECK(reg_inc_gamma_upper(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-14));
    }
    CHECK_ERROR_CODE(reg_inc_gamma_lower(-1.0, 1.0), ErrorCode::DomainError);
    CHECK_ERROR_CODE(reg_inc_gamma_lower(1.0, -1.0), ErrorCode::DomainError);
  }

  TEST_CASE("reg_inc_gamma_lower(2.5, 3) matches quadrature of the integrand") {
    auto f = [](double t) { return std::exp(1.5 * std::log(t) - t - boost::math::lgamma(2.5)); };
    quad::Options opt;
    opt.rel_tol = 1e-14;
    const auto r = quad::integrate<double>(f, 0.0, 3.0, opt);
    CHECK(std::fabs(reg_inc_gamma_lower(2.5, 3.0) - r.value) <= 1e-12);
  }

  TEST_CASE("property: incomplete gamma agrees with Boost and P + Q = 1") {
    Engine g(7);
    for (int i = 0; i < 2000; ++i) {
      const double a = log_uniform(g, 1e-3, 1e3);
      const double x = a * log_uniform(g, 1e-3, 1e1);
      const double p = reg_inc_gamma_lower(a, x), q = reg_inc_gamma_upper(a, x);
      CHECK(std::fabs(p + q - 1.0) <= 1e-13);
      CHECK(std::fabs(p - boost::math::gamma_p(a, x)) <= 1e-12);
      if (q > 1e-300) CHECK(close_rel(q, boost::math::gamma_q(a, x), 1e-10 / std::min(1.0, 1e3 * q)));
    }
  }

  TEST_CASE("central chi-square CDF examples") {
    CHECK(chisq_cdf(2.0 * std::log(2.0), {2.0, 0.0}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(chisq_upper_quantile(0.05, 2.0) == doctest::Approx(-2.0 * std::log(0.05)).epsilon(1e-10));
    CHECK(chisq_upper_quantile(0.5, 2.0) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));
    // Bisection on the independent Boost CDF.
    boost::math::chi_squared chi1(1.0);
    double lo = 0.0, hi = 20.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (boost::math::cdf(chi1, mid) < 0.95 ? lo : hi) = mid;
    }
    CHECK(std::fabs(chisq_upper_quantile(0.05, 1.0) - lo) <= 1e-9);
    CHECK(std::fabs(lo - 3.8415) < 1e-4);
    CHECK_ERROR_CODE(chisq_upper_quantile(0.0, 2.0), ErrorCode::AlphaOutOfRange);
    CHECK_ERROR_CODE(chisq_upper_quantile(1.0, 2.0), ErrorCode::AlphaOutOfRange);
    CHECK_ERROR_CODE(chisq_cdf(NAN, {2.0, 0.0}), ErrorCode::NonFinite);
  }

  TEST_CASE("noncentral dof=2 ncp=1 r=3 matches Monte Carlo within 3 SE") {
    Stream st = derive_stream(20240611, 0, "ncx2-mc");
    const int n = 1'000'000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
      const double z1 = st.normal() + 1.0, z2 = st.normal();
      hits += (z1 * z1 + z2 * z2 <= 3.0);
    }
    const double p = static_cast<double>(hits) / n;
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::fabs(chisq_cdf(3.0, {2.0, 1.0}) - p) <= 3.0 * se);
  }

  TEST_CASE("property: noncentral CDF agrees with Boost") {
    Engine g(8);
    for (int i = 0; i < 1000; ++i) {
      const double k = 1.0 + static_cast<double>(g() % 6);
      const double ncp = log_uniform(g, 1e-4, 5e3);
      const double r = (k + ncp) * log_uniform(g, 0.2, 3.0);
      boost::math::non_central_chi_squared dist(k, ncp);
      const double ref = boost::math::cdf(dist, r);
      CHECK_MESSAGE(std::fabs(chisq_cdf(r, {k, ncp}) - ref) <= 1e-10, "k=" << k << " ncp=" << ncp << " r=" << r);
    }
  }

  TEST_CASE("very large ncp path stays consistent with Boost") {
    for (double ncp : {2e4, 1e5, 1e6}) {
      for (double z : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
        const double k = 2.0;
        const double r = k + ncp + z * std::sqrt(2.0 * (k + 2.0 * ncp));
        boost::math::non_central_chi_squared dist(k, ncp);
        CHECK(std::fabs(chisq_cdf(r, {k, ncp}) - boost::math::cdf(dist, r)) <= 1e-8);
      }
    }
  }

  TEST_CASE("property: monotone in r, decreasing in ncp, stochastic ordering") {
    Engine g(9);
    for (int i = 0; i < 300; ++i) {
      const double k = 1.0 + static_cast<double>(g() % 5);
      const double ncp = log_uniform(g, 1e-3, 1e3);
      double prev = 0.0;
      for (double r = 0.0; r < 3.0 * (k + ncp); r += 0.05 * (k + ncp)) {
        const double c = chisq_cdf(r, {k, ncp});
        CHECK(c >= prev - 1e-15);
        CHECK(c <= 1.0);
        INFO("k=", k, " ncp=", ncp, " r=", r, " diff=", c - chisq_cdf(r, {k, ncp * 0.9}));
        CHECK(c <= chisq_cdf(r, {k, ncp * 0.9}) + 1e-12);
        prev = c;
      }
      const double r = uniform(g, 0.0, 50.0);
      CHECK(chisq_cdf(r, {k, 1e3}) <= chisq_cdf(r, {k, 0.0}));
    }
  }

  TEST_CASE("property: quantile inverts the CDF") {
    Engine g(10);
    for (int i = 0; i < 400; ++i) {
      const double alpha = log_uniform(g, 1e-6, 1.0 - 1e-6);
      const double k = log_uniform(g, 0.5, 50.0);
      const double q = chisq_upper_quantile(alpha, k);
      CHECK(std::fabs(chisq_cdf(q, {k, 0.0}) - (1.0 - alpha)) <= 1e-8);
    }
  }

  TEST_CASE("property: series truncation threshold is honored") {
    Engine g(11);
    for (int i = 0; i < 300; ++i) {
      const double k = 1.0 + static_cast<double>(g() % 5);
      const double ncp = log_uniform(g, 1e-2, 1e3);
      const double r = (k + ncp) * uniform(g, 0.3, 2.0);
      CHECK(std::fabs(chisq_cdf(r, {k, ncp}, 1e-14) - chisq_cdf(r, {k, ncp}, 2e-14)) < 1e-12);
    }
  }

  TEST_CASE("chisq_sf and log pdf") {
    boost::math::chi_squared chi3(3.0);
    for (double r : {0.1, 1.0, 5.0, 30.0, 200.0}) {
      CHECK(close_rel(chisq_sf(r, 3.0), boost::math::cdf(boost::math::complement(chi3, r)), 1e-11));
      CHECK(close_rel(chisq_log_pdf(r, 3.0), std::log(boost::math::pdf(chi3, r)), 1e-12));
    }
  }
}
