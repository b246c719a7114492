#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "glshrink/credible.hpp"
#include "glshrink/oracle.hpp"
#include "glshrink/sampler.hpp"
#include "glshrink/specfun.hpp"
#include "lemma_suite.hpp"
#include "test_util.hpp"

using namespace glshrink;
using namespace glshrink::test;

namespace {

// Monte Carlo draws of D = ‖θ - θ̂‖²_Σ for Σ = I, using κ from the sampler and
// the conditional Gaussian θ | κ ~ N((1-κ)x, (1-κ)I).
std::vector<double> mc_distances(const PosteriorKernel& kern, const Vector& x, std::size_t n, Stream& st) {
  const KappaSampler sampler(kern);
  const double w = kern.shrinkage_weight();
  std::vector<double> d(n);
  Vector z(x.size());
  for (auto& v : d) {
    const double om = 1.0 - sampler.sample_kappa(st);
    for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = st.normal();
    v = ((om - w) * x + std::sqrt(om) * z).squaredNorm();
  }
  return d;
}

double fraction_at_most(const std::vector<double>& d, double r) {
  double c = 0;
  for (double v : d) c += v <= r;
  return c / static_cast<double>(d.size());
}

}  // namespace

TEST_SUITE("credible") {
  TEST_CASE("distance CDF basics") {
    Vector x(2);
    x << 1.0, 2.0;
    const auto cov = Covariance::identity(2);
    const PriorSpec p = family_prior(false, 0.5, 1e-2);
    CHECK(distance_cdf(0.0, x, cov, p) == 0.0);
    const DistanceDistribution dist(PosteriorKernel(p, 2, x.squaredNorm()));
    double prev = 0.0;
    for (double r = 0.0; r < 60.0; r += 0.25) {
      const double c = dist.cdf(r);
      CHECK(c >= prev - 1e-12);
      CHECK(c <= 1.0);
      prev = c;
    }
    CHECK(prev > 1.0 - 1e-9);
  }

  TEST_CASE("s = 0 mixture matches Monte Carlo within 3 SE") {
    const PriorSpec p = family_prior(false, 0.5, 1e-2);
    const Vector x = Vector::Zero(2);
    const PosteriorKernel kern(p, 2, 0.0);
    Stream st = derive_stream(71, 0, "dist-s0");
    const auto d = mc_distances(kern, x, 100000, st);
    const DistanceDistribution dist(kern);
    for (double r : {0.01, 0.05, 0.2, 1.0}) {
      const double f = fraction_at_most(d, r);
      const double se = std::sqrt(std::max(f * (1 - f), 1e-12) / d.size());
      CHECK(std::fabs(dist.cdf(r) - f) <= 3 * se);
    }
  }

  TEST_CASE("EIG c = 1, k = 2, s = 4 matches a 10^6-draw Monte Carlo") {
    Vector x(2);
    x << 2.0, 0.0;
    const PosteriorKernel kern(ExpInvGamma{0.5, 1.0}, 2, 4.0);
    Stream st = derive_stream(72, 0, "dist-eig");
    const auto d = mc_distances(kern, x, 1000000, st);
    const DistanceDistribution dist(kern);
    for (double r : {0.3, 1.0, 3.0}) {
      const double f = fraction_at_most(d, r);
      const double se = std::sqrt(f * (1 - f) / d.size());
      CHECK(std::fabs(dist.cdf(r) - f) <= 3 * se);
    }
  }

  TEST_CASE("credible radius hits its level and decreases in alpha") {
    Engine g(73);
    for (int i = 0; i < 30; ++i) {
      const PriorSpec p = family_prior(g() % 2 == 0, uniform(g, 0.2, 0.8), log_uniform(g, 1e-5, 1e-1));
      const int k = 1 + static_cast<int>(g() % 3);
      const Vector x = random_vector(g, k, uniform(g, 0.0, 5.0));
      const DistanceDistribution dist(PosteriorKernel(p, k, x.squaredNorm()));
      double prev = INFINITY;
      for (double alpha : {0.01, 0.05, 0.2, 0.5, 0.9}) {
        const double r = credible_radius(alpha, dist);
        CHECK(std::fabs(dist.cdf(r) - (1 - alpha)) <= 1e-6);
        CHECK(r < prev);
        prev = r;
      }
    }
  }

  TEST_CASE("limit regimes of the raw radius") {
    const PriorSpec p = family_prior(false, 0.5, 1e-4);
    Vector x(2);
    x << 10.0, 0.0;
    const double chi = chisq_upper_quantile(0.05, 2.0);
    CHECK(std::fabs(credible_radius(0.05, x, Covariance::identity(2), p) / chi - 1.0) <= 0.1);
    CHECK(credible_radius(0.05, Vector::Zero(2), Covariance::identity(2), p) < 0.01 * chi);
  }

  TEST_CASE("radius agrees with the Monte Carlo quantile oracle") {
    OracleConfig cfg;
    cfg.mc_draws = 200000;
    cfg.bootstrap = 200;
    const PriorSpec priors[] = {family_prior(false, 0.5, 1e-2), family_prior(true, 0.3, 1e-2),
                                family_prior(true, 0.5, 1e-4)};
    for (const auto& p : priors) {
      for (double s : {0.0, 10.0}) {
        Vector x = Vector::Zero(2);
        x(0) = std::sqrt(s);
        const auto q = mc_distance_quantile(0.05, x, Covariance::identity(2), p, cfg);
        const double r = credible_radius(0.05, x, Covariance::identity(2), p);
        CHECK(r >= q.ci_lo);
        CHECK(r <= q.ci_hi);
      }
    }
  }

  TEST_CASE("median at s = 0 matches the stored oracle value") {
    std::ifstream in(std::string(GLSHRINK_FIXTURE_DIR) + "/oracle_reference.json");
    const auto ref = nlohmann::json::parse(in).at("horseshoe_k1_tau0.05_s0_median");
    const double r = credible_radius(0.5, Vector::Zero(1), Covariance::identity(1), family_prior(false, 0.5, 0.05));
    CHECK(r >= ref.at("ci_lo").get<double>());
    CHECK(r <= ref.at("ci_hi").get<double>());
  }

  TEST_CASE("adjusted radius and its constants") {
    const PriorSpec p = family_prior(false, 0.5, 1e-3);
    const auto res = adjusted_radius(2.0, p, 2, 0.05);
    const double chi_b = chisq_upper_quantile(0.06, 2.0);
    CHECK(res.beta == doctest::Approx(0.06));
    CHECK(res.exponent == doctest::Approx(0.25));
    CHECK(res.multiplier == doctest::Approx(2 * 5.99146 * std::pow(chi_b, -0.25)).epsilon(1e-5));
    CHECK(res.adjusted_radius == res.multiplier * std::pow(2.0, 0.25));
    const auto at_beta = adjusted_radius(chi_b, p, 2, 0.05);
    CHECK(at_beta.adjusted_radius > chisq_upper_quantile(0.05, 2.0));
    RadiusOptions big_rho;
    big_rho.rho = 1e9;
    const auto flat = adjusted_radius(7.0, p, 2, 0.05, big_rho);
    CHECK(flat.adjusted_radius == doctest::Approx(flat.multiplier).epsilon(1e-8));
    RadiusOptions adaptive;
    adaptive.adaptive_rho = true;
    CHECK(adjusted_radius(100.0, p, 2, 0.05, adaptive).rho == 8.0);
    CHECK(adjusted_radius(0.1, p, 2, 0.05, adaptive).rho == 0.1);
  }

  TEST_CASE("invalid constants") {
    const PriorSpec p = family_prior(false, 0.5, 1e-3);
    RadiusOptions o;
    o.beta = 0.05;
    CHECK_ERROR_CODE(adjusted_radius(1.0, p, 2, 0.05, o), ErrorCode::InvalidConstants);
    RadiusOptions small;
    small.multiplier = 0.5 * multiplier_lower_bound(2, 0.05, 0.06, 0.25);
    CHECK_ERROR_CODE(adjusted_radius(1.0, p, 2, 0.05, small), ErrorCode::InvalidConstants);
    RadiusOptions neg;
    neg.rho = 0.0;
    CHECK_ERROR_CODE(adjusted_radius(1.0, p, 2, 0.05, neg), ErrorCode::InvalidConstants);
    CHECK_ERROR_CODE(adjusted_radius(1.0, family_prior(false, 1.2, 1e-3), 2, 0.05), ErrorCode::InvalidConstants);
    CHECK_ERROR_CODE(adjusted_radius(1.0, family_prior(true, 0.5, 1e-3), 2, 0.6), ErrorCode::InvalidConstants);
  }

  TEST_CASE("property: default multiplier exceeds its lower bound") {
    for (double alpha : {0.01, 0.02, 0.05, 0.1, 0.15, 0.2}) {
      for (int k : {1, 2, 5}) {
        for (bool eig : {false, true}) {
          const PriorSpec p = family_prior(eig, 0.5, 1e-3);
          const auto r = adjusted_radius(1.0, p, k, alpha);
          CHECK(r.multiplier > multiplier_lower_bound(k, alpha, r.beta, r.exponent));
        }
      }
    }
  }

  TEST_CASE("contains is a closed ball around the estimate") {
    RadiusResult r;
    r.adjusted_radius = 4.0;
    const auto cov = Covariance::identity(2);
    Vector c(2), on(2), off(2);
    c << 1.0, 1.0;
    on << 1.0, 3.0;
    off << 1.0, 3.0 + 1e-9;
    CHECK(contains(r, c, c, cov));
    CHECK(contains(r, on, c, cov));
    CHECK_FALSE(contains(r, off, c, cov));
    Vector bad(3);
    bad << 1, 2, 3;
    CHECK_ERROR_CODE(contains(r, bad, c, cov), ErrorCode::DimensionMismatch);
  }

  TEST_CASE("regime classification") {
    const PriorSpec p = family_prior(false, 0.5, 1e-3);
    const auto rc = default_regime_constants(p);
    CHECK(rc.K_M == 0.5);
    CHECK(rc.K_L == 1.5);
    CHECK(classify_regime(Vector::Zero(2), Covariance::identity(2), p, rc) == Regime::S);
    CHECK(classify_regime_sq(1.5 * std::log(1000.0), p, rc) == Regime::L);
    CHECK(classify_regime_sq(1.5 * std::log(1000.0) * (1 - 1e-9), p, rc) == Regime::Unclassified);
    CHECK(classify_regime_sq(2e-3, p, rc) == Regime::Unclassified);
    for (Regime g : {Regime::S, Regime::M, Regime::L}) {
      CHECK(classify_regime_sq(regime_placement(g, p, rc), p, rc) == g);
    }
    auto bad = rc;
    bad.K_M = 1.0;
    CHECK_ERROR_CODE(validate_regime_constants(bad, p), ErrorCode::InvalidConstants);
    bad = rc;
    bad.K_L = 0.9;
    CHECK_ERROR_CODE(validate_regime_constants(bad, p), ErrorCode::InvalidConstants);
    // τ too large for the ordering K_S τ < f τ < K_M log(1/τ): nothing classifies.
    const PriorSpec wide = family_prior(false, 0.5, 0.5);
    CHECK(classify_regime_sq(0.0, wide, default_regime_constants(wide)) == Regime::Unclassified);
    CHECK(classify_regime_sq(5.0, wide, default_regime_constants(wide)) == Regime::Unclassified);
  }

  TEST_CASE("raw-radius posterior containment equals 1 - alpha") {
    const PriorSpec p = family_prior(false, 0.5, 1e-3);
    Vector x(2);
    x << 2.5, 1.0;
    const PosteriorKernel kern(p, 2, x.squaredNorm());
    const double r = credible_radius(0.05, DistanceDistribution(kern));
    Stream st = derive_stream(74, 0, "raw-calib");
    const auto d = mc_distances(kern, x, 200000, st);
    const double f = fraction_at_most(d, r);
    CHECK(std::fabs(f - 0.95) <= 3 * std::sqrt(0.05 * 0.95 / d.size()));
  }

  TEST_CASE("batch radii are thread-count invariant") {
    Engine g(75);
    Matrix xs(40, 2);
    for (int i = 0; i < 40; ++i) xs.row(i) = random_vector(g, 2, 2.0).transpose();
    const PriorSpec p = family_prior(true, 0.5, 1e-3);
    const auto a = credible_radius_batch(0.05, xs, Covariance::identity(2), p);
    for (int i = 0; i < 40; i += 9) {
      CHECK(a[static_cast<std::size_t>(i)] == credible_radius(0.05, xs.row(i).transpose(), Covariance::identity(2), p));
    }
  }
}
