#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "glshrink/oracle.hpp"
#include "glshrink/posterior.hpp"
#include "glshrink/specfun.hpp"
#include "lemma_suite.hpp"
#include "test_util.hpp"

using namespace glshrink;
using namespace glshrink::test;

namespace {

nlohmann::json fixture(const std::string& name) {
  std::ifstream in(std::string(GLSHRINK_FIXTURE_DIR) + "/" + name);
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

GlobalLocal horseshoe(double tau) {
  GlobalLocal g;
  g.tau = tau;
  return g;
}

// w at c = 1: E(κ) under κ^{A-1} e^{-sκ/2} on (0, 1), A = d + k/2.
double eig_c1_weight(double d, int k, double s) {
  const double A = d + 0.5 * k;
  if (s == 0.0) return 1.0 - A / (A + 1.0);
  return 1.0 - (2.0 / s) * A * reg_inc_gamma_lower(A + 1.0, s / 2.0) / reg_inc_gamma_lower(A, s / 2.0);
}

}  // namespace

TEST_SUITE("posterior") {
  TEST_CASE("EIG at c = 1 collapses to a truncated gamma") {
    const double d = 0.5, s = 3.0;
    const int k = 2;
    const PosteriorKernel kern(ExpInvGamma{d, 1.0}, k, s);
    for (double k1 : {0.1, 0.4}) {
      for (double k2 : {0.6, 0.95}) {
        const double expect = (d + k / 2.0 - 1.0) * std::log(k1 / k2) - s / 2.0 * (k1 - k2);
        CHECK(kern.log_post_kappa(k1) - kern.log_post_kappa(k2) == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("horseshoe log-density ratio matches the hand-written kernel") {
    const double a = 0.5, tau = 0.01, s = 5.0;
    const int k = 3;
    const PosteriorKernel kern(horseshoe(tau), k, s);
    auto log_kernel = [&](double kappa) {
      const double u = (1 - kappa) / (kappa * tau);
      return (k / 2.0 + a - 1.0) * std::log(kappa) - (a + 1.0) * std::log1p(-kappa) + std::log(u / (1 + u)) -
             s * kappa / 2.0;
    };
    for (double k1 : {0.01, 0.3, 0.7}) {
      const double k2 = 0.9;
      CHECK(kern.log_post_kappa(k1) - kern.log_post_kappa(k2) ==
            doctest::Approx(log_kernel(k1) - log_kernel(k2)).epsilon(1e-11));
    }
  }

  TEST_CASE("normalizer matches the dense-grid oracle") {
    const auto ref = fixture("oracle_reference.json").at("horseshoe_k1_tau0.05_s9");
    const PosteriorKernel kern(horseshoe(0.05), 1, 9.0);
    CHECK(close_rel(std::exp(kern.log_norm()), ref.at("grid_normalizer").get<double>(), 1e-7));
    CHECK(close_rel(std::exp(kern.log_norm()), grid_normalizer(horseshoe(0.05), 1, 9.0).value, 1e-7));
  }

  TEST_CASE("shrinkage weight examples") {
    CHECK(PosteriorKernel(ExpInvGamma{0.5, 1.0}, 2, 0.0).shrinkage_weight() == doctest::Approx(0.4).epsilon(1e-10));
    const double w6 = PosteriorKernel(ExpInvGamma{0.5, 1.0}, 2, 6.0).shrinkage_weight();
    CHECK(std::fabs(w6 - eig_c1_weight(0.5, 2, 6.0)) <= 1e-9);

    const auto ref = fixture("oracle_reference.json").at("horseshoe_k1_tau0.05_s9");
    const double w = PosteriorKernel(horseshoe(0.05), 1, 9.0).shrinkage_weight();
    CHECK(std::fabs(w - ref.at("mc_weight").get<double>()) <= 3.0 * ref.at("mc_weight_se").get<double>());
    CHECK(std::fabs(w - ref.at("grid_weight").get<double>()) <= 1e-9);
  }

  TEST_CASE("property: analytic EIG c = 1 weight over random (d, k, s)") {
    Engine g(31);
    for (int i = 0; i < 200; ++i) {
      const double d = uniform(g, 0.05, 0.95);
      const int k = 1 + static_cast<int>(g() % 8);
      const double s = log_uniform(g, 1e-3, 300.0);
      CHECK(std::fabs(PosteriorKernel(ExpInvGamma{d, 1.0}, k, s).shrinkage_weight() - eig_c1_weight(d, k, s)) <= 1e-8);
    }
  }

  TEST_CASE("truncated moments") {
    const PosteriorKernel kern(ExpInvGamma{0.5, 0.01}, 2, 25.0);
    const double above = kern.truncated_kappa_moment(0.5, Side::Above);
    const double below = kern.truncated_kappa_moment(0.5, Side::Below);
    CHECK(std::fabs(above + below - (1.0 - kern.shrinkage_weight())) <= 1e-10);
    const PriorSpec p = ExpInvGamma{0.5, 0.01};
    CHECK(std::fabs(above - grid_truncated_moment(p, 2, 25.0, 0.5, true).value) <= 1e-8);
    CHECK(std::fabs(below - grid_truncated_moment(p, 2, 25.0, 0.5, false).value) <= 1e-8);
    double prev = 1.0;
    for (double xi : {0.9, 0.99, 0.999, 0.999999}) {
      const double v = kern.truncated_kappa_moment(xi, Side::Above);
      CHECK(v <= prev);
      prev = v;
    }
    CHECK(prev < 1e-6);
    CHECK(std::exp(kern.log_truncated_kappa_moment(0.5, Side::Above)) == doctest::Approx(above).epsilon(1e-10));
  }

  TEST_CASE("property: truncated moments partition E(kappa)") {
    Engine g(32);
    for (int i = 0; i < 200; ++i) {
      const bool eig = g() % 2 == 0;
      const PriorSpec p = family_prior(eig, uniform(g, 0.1, 0.9), log_uniform(g, 1e-6, 0.5));
      const int k = 1 + static_cast<int>(g() % 5);
      const PosteriorKernel kern(p, k, log_uniform(g, 1e-2, 500.0));
      const double xi = uniform(g, 0.01, 0.99);
      const double sum = kern.truncated_kappa_moment(xi, Side::Above) + kern.truncated_kappa_moment(xi, Side::Below);
      CHECK(std::fabs(sum - (1.0 - kern.shrinkage_weight())) <= 1e-10);
    }
  }

  TEST_CASE("property: weight in (0, 1), CDF monotone, variance identity") {
    Engine g(33);
    for (int i = 0; i < 100; ++i) {
      const bool eig = g() % 2 == 0;
      const PriorSpec p = family_prior(eig, uniform(g, 0.1, 0.9), log_uniform(g, 1e-6, 0.5));
      const int k = 1 + static_cast<int>(g() % 5);
      const double s = log_uniform(g, 1e-2, 200.0);
      const PosteriorKernel kern(p, k, s);
      const double w = kern.shrinkage_weight();
      CHECK(w > 0.0);
      CHECK(w < 1.0);
      double prev = 0.0;
      for (double kap = 0.01; kap < 1.0; kap += 0.01) {
        const double c = kern.cdf(kap);
        CHECK(c >= prev - 1e-14);
        prev = c;
      }
      // Var(κ | s) = 2 dw/ds.
      const double h = 1e-3 * std::max(1.0, s);
      const double dw = (PosteriorKernel(p, k, s + h).shrinkage_weight() - PosteriorKernel(p, k, s - h).shrinkage_weight()) /
                        (2 * h);
      CHECK(std::fabs(kern.kappa_variance() - 2.0 * dw) <= 1e-5 * std::max(1.0, kern.kappa_variance()) + 1e-8);
    }
  }

  TEST_CASE("domain errors") {
    const PosteriorKernel kern(horseshoe(0.01), 1, 1.0);
    CHECK_ERROR_CODE(kern.log_post_kappa(0.0), ErrorCode::DomainError);
    CHECK_ERROR_CODE(kern.log_post_kappa(1.0), ErrorCode::DomainError);
    CHECK_ERROR_CODE(PosteriorKernel(horseshoe(0.01), 1, -1.0), ErrorCode::DomainError);
    GlobalLocal bad = horseshoe(0.01);
    bad.L = constant_L();
    CHECK_ERROR_CODE(PosteriorKernel(bad, 1, 1.0), ErrorCode::DomainError);
  }

  TEST_CASE("large s stays finite") {
    for (double s : {1e3, 1e4}) {
      const PosteriorKernel kern(horseshoe(1e-4), 2, s);
      CHECK(std::isfinite(kern.log_norm()));
      CHECK(kern.shrinkage_weight() > 0.99);
    }
  }

  TEST_CASE("scaling and shape invariants") {
    for (const auto& r : lemma_suite()) {
      INFO(r.name << ": " << r.detail);
      CHECK(r.pass);
    }
  }
}
