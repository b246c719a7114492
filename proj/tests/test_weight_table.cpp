#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "glshrink/posterior.hpp"
#include "glshrink/weight_table.hpp"
#include "lemma_suite.hpp"
#include "test_util.hpp"

using namespace glshrink;
using namespace glshrink::test;

TEST_SUITE("weight_table") {
  TEST_CASE("knots reproduce direct computation exactly") {
    const PriorSpec p = family_prior(false, 0.5, 1e-3);
    const auto t = build_weight_table(p, 2, 60.0, 1e-6);
    REQUIRE(t.grid.size() >= 2);
    CHECK(t.grid.front() == 0.0);
    CHECK(t.grid.back() == 60.0);
    for (std::size_t i = 0; i < t.grid.size(); i += std::max<std::size_t>(1, t.grid.size() / 25)) {
      CHECK(t.lookup(t.grid[i]) == PosteriorKernel(p, 2, t.grid[i]).shrinkage_weight());
    }
  }

  TEST_CASE("property: 1000 random s within tol of direct quadrature") {
    const PriorSpec priors[] = {family_prior(false, 0.5, 1e-3), family_prior(true, 0.5, 1e-4)};
    Engine g(51);
    for (const auto& p : priors) {
      for (int k : {1, 2}) {
        const double tol = 1e-6;
        const auto t = build_weight_table(p, k, 100.0, tol);
        for (int i = 0; i < 500; ++i) {
          const double s = uniform(g, 0.0, 100.0);
          CHECK(std::fabs(t.lookup(s) - PosteriorKernel(p, k, s).shrinkage_weight()) <= tol);
        }
      }
    }
  }

  TEST_CASE("weights increase and stay in (0, 1)") {
    const auto t = build_weight_table(family_prior(true, 0.3, 1e-2), 1, 80.0, 1e-8);
    for (std::size_t i = 0; i < t.weights.size(); ++i) {
      CHECK(t.weights[i] > 0.0);
      CHECK(t.weights[i] < 1.0);
      if (i > 0) {
        CHECK(t.grid[i] > t.grid[i - 1]);
        CHECK(t.weights[i] >= t.weights[i - 1]);
      }
    }
    double prev = 0.0;
    for (double s = 0.0; s < 80.0; s += 0.01) {
      const double w = t.lookup(s);
      CHECK(w >= prev);
      prev = w;
    }
  }

  TEST_CASE("lookup beyond s_max falls back to quadrature") {
    const PriorSpec p = family_prior(false, 0.5, 1e-3);
    const auto t = build_weight_table(p, 1, 10.0, 1e-6);
    CHECK(t.lookup(25.0) == PosteriorKernel(p, 1, 25.0).shrinkage_weight());
  }

  TEST_CASE("rebuilds are bit-identical") {
    const PriorSpec p = family_prior(false, 0.5, 1e-3);
    const auto a = build_weight_table(p, 2, 50.0, 1e-9), b = build_weight_table(p, 2, 50.0, 1e-9);
    CHECK(a.grid == b.grid);
    CHECK(a.weights == b.weights);
    CHECK(a.slope_left == b.slope_left);
  }

  TEST_CASE("binary cache round trip and invalidation") {
    const PriorSpec p = family_prior(true, 0.5, 1e-3);
    const auto t = build_weight_table(p, 2, 40.0, 1e-8);
    const std::string path = "weight_table_cache_test.bin";
    save_weight_table(t, path);
    const auto loaded = load_weight_table(path, p, 2, 40.0, 1e-8);
    REQUIRE(loaded.has_value());
    CHECK(loaded->grid == t.grid);
    CHECK(loaded->weights == t.weights);
    CHECK_FALSE(load_weight_table(path, p, 1, 40.0, 1e-8).has_value());
    CHECK_FALSE(load_weight_table(path, family_prior(true, 0.4, 1e-3), 2, 40.0, 1e-8).has_value());
    CHECK_FALSE(load_weight_table("missing.bin", p, 2, 40.0, 1e-8).has_value());
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out << "garbage";
    }
    CHECK_FALSE(load_weight_table(path, p, 2, 40.0, 1e-8).has_value());
    const auto rebuilt = load_or_build_weight_table(path, p, 2, 40.0, 1e-8);
    CHECK(rebuilt.weights == t.weights);
    CHECK(load_weight_table(path, p, 2, 40.0, 1e-8).has_value());
    std::remove(path.c_str());
  }
}
