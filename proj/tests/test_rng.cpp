#include <doctest.h>

#include <set>

#include "glshrink/rng.hpp"

using namespace glshrink;

TEST_SUITE("rng") {
  TEST_CASE("same triple gives identical draws") {
    Stream a = derive_stream(42, 3, "label"), b = derive_stream(42, 3, "label");
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
  }

  TEST_CASE("any input change gives a different stream") {
    const auto first = [](Stream s) { return s(); };
    std::set<std::uint64_t> seen;
    seen.insert(first(derive_stream(42, 3, "label")));
    seen.insert(first(derive_stream(43, 3, "label")));
    seen.insert(first(derive_stream(42, 4, "label")));
    seen.insert(first(derive_stream(42, 3, "label2")));
    CHECK(seen.size() == 4);
  }

  TEST_CASE("neighbouring replicate streams are uncorrelated") {
    const int n = 100000;
    for (std::uint64_t r = 0; r < 5; ++r) {
      Stream a = derive_stream(7, r, "corr"), b = derive_stream(7, r + 1, "corr");
      double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
      for (int i = 0; i < n; ++i) {
        const double x = a.uniform(), y = b.uniform();
        sa += x;
        sb += y;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
      }
      const double cov = sab / n - (sa / n) * (sb / n);
      const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
      CHECK(std::fabs(corr) < 0.01);
    }
  }

  TEST_CASE("uniform lies in the open unit interval with the right moments") {
    Stream s = derive_stream(1, 1, "u");
    double sum = 0, sum2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double u = s.uniform();
      CHECK_FALSE((u <= 0.0 || u >= 1.0));
      sum += u;
      sum2 += u * u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sum2 / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12.0).epsilon(0.01));
  }

  TEST_CASE("normal draws have unit variance") {
    Stream s = derive_stream(1, 2, "n");
    double sum = 0, sum2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double z = s.normal();
      sum += z;
      sum2 += z * z;
    }
    CHECK(std::fabs(sum / n) < 0.01);
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.01));
  }
}
