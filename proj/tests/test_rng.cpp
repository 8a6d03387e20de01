#include <cmath>
#include <set>

#include "doctest.h"
#include "pufmc/rng.hpp"

using namespace pufmc;

TEST_SUITE("rng") {
  TEST_CASE("splitmix64 matches reference outputs") {
    // Reference values for seed 1234567 from the public SplitMix64 test vector.
    std::uint64_t s = 1234567;
    CHECK(splitmix64_next(s) == 6457827717110365317ULL);
    CHECK(splitmix64_next(s) == 3203168211198807973ULL);
    CHECK(splitmix64_next(s) == 9817491932198370423ULL);
  }

  TEST_CASE("derived streams are distinct and stable") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(42, 7) == derive_seed(42, 7));
    CHECK(derive_seed(42, 7) != derive_seed(43, 7));
  }

  TEST_CASE("xoshiro is reproducible and uniform in [0, 1)") {
    Xoshiro256 a(99), b(99);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const double u = a.uniform();
      CHECK(u == b.uniform());
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
    }
    CHECK(std::abs(sum / 100000 - 0.5) < 0.005);
  }

  TEST_CASE("normal sampler moments") {
    Xoshiro256 rng(5);
    NormalSampler normal;
    const int n = 400000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
      const double z = normal(rng);
      s1 += z;
      s2 += z * z;
      s4 += z * z * z * z;
    }
    CHECK(std::abs(s1 / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.01);
    CHECK(std::abs(s4 / n - 3.0) < 0.05);
  }
}
