#include <cmath>
#include <map>

#include "doctest.h"
#include "pufmc/errors.hpp"
#include "pufmc/models.hpp"
#include "pufmc/rng.hpp"

using namespace pufmc;

namespace {

Challenge from_index(std::size_t k, std::size_t idx) {
  std::vector<std::int8_t> bits(k);
  for (std::size_t i = 0; i < k; ++i) bits[i] = (idx >> i) & 1U ? -1 : 1;
  return Challenge(bits);
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  NormalSampler normal;
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

int sgn(double v) { return v >= 0 ? 1 : -1; }

// Feed-forward response written with 1-indexed sums, stage f2 in both.
int ff_literal(const std::vector<double>& w, const FeatureVector& x, std::size_t f1, std::size_t f2) {
  double s1 = 0, s2 = 0, s3 = 0;
  for (std::size_t i = 1; i <= f2; ++i) s1 += w[i - 1] * x[i - 1];
  for (std::size_t i = 1; i <= f1; ++i) s2 += w[i - 1] * x[i - 1];
  for (std::size_t i = f2; i <= w.size(); ++i) s3 += w[i - 1] * x[i - 1];
  return sgn(s1 + sgn(s2) * s3);
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("arbiter examples") {
    CHECK(eval_arbiter(ArbiterModel{{1, -1, 0.5}}, FeatureVector({1, 1, -1})) == -1);
    CHECK(eval_arbiter(ArbiterModel{{2, 0, 0}}, FeatureVector({1, -1, 1})) == 1);
    CHECK(eval_arbiter(ArbiterModel{{2, 0, 0}}, FeatureVector({1, 1, -1})) == 1);
    CHECK(eval_arbiter(ArbiterModel{{1, -1}}, FeatureVector({1, 1})) == 1);
    CHECK_THROWS_AS(eval_arbiter(ArbiterModel{{1, 2}}, FeatureVector({1, 1, 1})), DimensionError);
  }

  TEST_CASE("arbiter population is unbiased on a fixed challenge, k = 3") {
    const auto x = transform_challenge(Challenge({1, -1, 1}));
    int sum = 0;
    for (std::uint64_t s = 0; s < 10000; ++s) sum += eval_arbiter(ArbiterModel{gaussian(3, s)}, x);
    CHECK(std::abs(sum / 10000.0) < 0.03);
  }

  TEST_CASE("xor with one chain equals arbiter on all challenges, k = 5") {
    const ArbiterModel a{gaussian(5, 1)};
    const XorModel m{{a}};
    for (std::size_t idx = 0; idx < 32; ++idx) {
      const auto x = transform_challenge(from_index(5, idx));
      CHECK(eval_xor(m, x) == eval_arbiter(a, x));
    }
  }

  TEST_CASE("xor of identical chains is always +1") {
    const ArbiterModel a{gaussian(6, 2)};
    for (std::size_t idx = 0; idx < 64; ++idx) {
      CHECK(eval_xor(XorModel{{a, a}}, transform_challenge(from_index(6, idx))) == 1);
    }
  }

  TEST_CASE("xor product of signs equals sign of product, k = 4") {
    const XorModel m{{ArbiterModel{gaussian(4, 3)}, ArbiterModel{gaussian(4, 4)}}};
    for (std::size_t idx = 0; idx < 16; ++idx) {
      const auto x = transform_challenge(from_index(4, idx));
      double prod = 1;
      for (const auto& c : m.chains) {
        double s = 0;
        for (std::size_t i = 0; i < 4; ++i) s += c.weights[i] * x[i];
        prod *= s;
      }
      CHECK(eval_xor(m, x) == sgn(prod));
    }
  }

  TEST_CASE("feed-forward matches the literal nested formula") {
    SUBCASE("f1 = f2 = k, k = 4") {
      const auto w = gaussian(4, 5);
      for (std::size_t idx = 0; idx < 16; ++idx) {
        const auto x = transform_challenge(from_index(4, idx));
        CHECK(eval_ff(FeedForwardModel{w, 4, 4}, x) == ff_literal(w, x, 4, 4));
      }
    }
    SUBCASE("all loop placements, k = 6") {
      for (std::uint64_t s = 0; s < 5; ++s) {
        const auto w = gaussian(6, 100 + s);
        for (std::size_t f1 = 1; f1 <= 6; ++f1) {
          for (std::size_t f2 = f1; f2 <= 6; ++f2) {
            for (std::size_t idx = 0; idx < 64; ++idx) {
              const auto x = transform_challenge(from_index(6, idx));
              REQUIRE(eval_ff(FeedForwardModel{w, f1, f2}, x) == ff_literal(w, x, f1, f2));
            }
          }
        }
      }
    }
  }

  TEST_CASE("feed-forward all-positive case and loop validation") {
    CHECK(eval_ff(FeedForwardModel{{1, 1, 1, 1}, 1, 3}, FeatureVector({1, 1, 1, 1})) == 1);
    CHECK_THROWS_AS(eval_ff(FeedForwardModel{{1, 1, 1}, 3, 2}, FeatureVector({1, 1, 1})), ConfigError);
    CHECK_THROWS_AS(eval_ff(FeedForwardModel{{1, 1, 1}, 0, 2}, FeatureVector({1, 1, 1})), ConfigError);
  }

  TEST_CASE("negating all weights flips arbiter and XOR responses") {
    // Dyadic weights with distinct magnitudes keep every partial sum non-zero.
    const std::vector<double> w{0.5, -0.25, 0.125, 1.0, -0.0625, 0.03125};
    std::vector<double> neg(w);
    for (auto& v : neg) v = -v;
    for (std::size_t idx = 0; idx < 64; ++idx) {
      const auto x = transform_challenge(from_index(6, idx));
      CHECK(eval_arbiter(ArbiterModel{neg}, x) == -eval_arbiter(ArbiterModel{w}, x));
      const XorModel xw{{ArbiterModel{w}, ArbiterModel{w}, ArbiterModel{w}}};
      const XorModel xn{{ArbiterModel{neg}, ArbiterModel{neg}, ArbiterModel{neg}}};
      CHECK(eval_xor(xn, x) == -eval_xor(xw, x));
    }
  }

  TEST_CASE("CT routing rules") {
    // All +1 bits: no {0,1}-encoded ones anywhere.
    CHECK(ct_route(std::vector<std::int8_t>(8, 1)) == CtMode::Apuf);
    // Position 1 (odd) flipped: odd count 1, even count 0.
    CHECK(ct_route(std::vector<std::int8_t>{-1, 1, 1, 1}) == CtMode::Ro);
    // Positions 1 and 2: both counts odd.
    CHECK(ct_route(std::vector<std::int8_t>{-1, -1, 1, 1}) == CtMode::BrConcat);
    // Positions 1 and 3: odd count 2, even count 0.
    CHECK(ct_route(std::vector<std::int8_t>{-1, 1, -1, 1}) == CtMode::BrXor);
    // Position 2 only: odd count 0.
    CHECK(ct_route(std::vector<std::int8_t>{1, -1, 1, 1}) == CtMode::Apuf);
    // Positions 1, 2, 3: odd count 2 (even), even count 1 (odd).
    CHECK(ct_route(std::vector<std::int8_t>{-1, -1, -1, 1}) == CtMode::Apuf);
  }

  TEST_CASE("CT mode frequencies match exact parity-class counts, k = 8") {
    // Exact class sizes: odd positions contribute a ones-count a, even positions b,
    // each drawn from C(4, .).
    const int binom[5] = {1, 4, 6, 4, 1};
    std::map<CtMode, double> exact;
    for (int a = 0; a <= 4; ++a) {
      for (int b = 0; b <= 4; ++b) {
        CtMode m;
        if (a == 0) {
          m = CtMode::Apuf;
        } else if (b % 2 == 1 && a % 2 == 1) {
          m = CtMode::BrConcat;
        } else if (b % 2 == 0 && a % 2 == 0) {
          m = CtMode::BrXor;
        } else if (b % 2 == 0 && a % 2 == 1) {
          m = CtMode::Ro;
        } else {
          m = CtMode::Apuf;
        }
        exact[m] += binom[a] * binom[b] / 256.0;
      }
    }
    const auto cs = sample_challenges(8, 100000, 77, false);
    std::map<CtMode, double> freq;
    for (const auto& c : cs) freq[ct_route(c.bits())] += 1.0 / 100000;
    for (const auto& [mode, p] : exact) {
      const double se = std::sqrt(p * (1 - p) / 100000);
      CHECK(std::abs(freq[mode] - p) < 4 * se);
    }
  }

  TEST_CASE("CT response is deterministic and validates dimensions") {
    CtModel m;
    m.k = 9;
    m.arbiter_stage.weights = gaussian(9, 1);
    m.apuf_mode.weights = gaussian(4, 2);
    m.br_oqo = gaussian(3, 3);
    m.br_psp = gaussian(3, 4);
    m.ro_g = gaussian(3, 5);
    m.ro_h = gaussian(3, 6);
    for (std::size_t idx = 0; idx < 512; ++idx) {
      const auto c = from_index(9, idx);
      CHECK(eval_ct(m, c) == eval_ct(m, c));
    }
    CHECK_THROWS_AS(eval_ct(m, from_index(8, 0)), DimensionError);
    m.ro_h.pop_back();
    CHECK_THROWS_AS(eval_ct(m, from_index(9, 0)), DimensionError);
  }

  TEST_CASE("CT response composes the arbiter and mode functions") {
    CtModel m;
    m.k = 6;
    m.arbiter_stage.weights = gaussian(6, 11);
    m.apuf_mode.weights = gaussian(3, 12);
    m.br_oqo = gaussian(2, 13);
    m.br_psp = gaussian(2, 14);
    m.ro_g = gaussian(2, 15);
    m.ro_h = gaussian(2, 16);
    for (std::size_t idx = 0; idx < 64; ++idx) {
      const auto c = from_index(6, idx);
      double s = 0;
      const auto x = transform_challenge(c);
      for (std::size_t i = 0; i < 6; ++i) s += m.arbiter_stage.weights[i] * x[i];
      const int ra = sgn(s);
      std::vector<std::int8_t> cx(6);
      for (std::size_t i = 0; i < 6; ++i) cx[i] = static_cast<std::int8_t>(c[i] * ra);
      CHECK(eval_ct(m, c) == eval_ct_mode(m, cx) * ra);
    }
  }
}
