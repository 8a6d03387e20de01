#include <set>

#include "doctest.h"
#include "pufmc/challenge.hpp"
#include "pufmc/errors.hpp"

using namespace pufmc;

namespace {

Challenge from_index(std::size_t k, std::size_t idx) {
  std::vector<std::int8_t> bits(k);
  for (std::size_t i = 0; i < k; ++i) bits[i] = (idx >> i) & 1U ? -1 : 1;
  return Challenge(bits);
}

}  // namespace

TEST_SUITE("challenge") {
  TEST_CASE("sign vectors reject invalid entries") {
    CHECK_THROWS_AS(Challenge(std::vector<std::int8_t>{}), ConfigError);
    CHECK_THROWS_AS(Challenge(std::vector<std::int8_t>{1, 0, -1}), ConfigError);
    CHECK_THROWS_AS(Challenge(std::vector<std::int8_t>{2}), ConfigError);
  }

  TEST_CASE("parse accepts both notations") {
    CHECK(Challenge::parse("+-+") == Challenge({1, -1, 1}));
    CHECK(Challenge::parse("1,-1,+1") == Challenge({1, -1, 1}));
    CHECK(Challenge::parse("+1 -1 -1") == Challenge({1, -1, -1}));
    CHECK(Challenge::parse("+-+").to_string() == "+-+");
    CHECK_THROWS_AS(Challenge::parse("+x-"), ConfigError);
  }

  TEST_CASE("transform examples") {
    CHECK(transform_challenge(Challenge({1, 1, 1})) == FeatureVector({1, 1, 1}));
    CHECK(transform_challenge(Challenge({1, -1, -1})) == FeatureVector({1, 1, -1}));
  }

  TEST_CASE("transform matches the suffix-product definition") {
    for (std::size_t idx = 0; idx < 64; ++idx) {
      const auto c = from_index(6, idx);
      const auto x = transform_challenge(c);
      for (std::size_t i = 0; i < 6; ++i) {
        int p = 1;
        for (std::size_t j = i; j < 6; ++j) p *= c[j];
        CHECK(x[i] == p);
      }
      CHECK(x[5] == c[5]);
    }
  }

  TEST_CASE("inverse transform round trip, k = 6") {
    for (std::size_t idx = 0; idx < 64; ++idx) {
      const auto c = from_index(6, idx);
      CHECK(inverse_transform(transform_challenge(c)) == c);
    }
  }

  TEST_CASE("parity transform is a bijection for k <= 8") {
    for (std::size_t k = 1; k <= 8; ++k) {
      std::set<FeatureVector> images;
      for (std::size_t idx = 0; idx < (1U << k); ++idx) {
        const auto c = from_index(k, idx);
        const auto x = transform_challenge(c);
        REQUIRE(inverse_transform(x) == c);
        images.insert(x);
      }
      CHECK(images.size() == (1U << k));
    }
  }

  TEST_CASE("sample_challenges honours distinctness and exclusions") {
    const auto a = sample_challenges(4, 16, 3, true);
    CHECK(std::set<Challenge>(a.begin(), a.end()).size() == 16);
    CHECK(a == sample_challenges(4, 16, 3, true));
    CHECK_THROWS_AS(sample_challenges(4, 17, 3, true), InfeasibleError);

    const std::vector<Challenge> banned{Challenge({1, 1}), Challenge({-1, -1})};
    const auto b = sample_challenges(2, 200, 9, false, banned);
    for (const auto& c : b) {
      CHECK(c != banned[0]);
      CHECK(c != banned[1]);
    }
    CHECK_THROWS_AS(sample_challenges(1, 1, 0, false, std::vector<Challenge>{Challenge({1}), Challenge({-1})}),
                    InfeasibleError);
    CHECK_THROWS_AS(sample_challenges(3, 1, 0, false, banned), DimensionError);
  }

  TEST_CASE("sampled challenge bits are balanced") {
    const auto cs = sample_challenges(64, 2000, 11, true);
    std::vector<int> sums(64, 0);
    for (const auto& c : cs) {
      for (std::size_t i = 0; i < 64; ++i) sums[i] += c[i];
    }
    for (int s : sums) CHECK(std::abs(s) < 4 * 45);
  }
}
