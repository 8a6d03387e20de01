#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pufmc/batch.hpp"
#include "pufmc/closed_form.hpp"
#include "pufmc/errors.hpp"
#include "pufmc/quadrature.hpp"
#include "pufmc/rng.hpp"

using namespace pufmc;

namespace {

// Maclaurin series of erf; accurate to ~1e-15 for |x| <= 3.
double erf_series(double x) {
  double term = x;
  double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    sum += term / (2 * n + 1);
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

}  // namespace

TEST_SUITE("closed_form") {
  TEST_CASE("normal_cdf values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(normal_cdf(1.0) - 0.841345) < 1e-6);
    for (double t : {0.5, 1.0, 2.0, 3.0}) {
      CHECK(std::abs(normal_cdf(t) + normal_cdf(-t) - 1.0) < 1e-15);
    }
    for (double t = -4.0; t <= 4.0; t += 0.25) {
      CHECK(std::abs(normal_cdf(t) - 0.5 * (1.0 + erf_series(t / std::numbers::sqrt2))) < 1e-12);
    }
    CHECK_THROWS_AS(normal_cdf(std::nan("")), ConfigError);
    CHECK_THROWS_AS(normal_cdf(INFINITY), ConfigError);
  }

  TEST_CASE("bivariate orthant formula") {
    CHECK(orthant_prob_2d(0.0) == 0.25);
    CHECK(orthant_prob_2d(1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(orthant_prob_2d(-1.0)) < 1e-15);
    double prev = -1.0;
    for (double r = -1.0; r <= 1.0; r += 0.05) {
      const double p = orthant_prob_2d(std::clamp(r, -1.0, 1.0));
      CHECK(p > prev);
      prev = p;
    }
    CHECK_THROWS_AS(orthant_prob_2d(1.0001), ConfigError);
  }

  TEST_CASE("trivariate orthant formula") {
    CHECK(orthant_prob_3d({0, 0, 0}) == 0.125);
    CHECK(orthant_prob_3d({1, 1, 1}) == doctest::Approx(0.5).epsilon(1e-15));
    for (double r = -0.9; r <= 0.9; r += 0.1) {
      CHECK(orthant_prob_3d({r, 0, 0}) == doctest::Approx(orthant_prob_2d(r) / 2).epsilon(1e-14));
    }
    CHECK_THROWS_AS(orthant_prob_3d({1.2, 0, 0}), ConfigError);
    // Pairwise -0.9 cannot come from a valid covariance.
    CHECK_THROWS_AS(orthant_prob_3d({-0.9, -0.9, -0.9}), ConfigError);
  }

  TEST_CASE("trivariate formula agrees with Gaussian sampling at (0.5, 0.5, 0.5)") {
    // Cholesky factor of the equicorrelated matrix.
    const double l11 = 1.0, l21 = 0.5, l22 = std::sqrt(0.75), l31 = 0.5, l32 = 0.25 / l22;
    const double l33 = std::sqrt(1.0 - l31 * l31 - l32 * l32);
    (void)l11;
    Xoshiro256 rng(31);
    NormalSampler normal;
    const int n = 10000000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
      const double z1 = normal(rng), z2 = normal(rng), z3 = normal(rng);
      const double x = z1, y = l21 * z1 + l22 * z2, z = l31 * z1 + l32 * z2 + l33 * z3;
      hits += (x > 0 && y > 0 && z > 0);
    }
    const double p = orthant_prob_3d({0.5, 0.5, 0.5});
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(hits / double(n) - p) < 3 * se);
  }

  TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
    const auto rule = gauss_legendre(16);
    double w = 0.0, x30 = 0.0;
    for (std::size_t i = 0; i < 16; ++i) {
      w += rule.weights[i];
      x30 += rule.weights[i] * std::pow(rule.nodes[i], 30);
    }
    CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x30 == doctest::Approx(2.0 / 31).epsilon(1e-12));
  }

  TEST_CASE("adaptive 2-D quadrature handles a kinked integrand") {
    // Integral of max(x - y, 0) over the unit square is 1/6.
    const auto r = integrate_2d([](double x, double y) { return std::max(x - y, 0.0); }, 0, 1, 0, 1, 16, 1e-9);
    CHECK(std::abs(r.value - 1.0 / 6.0) < 1e-8);
    CHECK(r.cells > 1);
    CHECK_THROWS_AS(integrate_2d([](double x, double y) { return std::max(x - y, 0.0); }, 0, 1, 0, 1, 16, 1e-14, 8),
                    ConvergenceError);
  }

  TEST_CASE("worked example probability") {
    const auto terms = worked_example_terms();
    CHECK(terms.probability >= 0.71);
    CHECK(terms.probability <= 0.73);
    CHECK(terms.numerator <= terms.denominator);

    QuadratureConfig doubled;
    doubled.nodes = 32;
    CHECK(std::abs(worked_example_prob(doubled) - terms.probability) < 1e-4);

    QuadratureConfig bad;
    bad.nodes = 8;
    CHECK_THROWS_AS(worked_example_prob(bad), ConfigError);
  }

  TEST_CASE("worked example agrees with direct sampling of the weights") {
    Xoshiro256 rng(8);
    NormalSampler normal;
    long kept = 0, hit = 0;
    for (int i = 0; i < 4000000; ++i) {
      const double w1 = normal(rng), w2 = normal(rng), w3 = normal(rng);
      if (w1 + w2 + w3 > 0 && w1 + w2 - w3 > 0 && w1 - w2 + w3 > 0) {
        ++kept;
        hit += (w1 - w2 - w3 > 0);
      }
    }
    const double p = hit / double(kept);
    const double se = std::sqrt(p * (1 - p) / kept);
    CHECK(std::abs(worked_example_prob() - p) < 3 * se);
  }

  TEST_CASE("worked example transcript is the parity image of the stated features") {
    const auto t = worked_example_transcript();
    REQUIRE(t.known.size() == 3);
    CHECK(transform_challenge(t.known[0]) == FeatureVector({1, 1, 1}));
    CHECK(transform_challenge(t.known[1]) == FeatureVector({1, 1, -1}));
    CHECK(transform_challenge(t.known[2]) == FeatureVector({1, -1, 1}));
    CHECK(transform_challenge(t.target) == FeatureVector({1, -1, -1}));
    CHECK(t.responses == std::vector<Response>{1, 1, 1});
  }

  TEST_CASE("apuf response correlation") {
    const FeatureVector a({1, 1, 1, 1});
    CHECK(apuf_response_correlation(a, a) == 1.0);
    CHECK(apuf_response_correlation(a, FeatureVector({1, 1, -1, -1})) == 0.0);
    CHECK(apuf_response_correlation(FeatureVector({1, -1}), FeatureVector({-1, 1})) == -1.0);
    CHECK_THROWS_AS(apuf_response_correlation(a, FeatureVector({1, 1})), DimensionError);
  }

  TEST_CASE("orthant formulas predict joint arbiter responses, k = 64") {
    const std::size_t n = 1000000;
    const PufBatch batch(ArchSpec::apuf(64), n, 404);
    for (std::uint64_t trial = 0; trial < 2; ++trial) {
      const auto cs = sample_challenges(64, 3, 500 + trial, true);
      const auto r = batch_eval(batch, cs);
      long both = 0, all3 = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool a = r.at(i, 0) > 0, b = r.at(i, 1) > 0, c = r.at(i, 2) > 0;
        both += a && b;
        all3 += a && b && c;
      }
      const auto x0 = transform_challenge(cs[0]);
      const auto x1 = transform_challenge(cs[1]);
      const auto x2 = transform_challenge(cs[2]);
      const double p2 = orthant_prob_2d(apuf_response_correlation(x0, x1));
      const double p3 = orthant_prob_3d({apuf_response_correlation(x0, x1), apuf_response_correlation(x0, x2),
                                         apuf_response_correlation(x1, x2)});
      CHECK(std::abs(both / double(n) - p2) < 3 * std::sqrt(p2 * (1 - p2) / n));
      CHECK(std::abs(all3 / double(n) - p3) < 3 * std::sqrt(p3 * (1 - p3) / n));
    }
  }
}
