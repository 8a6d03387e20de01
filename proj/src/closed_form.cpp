#include "pufmc/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pufmc/errors.hpp"
#include "pufmc/quadrature.hpp"

namespace pufmc {

double normal_cdf(double t) {
  if (!std::isfinite(t)) throw ConfigError("normal_cdf needs a finite argument");
  return 0.5 * std::erfc(-t / std::numbers::sqrt2);
}

double orthant_prob_2d(double rho) {
  if (!(std::abs(rho) <= 1.0)) throw ConfigError("correlation " + std::to_string(rho) + " is outside [-1, 1]");
  return 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
}

void CorrelationTriple::validate() const {
  for (double r : {rho_xy, rho_xz, rho_yz}) {
    if (!(std::abs(r) <= 1.0)) throw ConfigError("correlation " + std::to_string(r) + " is outside [-1, 1]");
  }
  const double det = 1.0 + 2.0 * rho_xy * rho_xz * rho_yz - rho_xy * rho_xy - rho_xz * rho_xz - rho_yz * rho_yz;
  if (det < -1e-12) throw ConfigError("correlation matrix is not positive semidefinite");
}

double orthant_prob_3d(const CorrelationTriple& rhos) {
  rhos.validate();
  return 0.125 + (std::asin(rhos.rho_xy) + std::asin(rhos.rho_xz) + std::asin(rhos.rho_yz)) / (4.0 * std::numbers::pi);
}

void QuadratureConfig::validate() const {
  if (nodes < 16) throw ConfigError("quadrature needs at least 16 nodes per axis");
  if (!(tolerance > 0.0)) throw ConfigError("quadrature tolerance must be positive");
  if (!(bound_sigmas > 0.0) || !std::isfinite(bound_sigmas)) throw ConfigError("quadrature bound must be positive");
  if (max_cells < 1) throw ConfigError("quadrature cell budget must be positive");
}

namespace {

// Density of N(0, 2).
double density2(double v) {
  return std::exp(-0.25 * v * v) / std::sqrt(4.0 * std::numbers::pi);
}

double numerator_integrand(double x, double y) {
  const double lo = normal_cdf(std::max(-x, -y));
  const double hi = normal_cdf(std::min(x, y));
  return std::max(hi - lo, 0.0) * density2(x) * density2(y);
}

double denominator_integrand(double x, double y) {
  if (!(std::max(-x, -y) < x)) return 0.0;
  const double lo = normal_cdf(std::max(-x, -y));
  const double hi = normal_cdf(x);
  return std::max(hi - lo, 0.0) * density2(x) * density2(y);
}

// Sum over the three wedges, each mapped from (r, s) in [0, R] x [0, 1].
AdaptiveResult wedge_integral(double (*f)(double, double), const QuadratureConfig& config, double tol) {
  const double radius = config.bound_sigmas * std::numbers::sqrt2;
  auto w1 = [f](double r, double s) { return r * f(r, s * r); };
  auto w2 = [f](double r, double s) { return r * f(r, -s * r); };
  auto w3 = [f](double r, double s) { return r * f(s * r, r); };
  AdaptiveResult total;
  for (const std::function<double(double, double)>& g :
       {std::function<double(double, double)>(w1), std::function<double(double, double)>(w2),
        std::function<double(double, double)>(w3)}) {
    const auto part = integrate_2d(g, 0.0, radius, 0.0, 1.0, config.nodes, tol / 3.0, config.max_cells);
    total.value += part.value;
    total.error_estimate += part.error_estimate;
    total.cells += part.cells;
    total.evaluations += part.evaluations;
  }
  return total;
}

}  // namespace

WorkedExampleTerms worked_example_terms(const QuadratureConfig& config) {
  config.validate();
  // Both integrals are O(0.1); a per-integral tolerance two orders below the
  // target keeps the ratio within it.
  const double tol = config.tolerance * 0.01;
  const auto num = wedge_integral(numerator_integrand, config, tol);
  const auto den = wedge_integral(denominator_integrand, config, tol);
  if (!(den.value > 0.0)) throw ConvergenceError("worked-example denominator vanished");
  WorkedExampleTerms terms;
  terms.numerator = num.value;
  terms.denominator = den.value;
  terms.probability = num.value / den.value;
  terms.cells = num.cells + den.cells;
  return terms;
}

double worked_example_prob(const QuadratureConfig& config) {
  return worked_example_terms(config).probability;
}

WorkedExampleTranscript worked_example_transcript() {
  auto raw = [](std::vector<std::int8_t> x) { return inverse_transform(FeatureVector(std::move(x))); };
  WorkedExampleTranscript t;
  t.known = {raw({1, 1, 1}), raw({1, 1, -1}), raw({1, -1, 1})};
  t.responses = {1, 1, 1};
  t.target = raw({1, -1, -1});
  return t;
}

double apuf_response_correlation(const FeatureVector& x1, const FeatureVector& x2) {
  if (x1.size() != x2.size()) {
    throw DimensionError("feature vectors of length " + std::to_string(x1.size()) + " and " +
                         std::to_string(x2.size()));
  }
  long dot = 0;
  for (std::size_t i = 0; i < x1.size(); ++i) dot += x1[i] * x2[i];
  return static_cast<double>(dot) / static_cast<double>(x1.size());
}

}  // namespace pufmc
