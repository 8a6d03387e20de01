#pragma once

// Closed-form and quadrature oracles for small conditioning problems.

#include <cstddef>
#include <vector>

#include "pufmc/challenge.hpp"
#include "pufmc/models.hpp"

namespace pufmc {

/// Standard normal CDF. Throws ConfigError for non-finite input.
double normal_cdf(double t);

/// P(X > 0, Y > 0) for standard normals with correlation rho:
/// 1/4 + asin(rho) / (2 pi). Throws ConfigError if |rho| > 1.
double orthant_prob_2d(double rho);

struct CorrelationTriple {
  double rho_xy = 0.0;
  double rho_xz = 0.0;
  double rho_yz = 0.0;

  /// Throws ConfigError unless each coefficient is in [-1, 1] and the
  /// implied correlation matrix is positive semidefinite.
  void validate() const;
};

/// P(X > 0, Y > 0, Z > 0) = 1/8 + (asin rho_xy + asin rho_xz + asin rho_yz) / (4 pi).
double orthant_prob_3d(const CorrelationTriple& rhos);

struct QuadratureConfig {
  /// Half-width of the integration range in standard deviations of X and Y.
  double bound_sigmas = 8.0;
  /// Gauss-Legendre nodes per axis per cell.
  std::size_t nodes = 16;
  /// Absolute tolerance on the final probability.
  double tolerance = 1e-4;
  /// Cell budget per integral.
  std::size_t max_cells = 1 << 16;

  void validate() const;
};

struct WorkedExampleTerms {
  double numerator = 0.0;
  double denominator = 0.0;
  double probability = 0.0;
  std::size_t cells = 0;
};

/// Three-stage arbiter example: the probability that w1 - w2 - w3 > 0 given
/// w1 + w2 + w3 > 0, w1 + w2 - w3 > 0 and w1 - w2 + w3 > 0, with w ~ N(0, I).
///
/// With X = w1 + w2, Y = w1 - w2 (independent N(0, 2)) and Z = w3 the
/// conditioning confines Z to (max(-X, -Y), X), so the result is
///   E[ [Phi(min(X,Y)) - Phi(max(-X,-Y))]+ ] / E[ [Phi(X) - Phi(max(-X,-Y))]+ ].
/// Both expectations are integrated with adaptive tensor-product
/// Gauss-Legendre. The clamped integrands are non-zero only on three wedges
/// through the origin (0 <= y <= x, -x <= y <= 0, 0 < x < y) and are smooth on
/// each, so each wedge is mapped to a rectangle in (radius, slope) before
/// integration. Throws ConvergenceError if the cell budget is exhausted.
WorkedExampleTerms worked_example_terms(const QuadratureConfig& config = {});

double worked_example_prob(const QuadratureConfig& config = {});

/// The worked example as a game transcript over raw challenges: three known
/// challenges answered +1 and the target challenge. Their parity features are
/// (+,+,+), (+,+,-), (+,-,+) and the target's is (+,-,-).
struct WorkedExampleTranscript {
  std::vector<Challenge> known;
  std::vector<Response> responses;
  Challenge target;
};

WorkedExampleTranscript worked_example_transcript();

/// Correlation of the arbiter delay sums for two feature vectors under
/// i.i.d. standard normal weights: <x1, x2> / k.
double apuf_response_correlation(const FeatureVector& x1, const FeatureVector& x2);

}  // namespace pufmc
