#pragma once

// Scalar response functions of the delay-based PUF models.
//
// All models follow the linear additive delay model: a response is the sign
// of a weighted sum over +/-1 features, with sign(0) taken as +1. The batched
// evaluator in batch.hpp reproduces these functions bit for bit, so every sum
// here is accumulated strictly in stage order.

#include <cstddef>
#include <span>
#include <vector>

#include "pufmc/challenge.hpp"

namespace pufmc {

/// +1 or -1.
using Response = int;

/// sign with sign(0) = +1.
constexpr Response sign_of(double v) noexcept { return v >= 0.0 ? 1 : -1; }

/// Sum of w_i * s_i over the overlapping prefix, in index order.
double signed_sum(std::span<const double> weights, std::span<const std::int8_t> signs) noexcept;

struct ArbiterModel {
  std::vector<double> weights;
};

struct XorModel {
  std::vector<ArbiterModel> chains;
};

/// Arbiter chain with one feed-forward loop from stage f1 to stage f2
/// (1-indexed, 1 <= f1 <= f2 <= k).
struct FeedForwardModel {
  std::vector<double> weights;
  std::size_t f1 = 1;
  std::size_t f2 = 1;
};

/// XOR of n feed-forward chains sharing (k, f1, f2).
struct FeedForwardXorModel {
  std::vector<FeedForwardModel> chains;
};

/// Sub-challenge selection used by the CT-PUF modes.
///
/// Positions are 1-indexed: "even" bits are positions 2, 4, ...; "odd" bits are
/// positions 1, 3, .... With t = floor(k/3), the OQO slice is positions 1..t,
/// the PSP slice is t+1..2t, and OSPQO is OQO followed by PSP.
struct CtSlicing {
  std::size_t k = 0;

  explicit CtSlicing(std::size_t stages);
  std::size_t even_count() const noexcept { return k / 2; }
  std::size_t third() const noexcept { return k / 3; }
  /// Text form recorded in result manifests.
  static const char* description() noexcept;
};

enum class CtMode { Apuf, BrConcat, BrXor, Ro };

const char* to_string(CtMode m) noexcept;

/// Mode selected for an input vector, from the parities of its {0,1}-encoded
/// odd and even bit counts (bit = 1 for a -1 entry):
///   odd count == 0                      -> Apuf
///   even odd,  odd odd                  -> BrConcat
///   even even, odd even, total != 0     -> BrXor
///   even even, odd odd                  -> Ro
///   even odd,  odd even (odd count > 0) -> Apuf
CtMode ct_route(std::span<const std::int8_t> bits);

/// CT-PUF parameterization: a full-length arbiter producing R_Arbiter, an
/// arbiter on the even bits for the APUF mode, two bistable-ring weight vectors
/// over the OQO and PSP slices, and two ring-oscillator frequency-weight
/// vectors over the same slices.
struct CtModel {
  std::size_t k = 0;
  ArbiterModel arbiter_stage;    // length k
  ArbiterModel apuf_mode;        // length k/2
  std::vector<double> br_oqo;    // length k/3
  std::vector<double> br_psp;    // length k/3
  std::vector<double> ro_g;      // length k/3
  std::vector<double> ro_h;      // length k/3
};

Response eval_arbiter(const ArbiterModel& m, const FeatureVector& x);
Response eval_xor(const XorModel& m, const FeatureVector& x);
Response eval_ff(const FeedForwardModel& m, const FeatureVector& x);
Response eval_ff_xor(const FeedForwardXorModel& m, const FeatureVector& x);

/// One pass of the CT mode function on a raw +/-1 vector.
Response eval_ct_mode(const CtModel& m, std::span<const std::int8_t> bits);

/// Full CT-PUF response: R_A = arbiter_stage(C), C' = R_A * C, R = f(C') * R_A.
Response eval_ct(const CtModel& m, const Challenge& c);

}  // namespace pufmc
