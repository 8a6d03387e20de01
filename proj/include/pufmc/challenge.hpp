#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pufmc {

/// A vector of +/-1 entries. Base for Challenge and FeatureVector; the two are
/// kept as distinct types so a raw challenge cannot be fed where parity
/// features are expected.
class SignVector {
 public:
  SignVector() = default;
  /// Throws ConfigError unless every entry is -1 or +1 and the vector is non-empty.
  explicit SignVector(std::vector<std::int8_t> bits);

  std::size_t size() const noexcept { return bits_.size(); }
  std::int8_t operator[](std::size_t i) const noexcept { return bits_[i]; }
  std::span<const std::int8_t> bits() const noexcept { return bits_; }

  /// "+-+" style rendering.
  std::string to_string() const;

  friend bool operator==(const SignVector&, const SignVector&) = default;
  friend auto operator<=>(const SignVector&, const SignVector&) = default;

 protected:
  std::vector<std::int8_t> bits_;
};

class Challenge : public SignVector {
 public:
  using SignVector::SignVector;
  /// Parses "+-+" / "1,-1,1" style text.
  static Challenge parse(std::string_view text);
};

/// Parity features x_i = c_i * c_{i+1} * ... * c_k of a challenge.
class FeatureVector : public SignVector {
 public:
  using SignVector::SignVector;
};

FeatureVector transform_challenge(const Challenge& c);

/// Inverse of transform_challenge: c_i = x_i * x_{i+1}, c_k = x_k.
Challenge inverse_transform(const FeatureVector& x);

/// Draws `count` uniform challenges of length k.
///
/// With `distinct` set, the result has no repeated challenge. Challenges equal
/// to any entry of `exclude` are rejected and redrawn. Throws InfeasibleError
/// when the challenge space cannot supply the request.
std::vector<Challenge> sample_challenges(std::size_t k, std::size_t count, std::uint64_t seed,
                                         bool distinct, std::span<const Challenge> exclude = {});

}  // namespace pufmc
