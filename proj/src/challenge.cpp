#include "pufmc/challenge.hpp"

#include <cmath>
#include <set>

#include "pufmc/errors.hpp"
#include "pufmc/rng.hpp"

namespace pufmc {

SignVector::SignVector(std::vector<std::int8_t> bits) : bits_(std::move(bits)) {
  if (bits_.empty()) throw ConfigError("sign vector must have at least one entry");
  for (auto b : bits_) {
    if (b != 1 && b != -1) throw ConfigError("sign vector entries must be -1 or +1");
  }
}

std::string SignVector::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b > 0 ? '+' : '-');
  return s;
}

Challenge Challenge::parse(std::string_view text) {
  std::vector<std::int8_t> bits;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '+') {
      if (i + 1 < text.size() && text[i + 1] == '1') ++i;
      bits.push_back(1);
    } else if (ch == '-') {
      if (i + 1 < text.size() && text[i + 1] == '1') ++i;
      bits.push_back(-1);
    } else if (ch == '1') {
      bits.push_back(1);
    } else if (ch == ',' || ch == ' ') {
      continue;
    } else {
      throw ConfigError("cannot parse challenge '" + std::string(text) + "'");
    }
  }
  return Challenge(std::move(bits));
}

FeatureVector transform_challenge(const Challenge& c) {
  std::vector<std::int8_t> x(c.size());
  std::int8_t acc = 1;
  for (std::size_t i = c.size(); i-- > 0;) {
    acc = static_cast<std::int8_t>(acc * c[i]);
    x[i] = acc;
  }
  return FeatureVector(std::move(x));
}

Challenge inverse_transform(const FeatureVector& x) {
  const std::size_t k = x.size();
  std::vector<std::int8_t> c(k);
  for (std::size_t i = 0; i + 1 < k; ++i) c[i] = static_cast<std::int8_t>(x[i] * x[i + 1]);
  c[k - 1] = x[k - 1];
  return Challenge(std::move(c));
}

std::vector<Challenge> sample_challenges(std::size_t k, std::size_t count, std::uint64_t seed,
                                         bool distinct, std::span<const Challenge> exclude) {
  if (k == 0) throw ConfigError("challenge length must be positive");
  for (const auto& e : exclude) {
    if (e.size() != k) throw DimensionError("excluded challenge has wrong length");
  }
  std::set<Challenge> banned(exclude.begin(), exclude.end());
  if (k < 63) {
    const double space = std::ldexp(1.0, static_cast<int>(k));
    const double avail = space - static_cast<double>(banned.size());
    if (avail <= 0.0 || (distinct && static_cast<double>(count) > avail)) {
      throw InfeasibleError("cannot draw " + std::to_string(count) + " challenges of length " +
                            std::to_string(k) + " from the remaining challenge space");
    }
  }

  Xoshiro256 rng(seed);
  std::vector<Challenge> out;
  out.reserve(count);
  std::vector<std::int8_t> bits(k);
  while (out.size() < count) {
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (i % 64 == 0) word = rng();
      bits[i] = (word >> (i % 64)) & 1U ? 1 : -1;
    }
    Challenge c(bits);
    if (banned.contains(c)) continue;
    if (distinct) banned.insert(c);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace pufmc
