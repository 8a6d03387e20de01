#include "pufmc/models.hpp"

#include <algorithm>
#include <string>

#include "pufmc/errors.hpp"

namespace pufmc {

double signed_sum(std::span<const double> weights, std::span<const std::int8_t> signs) noexcept {
  const std::size_t n = std::min(weights.size(), signs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(signs[i]) * weights[i];
  return acc;
}

namespace {

void require_length(std::size_t have, std::size_t want, const char* what) {
  if (have != want) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                         ", got " + std::to_string(have));
  }
}

double range_sum(const std::vector<double>& w, std::span<const std::int8_t> x, std::size_t begin,
                 std::size_t end) noexcept {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += static_cast<double>(x[i]) * w[i];
  return acc;
}

}  // namespace

Response eval_arbiter(const ArbiterModel& m, const FeatureVector& x) {
  require_length(x.size(), m.weights.size(), "arbiter");
  return sign_of(signed_sum(m.weights, x.bits()));
}

Response eval_xor(const XorModel& m, const FeatureVector& x) {
  if (m.chains.empty()) throw ConfigError("xor model needs at least one chain");
  Response r = 1;
  for (const auto& chain : m.chains) r *= eval_arbiter(chain, x);
  return r;
}

Response eval_ff(const FeedForwardModel& m, const FeatureVector& x) {
  const std::size_t k = m.weights.size();
  require_length(x.size(), k, "feed-forward");
  if (m.f1 < 1 || m.f1 > m.f2 || m.f2 > k) {
    throw ConfigError("feed-forward loop requires 1 <= f1 <= f2 <= k");
  }
  const auto bits = x.bits();
  // Stages are 1-indexed in the model; stage f2 contributes to both sums.
  const double inner = range_sum(m.weights, bits, 0, m.f1);
  double head = inner;
  for (std::size_t i = m.f1; i < m.f2; ++i) head += static_cast<double>(bits[i]) * m.weights[i];
  const double tail = range_sum(m.weights, bits, m.f2 - 1, k);
  return sign_of(head + (inner >= 0.0 ? tail : -tail));
}

Response eval_ff_xor(const FeedForwardXorModel& m, const FeatureVector& x) {
  if (m.chains.empty()) throw ConfigError("feed-forward xor model needs at least one chain");
  Response r = 1;
  for (const auto& chain : m.chains) r *= eval_ff(chain, x);
  return r;
}

CtSlicing::CtSlicing(std::size_t stages) : k(stages) {
  if (k < 3) throw ConfigError("CT-PUF needs at least 3 stages");
}

const char* CtSlicing::description() noexcept {
  return "even=positions 2,4,..;odd=positions 1,3,..;oqo=1..floor(k/3);"
         "psp=floor(k/3)+1..2*floor(k/3);ospqo=oqo+psp;encoding=+1->0,-1->1";
}

const char* to_string(CtMode m) noexcept {
  switch (m) {
    case CtMode::Apuf: return "apuf";
    case CtMode::BrConcat: return "br";
    case CtMode::BrXor: return "br_xor_br";
    case CtMode::Ro: return "ro";
  }
  return "?";
}

CtMode ct_route(std::span<const std::int8_t> bits) {
  std::size_t odd_ones = 0;
  std::size_t even_ones = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] < 0) ((i % 2 == 0) ? odd_ones : even_ones) += 1;
  }
  const bool even_par = even_ones % 2 == 1;
  const bool odd_par = odd_ones % 2 == 1;
  if (odd_ones == 0) return CtMode::Apuf;
  if (even_par && odd_par) return CtMode::BrConcat;
  if (!even_par && !odd_par && odd_ones + even_ones != 0) return CtMode::BrXor;
  if (!even_par && odd_par) return CtMode::Ro;
  return CtMode::Apuf;
}

namespace {

void check_ct(const CtModel& m) {
  const CtSlicing s(m.k);
  require_length(m.arbiter_stage.weights.size(), m.k, "CT arbiter stage");
  require_length(m.apuf_mode.weights.size(), s.even_count(), "CT apuf mode");
  require_length(m.br_oqo.size(), s.third(), "CT br_oqo");
  require_length(m.br_psp.size(), s.third(), "CT br_psp");
  require_length(m.ro_g.size(), s.third(), "CT ro_g");
  require_length(m.ro_h.size(), s.third(), "CT ro_h");
}

}  // namespace

Response eval_ct_mode(const CtModel& m, std::span<const std::int8_t> bits) {
  check_ct(m);
  require_length(bits.size(), m.k, "CT challenge");
  const std::size_t t = m.k / 3;
  const auto oqo = bits.subspan(0, t);
  const auto psp = bits.subspan(t, t);
  switch (ct_route(bits)) {
    case CtMode::Apuf: {
      std::vector<std::int8_t> even;
      for (std::size_t i = 1; i < bits.size(); i += 2) even.push_back(bits[i]);
      const auto x = transform_challenge(Challenge(std::move(even)));
      return sign_of(signed_sum(m.apuf_mode.weights, x.bits()));
    }
    case CtMode::BrConcat: {
      double acc = signed_sum(m.br_oqo, oqo);
      for (std::size_t i = 0; i < t; ++i) acc += static_cast<double>(psp[i]) * m.br_psp[i];
      return sign_of(acc);
    }
    case CtMode::BrXor:
      return sign_of(signed_sum(m.br_oqo, oqo)) * sign_of(signed_sum(m.br_psp, psp));
    case CtMode::Ro:
      return sign_of(signed_sum(m.ro_g, oqo) - signed_sum(m.ro_h, psp));
  }
  return 1;
}

Response eval_ct(const CtModel& m, const Challenge& c) {
  require_length(c.size(), m.k, "CT challenge");
  const Response r_arbiter = eval_arbiter(m.arbiter_stage, transform_challenge(c));
  std::vector<std::int8_t> c_xor(c.bits().begin(), c.bits().end());
  for (auto& b : c_xor) b = static_cast<std::int8_t>(b * r_arbiter);
  return eval_ct_mode(m, c_xor) * r_arbiter;
}

}  // namespace pufmc
