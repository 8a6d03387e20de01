#include "tile_eval.hpp"

#include <algorithm>

#include "pufmc/errors.hpp"

namespace pufmc::detail {

namespace {

using Acc = double[kLanes];

// acc[l] += x[i] * w[i][l] for stages begin..end-1, in stage order.
inline void accumulate(const TileParams& tile, std::size_t offset, const std::int8_t* x,
                       std::size_t begin, std::size_t end, double* __restrict acc) {
  for (std::size_t i = begin; i < end; ++i) {
    const double* __restrict w = tile.row(offset + i);
    if (x[i] > 0) {
      for (std::size_t l = 0; l < kLanes; ++l) acc[l] += w[l];
    } else {
      for (std::size_t l = 0; l < kLanes; ++l) acc[l] -= w[l];
    }
  }
}

inline std::uint64_t plus_mask(const double* acc) {
  std::uint64_t bits = 0;
  for (std::size_t l = 0; l < kLanes; ++l) bits |= static_cast<std::uint64_t>(acc[l] >= 0.0) << l;
  return bits;
}

inline std::uint64_t lane_mask(std::size_t lanes) {
  return lanes >= 64 ? ~0ULL : ((1ULL << lanes) - 1);
}

}  // namespace

TileParams::TileParams(std::size_t params_per_instance)
    : params_(params_per_instance), data_(params_per_instance * kLanes, 0.0), scratch_(params_per_instance) {}

void TileParams::put(std::size_t lane, const PufBatch& batch, std::size_t id) {
  batch.instance_params(id, scratch_);
  for (std::size_t p = 0; p < params_; ++p) data_[p * kLanes + lane] = scratch_[p];
}

void TileParams::clear_tail() {
  if (lanes_ == kLanes) return;
  for (std::size_t p = 0; p < params_; ++p) {
    std::fill(data_.begin() + static_cast<std::ptrdiff_t>(p * kLanes + lanes_),
              data_.begin() + static_cast<std::ptrdiff_t>((p + 1) * kLanes), 0.0);
  }
}

void TileParams::load(const PufBatch& batch, std::span<const std::uint32_t> ids) {
  lanes_ = std::min(ids.size(), kLanes);
  for (std::size_t l = 0; l < lanes_; ++l) put(l, batch, ids[l]);
  clear_tail();
}

void TileParams::load_range(const PufBatch& batch, std::size_t first, std::size_t n) {
  lanes_ = std::min(n, kLanes);
  for (std::size_t l = 0; l < lanes_; ++l) put(l, batch, first + l);
  clear_tail();
}

TileEvaluator::TileEvaluator(const ArchSpec& arch, std::span<const Challenge> challenges)
    : arch_(arch), count_(challenges.size()) {
  arch_.validate();
  const std::size_t k = arch_.k;
  features_.reserve(count_ * k);
  for (const auto& c : challenges) {
    if (c.size() != k) {
      throw DimensionError("challenge length " + std::to_string(c.size()) + " does not match " +
                           std::to_string(k) + " stages");
    }
    const auto x = transform_challenge(c);
    features_.insert(features_.end(), x.bits().begin(), x.bits().end());
  }
  if (arch_.tag == ArchTag::Ct) {
    ct_queries_.reserve(2 * count_);
    for (const auto& c : challenges) {
      for (int s : {1, -1}) {
        CtQuery q;
        q.raw.assign(c.bits().begin(), c.bits().end());
        for (auto& b : q.raw) b = static_cast<std::int8_t>(b * s);
        q.mode = static_cast<int>(ct_route(q.raw));
        std::vector<std::int8_t> even;
        for (std::size_t i = 1; i < k; i += 2) even.push_back(q.raw[i]);
        if (!even.empty()) {
          const auto ex = transform_challenge(Challenge(std::move(even)));
          q.even_x.assign(ex.bits().begin(), ex.bits().end());
        }
        ct_queries_.push_back(std::move(q));
      }
    }
  }
}

std::uint64_t TileEvaluator::eval_linear(const TileParams& tile, std::size_t j) const {
  const std::size_t k = arch_.k;
  const std::int8_t* x = features_.data() + j * k;
  std::uint64_t minus_parity = 0;
  alignas(64) Acc acc;
  for (std::size_t c = 0; c < arch_.chains; ++c) {
    std::fill(std::begin(acc), std::end(acc), 0.0);
    accumulate(tile, c * k, x, 0, k, acc);
    minus_parity ^= ~plus_mask(acc);
  }
  return ~minus_parity;
}

std::uint64_t TileEvaluator::eval_ff(const TileParams& tile, std::size_t j) const {
  const std::size_t k = arch_.k;
  const std::size_t f1 = arch_.f1;
  const std::size_t f2 = arch_.f2;
  const std::int8_t* x = features_.data() + j * k;
  std::uint64_t minus_parity = 0;
  alignas(64) Acc head;
  alignas(64) Acc inner;
  alignas(64) Acc tail;
  for (std::size_t c = 0; c < arch_.chains; ++c) {
    const std::size_t off = c * k;
    std::fill(std::begin(head), std::end(head), 0.0);
    accumulate(tile, off, x, 0, f1, head);
    std::copy(std::begin(head), std::end(head), std::begin(inner));
    accumulate(tile, off, x, f1, f2, head);
    std::fill(std::begin(tail), std::end(tail), 0.0);
    accumulate(tile, off, x, f2 - 1, k, tail);
    for (std::size_t l = 0; l < kLanes; ++l) head[l] += inner[l] >= 0.0 ? tail[l] : -tail[l];
    minus_parity ^= ~plus_mask(head);
  }
  return ~minus_parity;
}

std::uint64_t TileEvaluator::eval_ct_mode(const TileParams& tile, const CtQuery& q) const {
  const std::size_t k = arch_.k;
  const std::size_t e = k / 2;
  const std::size_t t = k / 3;
  const std::size_t off_apuf = k;
  const std::size_t off_oqo = k + e;
  const std::size_t off_psp = off_oqo + t;
  const std::size_t off_g = off_psp + t;
  const std::size_t off_h = off_g + t;
  const std::int8_t* raw = q.raw.data();
  alignas(64) Acc a;
  alignas(64) Acc b;
  std::fill(std::begin(a), std::end(a), 0.0);
  switch (static_cast<CtMode>(q.mode)) {
    case CtMode::Apuf:
      accumulate(tile, off_apuf, q.even_x.data(), 0, e, a);
      return plus_mask(a);
    case CtMode::BrConcat:
      accumulate(tile, off_oqo, raw, 0, t, a);
      // br_psp row i pairs with raw[t + i].
      accumulate(tile, off_psp, raw + t, 0, t, a);
      return plus_mask(a);
    case CtMode::BrXor:
      std::fill(std::begin(b), std::end(b), 0.0);
      accumulate(tile, off_oqo, raw, 0, t, a);
      accumulate(tile, off_psp, raw + t, 0, t, b);
      return ~(~plus_mask(a) ^ ~plus_mask(b));
    case CtMode::Ro:
      std::fill(std::begin(b), std::end(b), 0.0);
      accumulate(tile, off_g, raw, 0, t, a);
      accumulate(tile, off_h, raw + t, 0, t, b);
      for (std::size_t l = 0; l < kLanes; ++l) a[l] -= b[l];
      return plus_mask(a);
  }
  return 0;
}

std::uint64_t TileEvaluator::eval_ct(const TileParams& tile, std::size_t j) const {
  const std::size_t k = arch_.k;
  alignas(64) Acc a;
  std::fill(std::begin(a), std::end(a), 0.0);
  accumulate(tile, 0, features_.data() + j * k, 0, k, a);
  const std::uint64_t arbiter_plus = plus_mask(a);
  const std::uint64_t f_pos = eval_ct_mode(tile, ct_queries_[2 * j]);
  const std::uint64_t f_neg = eval_ct_mode(tile, ct_queries_[2 * j + 1]);
  // R_A = +1: R = f(C).  R_A = -1: R = -f(-C).
  return (arbiter_plus & f_pos) | (~arbiter_plus & ~f_neg);
}

void TileEvaluator::evaluate(const TileParams& tile, std::span<std::uint64_t> words) const {
  if (words.size() != count_) throw DimensionError("tile output size mismatch");
  const std::uint64_t mask = lane_mask(tile.lanes());
  for (std::size_t j = 0; j < count_; ++j) {
    std::uint64_t w = 0;
    switch (arch_.tag) {
      case ArchTag::Apuf:
      case ArchTag::Xor: w = eval_linear(tile, j); break;
      case ArchTag::FfXor: w = eval_ff(tile, j); break;
      case ArchTag::Ct: w = eval_ct(tile, j); break;
    }
    words[j] = w & mask;
  }
}

}  // namespace pufmc::detail
