#pragma once

// Batched response kernel shared by batch_eval and the advantage engine.
//
// A tile holds the parameters of up to 64 instances in stage-major order so the
// per-stage update is a contiguous 64-wide add or subtract. Each weighted sum is
// still accumulated in stage order per instance, which makes the result
// identical to the scalar models in models.cpp.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pufmc/batch.hpp"

namespace pufmc::detail {

inline constexpr std::size_t kLanes = 64;

class TileParams {
 public:
  explicit TileParams(std::size_t params_per_instance);

  /// Loads the given instances (at most 64) into lanes 0..ids.size()-1.
  void load(const PufBatch& batch, std::span<const std::uint32_t> ids);
  /// Loads instances first .. first+n-1 (n <= 64).
  void load_range(const PufBatch& batch, std::size_t first, std::size_t n);

  std::size_t lanes() const noexcept { return lanes_; }
  const double* row(std::size_t p) const noexcept { return data_.data() + p * kLanes; }

 private:
  void put(std::size_t lane, const PufBatch& batch, std::size_t id);
  void clear_tail();

  std::size_t params_;
  std::size_t lanes_ = 0;
  std::vector<double> data_;
  std::vector<double> scratch_;
};

class TileEvaluator {
 public:
  TileEvaluator(const ArchSpec& arch, std::span<const Challenge> challenges);

  std::size_t challenge_count() const noexcept { return count_; }

  /// words[j] receives one bit per lane: 1 for a +1 response to challenge j.
  /// Bits of unused lanes are zero.
  void evaluate(const TileParams& tile, std::span<std::uint64_t> words) const;

 private:
  struct CtQuery {
    int mode;                          // CtMode as int
    std::vector<std::int8_t> raw;      // routed vector, length k
    std::vector<std::int8_t> even_x;   // parity features of its even bits
  };

  std::uint64_t eval_linear(const TileParams& tile, std::size_t j) const;
  std::uint64_t eval_ff(const TileParams& tile, std::size_t j) const;
  std::uint64_t eval_ct(const TileParams& tile, std::size_t j) const;
  std::uint64_t eval_ct_mode(const TileParams& tile, const CtQuery& q) const;

  ArchSpec arch_;
  std::size_t count_;
  std::vector<std::int8_t> features_;  // count * k parity features
  std::vector<CtQuery> ct_queries_;    // 2 per challenge: C and -C
};

}  // namespace pufmc::detail
