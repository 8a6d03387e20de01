#include "pufmc/batch.hpp"

#include <algorithm>
#include <string>

#include "pufmc/errors.hpp"
#include "pufmc/parallel.hpp"
#include "pufmc/rng.hpp"
#include "tile_eval.hpp"

namespace pufmc {

ResponseMatrix::ResponseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_per_row_((cols + 63) / 64), words_(rows * ((cols + 63) / 64), 0) {}

void ResponseMatrix::set(std::size_t row, std::size_t col, Response r) noexcept {
  auto& w = words_[row * words_per_row_ + col / 64];
  const std::uint64_t bit = 1ULL << (col % 64);
  if (r > 0) {
    w |= bit;
  } else {
    w &= ~bit;
  }
}

PufBatch::PufBatch(ArchSpec arch, std::size_t count, std::uint64_t seed)
    : PufBatch(arch, count, seed, {}) {}

PufBatch::PufBatch(ArchSpec arch, std::size_t count, std::uint64_t seed, std::vector<double> params)
    : arch_(arch), count_(count), seed_(seed), params_(std::move(params)) {
  arch_.validate();
  if (count_ == 0) throw ConfigError("a batch needs at least one instance");
  if (count_ > 0xFFFFFFFFULL) throw ConfigError("instance count exceeds 2^32 - 1");
}

PufBatch PufBatch::from_parameters(ArchSpec arch, std::size_t count, std::vector<double> params) {
  if (params.size() != count * arch.params_per_instance()) {
    throw DimensionError("parameter matrix has " + std::to_string(params.size()) + " entries, expected " +
                         std::to_string(count * arch.params_per_instance()));
  }
  return PufBatch(arch, count, 0, std::move(params));
}

void PufBatch::instance_params(std::size_t i, std::span<double> out) const {
  const std::size_t p = params_per_instance();
  if (out.size() != p) throw DimensionError("parameter buffer has the wrong size");
  if (i >= count_) throw DimensionError("instance index out of range");
  if (materialized()) {
    std::copy_n(params_.begin() + static_cast<std::ptrdiff_t>(i * p), p, out.begin());
    return;
  }
  Xoshiro256 rng(derive_seed(seed_, i));
  NormalSampler normal;
  for (auto& v : out) v = normal(rng);
}

std::vector<double> PufBatch::parameters() const {
  if (materialized()) return params_;
  const std::size_t p = params_per_instance();
  std::vector<double> all(count_ * p);
  for (std::size_t i = 0; i < count_; ++i) instance_params(i, std::span<double>(all).subspan(i * p, p));
  return all;
}

PufBatch PufBatch::materialize() const {
  return PufBatch(arch_, count_, seed_, parameters());
}

PufInstance PufBatch::instance(std::size_t i) const {
  std::vector<double> p(params_per_instance());
  instance_params(i, p);
  const std::size_t k = arch_.k;
  auto slice = [&](std::size_t off, std::size_t len) {
    return std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(off),
                               p.begin() + static_cast<std::ptrdiff_t>(off + len));
  };
  switch (arch_.tag) {
    case ArchTag::Apuf: return ArbiterModel{std::move(p)};
    case ArchTag::Xor: {
      XorModel m;
      for (std::size_t c = 0; c < arch_.chains; ++c) m.chains.push_back(ArbiterModel{slice(c * k, k)});
      return m;
    }
    case ArchTag::FfXor: {
      FeedForwardXorModel m;
      for (std::size_t c = 0; c < arch_.chains; ++c) {
        m.chains.push_back(FeedForwardModel{slice(c * k, k), arch_.f1, arch_.f2});
      }
      return m;
    }
    case ArchTag::Ct: {
      const std::size_t e = k / 2;
      const std::size_t t = k / 3;
      CtModel m;
      m.k = k;
      m.arbiter_stage.weights = slice(0, k);
      m.apuf_mode.weights = slice(k, e);
      m.br_oqo = slice(k + e, t);
      m.br_psp = slice(k + e + t, t);
      m.ro_g = slice(k + e + 2 * t, t);
      m.ro_h = slice(k + e + 3 * t, t);
      return m;
    }
  }
  throw ConfigError("unsupported architecture tag");
}

PufBatch sample_batch(const ArchSpec& arch, std::size_t count, std::uint64_t seed) {
  return PufBatch(arch, count, seed);
}

Response eval_instance(const PufInstance& inst, const Challenge& c) {
  return std::visit(
      [&](const auto& m) -> Response {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ArbiterModel>) {
          return eval_arbiter(m, transform_challenge(c));
        } else if constexpr (std::is_same_v<M, XorModel>) {
          return eval_xor(m, transform_challenge(c));
        } else if constexpr (std::is_same_v<M, FeedForwardXorModel>) {
          return eval_ff_xor(m, transform_challenge(c));
        } else {
          return eval_ct(m, c);
        }
      },
      inst);
}

ResponseMatrix batch_eval(const PufBatch& batch, std::span<const Challenge> challenges,
                          const BatchEvalOptions& options) {
  const detail::TileEvaluator evaluator(batch.arch(), challenges);
  const std::size_t n = batch.instance_count();
  const std::size_t m = challenges.size();
  ResponseMatrix out(n, m);
  const std::size_t chunk =
      std::max<std::size_t>(detail::kLanes, (options.chunk_instances + detail::kLanes - 1) / detail::kLanes * detail::kLanes);
  const std::size_t jobs = (n + chunk - 1) / chunk;

  parallel_for(jobs, options.threads, [&](std::size_t job) {
    detail::TileParams tile(batch.params_per_instance());
    std::vector<std::uint64_t> words(m);
    const std::size_t end = std::min(n, (job + 1) * chunk);
    for (std::size_t first = job * chunk; first < end; first += detail::kLanes) {
      const std::size_t lanes = std::min(detail::kLanes, end - first);
      tile.load_range(batch, first, lanes);
      evaluator.evaluate(tile, words);
      // Rows are disjoint per job, so writes never overlap.
      for (std::size_t l = 0; l < lanes; ++l) {
        auto row = out.row(first + l);
        for (std::size_t j = 0; j < m; ++j) {
          if ((words[j] >> l) & 1U) row[j / 64] |= 1ULL << (j % 64);
        }
      }
    }
  });
  return out;
}

}  // namespace pufmc
