#pragma once

// Populations of sampled PUF instances and their batched evaluation.
//
// A PufBatch is either generated or explicit. A generated batch stores only
// (arch, count, seed): the parameters of instance i are drawn from their own
// sub-stream derive_seed(seed, i), so any instance can be regenerated on demand
// and a population of 10^6 wide instances never has to sit in memory at once.
// materialize() turns a generated batch into an explicit one holding the dense
// instance-major parameter matrix.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "pufmc/arch.hpp"
#include "pufmc/challenge.hpp"
#include "pufmc/models.hpp"

namespace pufmc {

/// Bit-packed +/-1 matrix, rows = instances, columns = challenges.
/// +1 is stored as bit 1, -1 as bit 0; 64 responses per word.
class ResponseMatrix {
 public:
  ResponseMatrix() = default;
  ResponseMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t words_per_row() const noexcept { return words_per_row_; }

  Response at(std::size_t row, std::size_t col) const noexcept {
    return (words_[row * words_per_row_ + col / 64] >> (col % 64)) & 1U ? 1 : -1;
  }
  void set(std::size_t row, std::size_t col, Response r) noexcept;

  std::span<const std::uint64_t> row(std::size_t r) const noexcept {
    return {words_.data() + r * words_per_row_, words_per_row_};
  }
  std::span<std::uint64_t> row(std::size_t r) noexcept {
    return {words_.data() + r * words_per_row_, words_per_row_};
  }

  friend bool operator==(const ResponseMatrix&, const ResponseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> words_;
};

using PufInstance = std::variant<ArbiterModel, XorModel, FeedForwardXorModel, CtModel>;

class PufBatch {
 public:
  /// Generated batch; parameters i.i.d. standard normal.
  PufBatch(ArchSpec arch, std::size_t count, std::uint64_t seed);

  /// Explicit batch over a dense instance-major matrix of count * P reals.
  static PufBatch from_parameters(ArchSpec arch, std::size_t count, std::vector<double> params);

  const ArchSpec& arch() const noexcept { return arch_; }
  std::size_t instance_count() const noexcept { return count_; }
  std::size_t stage_count() const noexcept { return arch_.k; }
  std::size_t params_per_instance() const noexcept { return arch_.params_per_instance(); }
  std::uint64_t seed() const noexcept { return seed_; }
  bool materialized() const noexcept { return !params_.empty(); }

  /// Parameters of instance i, written to `out` (size params_per_instance()).
  void instance_params(std::size_t i, std::span<double> out) const;

  /// Dense instance-major parameter matrix.
  std::vector<double> parameters() const;

  /// Same batch with parameters held in memory.
  PufBatch materialize() const;

  /// Scalar model of instance i.
  PufInstance instance(std::size_t i) const;

 private:
  PufBatch(ArchSpec arch, std::size_t count, std::uint64_t seed, std::vector<double> params);

  ArchSpec arch_;
  std::size_t count_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> params_;
};

PufBatch sample_batch(const ArchSpec& arch, std::size_t count, std::uint64_t seed);

/// Scalar response of a single instance.
Response eval_instance(const PufInstance& inst, const Challenge& c);

struct BatchEvalOptions {
  /// Instances per parallel work item; rounded up to a multiple of 64.
  std::size_t chunk_instances = 4096;
  /// 0 selects the process default (see parallel.hpp).
  unsigned threads = 0;
};

/// Responses of every instance to every challenge. Entry (i, j) equals
/// eval_instance(batch.instance(i), challenges[j]) exactly.
ResponseMatrix batch_eval(const PufBatch& batch, std::span<const Challenge> challenges,
                          const BatchEvalOptions& options = {});

/// Reproducibility archive: 32-byte little-endian header (magic "PUFB",
/// arch tag, k, chains, f1, f2 as uint32; instance count as uint64) followed by
/// count * P little-endian float64 parameters, row-major.
void write_archive(std::ostream& out, const PufBatch& batch);
PufBatch read_archive(std::istream& in);

}  // namespace pufmc
