#pragma once

// Consistency-group conditioning and the advantage estimator.
//
// Instances are grouped by their responses on the N known challenges; groups
// with fewer than two members are dropped. For every retained group t and
// eval challenge i the engine computes the group's response mean m_{t,i} and
// its magnitude a_{t,i} = |m_{t,i}|. The group bias b_t is the mean of a_{t,i}
// over eval challenges, the reported bias is a weighted mean of b_t, and the
// advantage is half the bias.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pufmc/arch.hpp"
#include "pufmc/batch.hpp"
#include "pufmc/challenge.hpp"
#include "pufmc/models.hpp"

namespace pufmc {

/// Largest number of known challenges the engine conditions on.
inline constexpr std::size_t kMaxKnownCrps = 24;

struct CrpSet {
  std::vector<Challenge> challenges;
  /// Empty: condition on whatever each instance answered (all transcripts).
  /// Otherwise one response per challenge, marking a single target transcript.
  std::vector<Response> responses;

  bool fixed_transcript() const noexcept { return !responses.empty(); }

  /// Throws DimensionError / ConfigError on length mismatch, repeated
  /// challenges or responses outside {-1, +1}.
  void validate(std::size_t k) const;
};

enum class Weighting { Uniform, InstanceWeighted };

const char* to_string(Weighting w) noexcept;
/// Accepts "uniform" and "instance".
Weighting parse_weighting(std::string_view text);

class GroupTable {
 public:
  std::size_t total_instances() const noexcept { return total_instances_; }
  std::size_t min_group_size() const noexcept { return min_group_size_; }

  /// Retained groups, ordered by key.
  std::size_t group_count() const noexcept { return keys_.size(); }
  std::size_t group_size(std::size_t t) const noexcept { return offsets_[t + 1] - offsets_[t]; }
  std::uint32_t group_key(std::size_t t) const noexcept { return keys_[t]; }
  /// Instance indices of group t, ascending.
  std::span<const std::uint32_t> members(std::size_t t) const noexcept {
    return {members_.data() + offsets_[t], group_size(t)};
  }
  /// All retained instances, group after group.
  std::span<const std::uint32_t> all_members() const noexcept { return members_; }
  std::span<const std::size_t> offsets() const noexcept { return offsets_; }

  std::size_t retained_instances() const noexcept { return members_.size(); }
  /// Sizes of every group before the size filter, singletons included.
  std::span<const std::size_t> all_group_sizes() const noexcept { return all_sizes_; }

  /// Retained group matching the fixed transcript, if any.
  std::optional<std::size_t> target() const noexcept { return target_; }
  const CrpSet& known() const noexcept { return known_; }

  /// Index of the largest retained group (lowest key on ties).
  std::size_t largest_group() const;

 private:
  friend GroupTable condition_population(const PufBatch&, const CrpSet&, unsigned);

  std::size_t total_instances_ = 0;
  std::size_t min_group_size_ = 2;
  std::vector<std::uint32_t> keys_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> members_;
  std::vector<std::size_t> all_sizes_;
  std::optional<std::size_t> target_;
  CrpSet known_;
};

/// Groups the batch by responses on known.challenges. Key bit j is 1 when the
/// instance answered +1 to challenge j. Throws InfeasibleError when more than
/// kMaxKnownCrps challenges are given.
GroupTable condition_population(const PufBatch& batch, const CrpSet& known, unsigned threads = 0);

struct RunManifest {
  ArchSpec arch;
  std::size_t n_crps = 0;
  std::size_t n_puf = 0;
  std::size_t m_eval = 0;
  std::uint64_t seed = 0;
  std::uint64_t known_seed = 0;
  std::uint64_t eval_seed = 0;
  std::uint64_t instance_seed = 0;
  Weighting weighting = Weighting::Uniform;
  bool fixed_transcript = false;
  std::size_t min_group_size = 2;
  double se_inflation = 1.0;
  std::string ct_slicing;
};

struct StandardError {
  /// Variance of the mean of the per-challenge columns (bias scale).
  double between = 0.0;
  /// Binomial sampling variance of the group means (bias scale).
  double within = 0.0;
  double inflation = 1.0;
  /// inflation * sqrt(between + within), bias scale.
  double value = 0.0;
};

struct AdvantageEstimate {
  double advantage = 0.0;
  double bias = 0.0;
  /// Standard error of `advantage`; the bias standard error is twice this.
  double standard_error = 0.0;
  double bias_standard_error = 0.0;
  StandardError se_components;
  std::size_t retained_groups = 0;
  std::size_t retained_instances = 0;
  std::size_t total_groups = 0;
  std::size_t m_eval = 0;
  Weighting weighting = Weighting::Uniform;
  RunManifest manifest;
  /// Sum_t w_t a_{t,i}, one entry per eval challenge.
  std::vector<double> per_challenge;
  /// b_t per evaluated group, in group order.
  std::vector<double> group_bias;
  double wall_time_s = 0.0;
};

struct EstimateOptions {
  Weighting weighting = Weighting::Uniform;
  /// Restrict the estimate to the fixed-transcript group.
  bool target_only = false;
  /// Multiplier on the reported standard error (1.5 for the conservative option).
  double se_inflation = 1.0;
  unsigned threads = 0;
  /// Member positions per parallel work item; rounded up to a multiple of 64.
  std::size_t chunk_instances = 4096;
};

/// Throws ConfigError on empty eval challenges or overlap with the known
/// challenges, InfeasibleError when no group is retained or the target
/// transcript has no retained group.
AdvantageEstimate estimate_advantage(const PufBatch& batch, const GroupTable& groups,
                                     std::span<const Challenge> eval_challenges,
                                     const EstimateOptions& options = {});

/// Standard error from a full (group x challenge) matrix of |group means|.
/// `group_sizes` feeds the binomial term. Throws ConfigError with fewer than
/// two cells.
StandardError estimate_standard_error(const std::vector<std::vector<double>>& abs_means,
                                      std::span<const std::size_t> group_sizes, Weighting weighting,
                                      double inflation = 1.0);

/// Standard error from per-column weighted sums Y_i and the accumulated
/// binomial term sum_t sum_i w_t^2 (1 - m_{t,i}^2) / (|G_t| - 1).
StandardError standard_error_from_columns(std::span<const double> columns, double binomial_sum,
                                          double inflation = 1.0);

/// Number of +1 responses per challenge over the given instances.
std::vector<std::uint64_t> plus_counts(const PufBatch& batch, std::span<const std::uint32_t> ids,
                                       std::span<const Challenge> challenges, unsigned threads = 0);

struct GameConfig {
  ArchSpec arch;
  std::size_t n_crps = 1;
  std::size_t n_puf = 100000;
  std::size_t m_eval = 1000;
  std::uint64_t seed = 1;
  Weighting weighting = Weighting::Uniform;
  double se_inflation = 1.0;
  unsigned threads = 0;

  void validate() const;
};

/// Sub-seeds of a game: known challenges, eval challenges, instances.
struct GameSeeds {
  std::uint64_t known;
  std::uint64_t eval;
  std::uint64_t instances;
};
GameSeeds game_seeds(std::uint64_t seed) noexcept;

/// Samples N distinct known challenges, M eval challenges disjoint from them
/// and N_PUF instances, conditions on all realized transcripts and estimates.
AdvantageEstimate run_game(const GameConfig& config);

/// Conditions a fresh population on one fixed transcript and estimates on the
/// given eval challenges using only the matching group.
AdvantageEstimate run_fixed_transcript(const ArchSpec& arch, const CrpSet& known,
                                       std::span<const Challenge> eval_challenges, std::size_t n_puf,
                                       std::uint64_t seed, unsigned threads = 0);

}  // namespace pufmc
