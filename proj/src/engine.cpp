#include "pufmc/engine.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <set>
#include <string>

#include "pufmc/errors.hpp"
#include "pufmc/parallel.hpp"
#include "pufmc/rng.hpp"
#include "tile_eval.hpp"

namespace pufmc {

void CrpSet::validate(std::size_t k) const {
  for (const auto& c : challenges) {
    if (c.size() != k) {
      throw DimensionError("known challenge of length " + std::to_string(c.size()) + " for " +
                           std::to_string(k) + " stages");
    }
  }
  std::set<Challenge> seen(challenges.begin(), challenges.end());
  if (seen.size() != challenges.size()) throw ConfigError("known challenges must be pairwise distinct");
  if (!responses.empty()) {
    if (responses.size() != challenges.size()) {
      throw DimensionError("transcript has " + std::to_string(responses.size()) + " responses for " +
                           std::to_string(challenges.size()) + " challenges");
    }
    for (Response r : responses) {
      if (r != 1 && r != -1) throw ConfigError("responses must be -1 or +1");
    }
  }
}

const char* to_string(Weighting w) noexcept {
  return w == Weighting::Uniform ? "uniform" : "instance";
}

Weighting parse_weighting(std::string_view text) {
  if (text == "uniform") return Weighting::Uniform;
  if (text == "instance" || text == "instance-weighted") return Weighting::InstanceWeighted;
  throw ConfigError("unknown weighting '" + std::string(text) + "' (expected uniform or instance)");
}

std::size_t GroupTable::largest_group() const {
  if (group_count() == 0) throw InfeasibleError("no retained group");
  std::size_t best = 0;
  for (std::size_t t = 1; t < group_count(); ++t) {
    if (group_size(t) > group_size(best)) best = t;
  }
  return best;
}

GroupTable condition_population(const PufBatch& batch, const CrpSet& known, unsigned threads) {
  const std::size_t n_known = known.challenges.size();
  if (n_known > kMaxKnownCrps) {
    throw InfeasibleError("conditioning on " + std::to_string(n_known) + " CRPs leaves groups of about 2^-" +
                          std::to_string(n_known) + " of the population; at most " +
                          std::to_string(kMaxKnownCrps) + " are supported");
  }
  known.validate(batch.stage_count());
  const std::size_t n = batch.instance_count();

  std::vector<std::uint64_t> keyed(n);
  if (n_known == 0) {
    for (std::size_t i = 0; i < n; ++i) keyed[i] = i;
  } else {
    BatchEvalOptions opts;
    opts.threads = threads;
    const ResponseMatrix responses = batch_eval(batch, known.challenges, opts);
    for (std::size_t i = 0; i < n; ++i) keyed[i] = (responses.row(i)[0] << 32) | i;
  }
  std::sort(keyed.begin(), keyed.end());

  GroupTable table;
  table.total_instances_ = n;
  table.known_ = known;
  std::uint32_t target_key = 0;
  for (std::size_t j = 0; j < known.responses.size(); ++j) {
    if (known.responses[j] > 0) target_key |= 1U << j;
  }

  std::size_t start = 0;
  while (start < n) {
    const std::uint64_t key = keyed[start] >> 32;
    std::size_t end = start + 1;
    while (end < n && (keyed[end] >> 32) == key) ++end;
    const std::size_t size = end - start;
    table.all_sizes_.push_back(size);
    if (size >= table.min_group_size_) {
      if (known.fixed_transcript() && key == target_key) table.target_ = table.keys_.size();
      table.keys_.push_back(static_cast<std::uint32_t>(key));
      for (std::size_t p = start; p < end; ++p) {
        table.members_.push_back(static_cast<std::uint32_t>(keyed[p] & 0xFFFFFFFFULL));
      }
      table.offsets_.push_back(table.members_.size());
    }
    start = end;
  }
  return table;
}

StandardError standard_error_from_columns(std::span<const double> columns, double binomial_sum, double inflation) {
  StandardError se;
  se.inflation = inflation;
  const std::size_t m = columns.size();
  if (m == 0) throw ConfigError("standard error needs at least one column");
  const double md = static_cast<double>(m);
  if (m >= 2) {
    double mean = 0.0;
    for (double y : columns) mean += y;
    mean /= md;
    double ss = 0.0;
    for (double y : columns) ss += (y - mean) * (y - mean);
    se.between = ss / (md - 1.0) / md;
  }
  se.within = binomial_sum / (md * md);
  se.value = inflation * std::sqrt(se.between + se.within);
  return se;
}

namespace {

std::vector<double> group_weights(std::span<const std::size_t> sizes, Weighting weighting) {
  std::vector<double> w(sizes.size());
  if (weighting == Weighting::Uniform) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(sizes.size()));
  } else {
    double total = 0.0;
    for (std::size_t s : sizes) total += static_cast<double>(s);
    for (std::size_t t = 0; t < sizes.size(); ++t) w[t] = static_cast<double>(sizes[t]) / total;
  }
  return w;
}

}  // namespace

StandardError estimate_standard_error(const std::vector<std::vector<double>>& abs_means,
                                      std::span<const std::size_t> group_sizes, Weighting weighting,
                                      double inflation) {
  if (abs_means.size() != group_sizes.size()) throw DimensionError("one group size per row is required");
  if (abs_means.empty()) throw ConfigError("standard error needs at least two cells");
  const std::size_t m = abs_means.front().size();
  for (const auto& row : abs_means) {
    if (row.size() != m) throw DimensionError("ragged (group x challenge) matrix");
  }
  if (abs_means.size() * m < 2) throw ConfigError("standard error needs at least two cells");
  const auto w = group_weights(group_sizes, weighting);
  std::vector<double> columns(m, 0.0);
  double binomial = 0.0;
  for (std::size_t t = 0; t < abs_means.size(); ++t) {
    const double n = static_cast<double>(group_sizes[t]);
    for (std::size_t i = 0; i < m; ++i) {
      const double a = abs_means[t][i];
      columns[i] += w[t] * a;
      if (n > 1.0) binomial += w[t] * w[t] * (1.0 - a * a) / (n - 1.0);
    }
  }
  return standard_error_from_columns(columns, binomial, inflation);
}

namespace {

std::size_t round_chunk(std::size_t chunk) {
  return std::max(detail::kLanes, (chunk + detail::kLanes - 1) / detail::kLanes * detail::kLanes);
}

std::uint64_t segment_mask(std::size_t lo, std::size_t hi) {
  const std::uint64_t upto_hi = hi >= 64 ? ~0ULL : ((1ULL << hi) - 1);
  const std::uint64_t below_lo = (1ULL << lo) - 1;
  return upto_hi & ~below_lo;
}

struct Partial {
  std::size_t group;
  std::vector<std::uint32_t> counts;
};

struct ChunkResult {
  std::vector<double> columns;
  double binomial = 0.0;
  std::vector<Partial> partials;
};

// Adds group g's contribution given its plus-counts; returns b_g.
double finalize_group(std::span<const std::uint32_t> counts, std::size_t size, double weight,
                      std::span<double> columns, double& binomial) {
  const double n = static_cast<double>(size);
  double bias_sum = 0.0;
  double var_sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double mean = 2.0 * static_cast<double>(counts[i]) / n - 1.0;
    const double a = std::abs(mean);
    columns[i] += weight * a;
    bias_sum += a;
    var_sum += (1.0 - mean * mean) / (n - 1.0);
  }
  binomial += weight * weight * var_sum;
  return bias_sum / static_cast<double>(counts.size());
}

}  // namespace

AdvantageEstimate estimate_advantage(const PufBatch& batch, const GroupTable& groups,
                                     std::span<const Challenge> eval_challenges, const EstimateOptions& options) {
  const std::size_t m = eval_challenges.size();
  if (m == 0) throw ConfigError("at least one eval challenge is required");
  if (!(options.se_inflation >= 1.0)) throw ConfigError("standard-error inflation must be at least 1");
  if (groups.total_instances() != batch.instance_count()) {
    throw DimensionError("group table was built for a different population");
  }
  {
    const std::set<Challenge> known(groups.known().challenges.begin(), groups.known().challenges.end());
    for (const auto& c : eval_challenges) {
      if (known.count(c) != 0) throw ConfigError("eval challenge " + c.to_string() + " is also a known challenge");
    }
  }

  // Evaluated groups as a contiguous run of member positions.
  std::span<const std::uint32_t> ids;
  std::vector<std::size_t> offs;
  std::vector<std::size_t> sizes;
  if (options.target_only) {
    if (!groups.known().fixed_transcript()) throw ConfigError("target-only estimation needs a fixed transcript");
    if (!groups.target()) {
      throw InfeasibleError("no retained instance is consistent with the fixed transcript; increase N_PUF");
    }
    const std::size_t t = *groups.target();
    ids = groups.members(t);
    offs = {0, ids.size()};
    sizes = {ids.size()};
  } else {
    if (groups.group_count() == 0) {
      throw InfeasibleError("every consistency group is a singleton; increase N_PUF or reduce N");
    }
    ids = groups.all_members();
    offs.assign(groups.offsets().begin(), groups.offsets().end());
    for (std::size_t t = 0; t < groups.group_count(); ++t) sizes.push_back(groups.group_size(t));
  }
  const std::size_t n_groups = sizes.size();
  const auto weights = group_weights(sizes, options.weighting);

  const detail::TileEvaluator evaluator(batch.arch(), eval_challenges);
  const std::size_t total = ids.size();
  const std::size_t chunk = round_chunk(options.chunk_instances);
  const std::size_t jobs = (total + chunk - 1) / chunk;
  std::vector<ChunkResult> results(jobs);
  std::vector<double> group_bias(n_groups, 0.0);

  parallel_for(jobs, options.threads, [&](std::size_t job) {
    const std::size_t p0 = job * chunk;
    const std::size_t p1 = std::min(total, p0 + chunk);
    const auto first_it = std::upper_bound(offs.begin(), offs.end(), p0);
    const std::size_t g0 = static_cast<std::size_t>(first_it - offs.begin()) - 1;
    const auto last_it = std::upper_bound(offs.begin(), offs.end(), p1 - 1);
    const std::size_t g1 = static_cast<std::size_t>(last_it - offs.begin()) - 1;
    std::vector<std::uint32_t> counts((g1 - g0 + 1) * m, 0);

    detail::TileParams tile(batch.params_per_instance());
    std::vector<std::uint64_t> words(m);
    std::size_t g = g0;
    for (std::size_t p = p0; p < p1; p += detail::kLanes) {
      const std::size_t lanes = std::min(detail::kLanes, p1 - p);
      tile.load(batch, ids.subspan(p, lanes));
      evaluator.evaluate(tile, words);
      std::size_t pos = p;
      while (pos < p + lanes) {
        const std::size_t seg_end = std::min(p + lanes, offs[g + 1]);
        const std::uint64_t mask = segment_mask(pos - p, seg_end - p);
        std::uint32_t* c = counts.data() + (g - g0) * m;
        for (std::size_t j = 0; j < m; ++j) c[j] += static_cast<std::uint32_t>(std::popcount(words[j] & mask));
        pos = seg_end;
        if (seg_end == offs[g + 1]) ++g;
      }
    }

    ChunkResult& out = results[job];
    out.columns.assign(m, 0.0);
    for (std::size_t gg = g0; gg <= g1; ++gg) {
      std::span<const std::uint32_t> c(counts.data() + (gg - g0) * m, m);
      if (offs[gg] >= p0 && offs[gg + 1] <= p1) {
        group_bias[gg] = finalize_group(c, sizes[gg], weights[gg], out.columns, out.binomial);
      } else {
        out.partials.push_back(Partial{gg, std::vector<std::uint32_t>(c.begin(), c.end())});
      }
    }
  });

  // Merge in chunk order; split groups are completed from integer counts.
  std::vector<double> columns(m, 0.0);
  double binomial = 0.0;
  std::optional<Partial> pending;
  for (std::size_t job = 0; job < jobs; ++job) {
    const std::size_t p1 = std::min(total, (job + 1) * chunk);
    for (auto& part : results[job].partials) {
      if (pending && pending->group == part.group) {
        for (std::size_t j = 0; j < m; ++j) pending->counts[j] += part.counts[j];
      } else {
        pending = std::move(part);
      }
      if (offs[pending->group + 1] <= p1) {
        group_bias[pending->group] =
            finalize_group(pending->counts, sizes[pending->group], weights[pending->group], columns, binomial);
        pending.reset();
      }
    }
    for (std::size_t j = 0; j < m; ++j) columns[j] += results[job].columns[j];
    binomial += results[job].binomial;
  }

  AdvantageEstimate est;
  double sum = 0.0;
  for (double y : columns) sum += y;
  est.bias = sum / static_cast<double>(m);
  est.advantage = est.bias / 2.0;
  est.se_components = standard_error_from_columns(columns, binomial, options.se_inflation);
  est.bias_standard_error = est.se_components.value;
  est.standard_error = est.bias_standard_error / 2.0;
  est.retained_groups = n_groups;
  est.retained_instances = total;
  est.total_groups = groups.all_group_sizes().size();
  est.m_eval = m;
  est.weighting = options.weighting;
  est.per_challenge = std::move(columns);
  est.group_bias = std::move(group_bias);

  RunManifest& mf = est.manifest;
  mf.arch = batch.arch();
  mf.n_crps = groups.known().challenges.size();
  mf.n_puf = batch.instance_count();
  mf.m_eval = m;
  mf.instance_seed = batch.seed();
  mf.weighting = options.weighting;
  mf.fixed_transcript = options.target_only;
  mf.min_group_size = groups.min_group_size();
  mf.se_inflation = options.se_inflation;
  if (batch.arch().tag == ArchTag::Ct) mf.ct_slicing = CtSlicing::description();
  return est;
}

std::vector<std::uint64_t> plus_counts(const PufBatch& batch, std::span<const std::uint32_t> ids,
                                       std::span<const Challenge> challenges, unsigned threads) {
  const detail::TileEvaluator evaluator(batch.arch(), challenges);
  const std::size_t m = challenges.size();
  const std::size_t chunk = round_chunk(4096);
  const std::size_t jobs = (ids.size() + chunk - 1) / chunk;
  std::vector<std::vector<std::uint64_t>> partial(jobs);
  parallel_for(jobs, threads, [&](std::size_t job) {
    auto& counts = partial[job];
    counts.assign(m, 0);
    detail::TileParams tile(batch.params_per_instance());
    std::vector<std::uint64_t> words(m);
    const std::size_t end = std::min(ids.size(), (job + 1) * chunk);
    for (std::size_t p = job * chunk; p < end; p += detail::kLanes) {
      const std::size_t lanes = std::min(detail::kLanes, end - p);
      tile.load(batch, ids.subspan(p, lanes));
      evaluator.evaluate(tile, words);
      for (std::size_t j = 0; j < m; ++j) counts[j] += static_cast<std::uint64_t>(std::popcount(words[j]));
    }
  });
  std::vector<std::uint64_t> counts(m, 0);
  for (const auto& part : partial) {
    for (std::size_t j = 0; j < m; ++j) counts[j] += part[j];
  }
  return counts;
}

void GameConfig::validate() const {
  arch.validate();
  if (n_puf < 1000) throw ConfigError("N_PUF must be at least 1000");
  if (m_eval < 1) throw ConfigError("M_eval must be at least 1");
  if (n_crps > kMaxKnownCrps) {
    throw InfeasibleError("N = " + std::to_string(n_crps) + " exceeds the supported maximum of " +
                          std::to_string(kMaxKnownCrps) + " observed CRPs");
  }
  if (!(se_inflation >= 1.0)) throw ConfigError("standard-error inflation must be at least 1");
}

GameSeeds game_seeds(std::uint64_t seed) noexcept {
  return GameSeeds{derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3)};
}

AdvantageEstimate run_game(const GameConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const GameSeeds seeds = game_seeds(config.seed);
  const std::size_t k = config.arch.k;

  CrpSet known;
  known.challenges = sample_challenges(k, config.n_crps, seeds.known, true);
  const auto eval = sample_challenges(k, config.m_eval, seeds.eval, false, known.challenges);
  const PufBatch batch(config.arch, config.n_puf, seeds.instances);
  const GroupTable groups = condition_population(batch, known, config.threads);

  EstimateOptions opts;
  opts.weighting = config.weighting;
  opts.se_inflation = config.se_inflation;
  opts.threads = config.threads;
  AdvantageEstimate est = estimate_advantage(batch, groups, eval, opts);
  est.manifest.seed = config.seed;
  est.manifest.known_seed = seeds.known;
  est.manifest.eval_seed = seeds.eval;
  est.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return est;
}

AdvantageEstimate run_fixed_transcript(const ArchSpec& arch, const CrpSet& known,
                                       std::span<const Challenge> eval_challenges, std::size_t n_puf,
                                       std::uint64_t seed, unsigned threads) {
  if (!known.fixed_transcript() && !known.challenges.empty()) {
    throw ConfigError("a fixed transcript needs one response per known challenge");
  }
  const auto started = std::chrono::steady_clock::now();
  const GameSeeds seeds = game_seeds(seed);
  const PufBatch batch(arch, n_puf, seeds.instances);
  const GroupTable groups = condition_population(batch, known, threads);
  EstimateOptions opts;
  opts.threads = threads;
  opts.target_only = known.fixed_transcript();
  AdvantageEstimate est = estimate_advantage(batch, groups, eval_challenges, opts);
  est.manifest.seed = seed;
  est.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return est;
}

}  // namespace pufmc
