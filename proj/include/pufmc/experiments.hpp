#pragma once

// Parameter sweeps and bias histograms built on the advantage engine.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "pufmc/arch.hpp"
#include "pufmc/engine.hpp"

namespace pufmc {

struct SweepSpec {
  std::vector<ArchSpec> archs;
  std::vector<std::size_t> n_values{1, 2, 4, 8, 16};
  /// Stage grid. Empty: every architecture keeps its own k.
  std::vector<std::size_t> k_values;
  std::size_t n_puf = 100000;
  std::size_t m_eval = 1000;
  std::uint64_t seed = 1;
  std::size_t replications = 1;
  Weighting weighting = Weighting::Uniform;
  double se_inflation = 1.0;

  void validate() const;
  nlohmann::json to_json() const;
  static SweepSpec from_json(const nlohmann::json& j);
};

struct GridPoint {
  std::size_t index = 0;
  ArchSpec arch;
  std::size_t n_crps = 0;
  std::size_t replicate = 0;
  /// Game seed. Derived from (base seed, k, N, replicate) only, so every
  /// architecture at a grid point sees the same challenges.
  std::uint64_t seed = 0;
};

/// Grid in architecture, k, N, replicate order.
std::vector<GridPoint> expand_grid(const SweepSpec& spec);

struct SweepRow {
  GridPoint point;
  AdvantageEstimate estimate;
  bool ok = true;
  bool resumed = false;
  std::string error;
};

struct SweepResult {
  nlohmann::json spec;
  std::string config_hash;
  std::string tool_version;
  std::string created;
  std::vector<SweepRow> rows;

  std::size_t failures() const;
};

struct SweepIo {
  /// CSV written incrementally, one row per completed grid point. Empty: none.
  std::string csv_path;
  /// Skip grid points already present in csv_path under the same config hash.
  bool resume = true;
  unsigned threads = 0;
  std::function<void(const SweepRow&)> on_row;
};

/// Runs every grid point sequentially (each point is internally parallel).
/// A failing point is recorded with ok = false and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec, const SweepIo& io = {});

/// Advantage versus observed-CRP count.
SweepResult sweep_crp_count(const SweepSpec& spec, const SweepIo& io = {});

/// Advantage versus stage count. Requires a strictly ascending k grid.
SweepResult sweep_stage_count(const SweepSpec& spec, const SweepIo& io = {});

/// Report grid: APUF, 2/4/6-XOR, FF-XOR with 1/2/3 chains and CT-PUF at one k.
SweepSpec report_spec(std::size_t k, std::vector<std::size_t> n_values, std::size_t n_puf, std::size_t m_eval,
                      std::uint64_t seed);
SweepResult architecture_report(const SweepSpec& spec, const SweepIo& io = {});

/// Sweep CSV header, comma separated.
std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& row, const std::string& config_hash);
/// JSON sidecar with the full spec and per-point failures.
nlohmann::json sweep_sidecar(const SweepResult& result);

struct HistogramConfig {
  ArchSpec arch;
  /// Observed CRPs for the conditioned series (0 or 1).
  std::size_t n_condition = 1;
  std::size_t n_puf = 100000;
  std::size_t m_eval = 1000;
  std::uint64_t seed = 1;
  std::size_t bins = 40;
  unsigned threads = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct HistogramSeries {
  std::string name;
  std::size_t population = 0;
  /// Signed response mean per eval challenge.
  std::vector<double> signed_means;
  std::vector<std::size_t> counts;
  double mean = 0.0;
  double mean_abs = 0.0;
  /// Standard error of mean_abs.
  double mean_abs_se = 0.0;
};

struct BiasHistogram {
  HistogramConfig config;
  /// bins + 1 edges spanning [-1, 1].
  std::vector<double> edges;
  /// Whole population.
  HistogramSeries unconditioned;
  /// Largest consistency group after conditioning on n_condition CRPs.
  HistogramSeries conditioned;
};

BiasHistogram bias_histogram(const HistogramConfig& config);

/// Rows "mean,<series>,<index>,<signed mean>,,," for every eval challenge,
/// then "bin,<series>,<index>,,<lo>,<hi>,<count>" for every bin.
void write_histogram_csv(std::ostream& out, const BiasHistogram& h);
nlohmann::json histogram_to_json(const BiasHistogram& h);

}  // namespace pufmc
