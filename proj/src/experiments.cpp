#include "pufmc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pufmc/errors.hpp"
#include "pufmc/rng.hpp"
#include "pufmc/serialize.hpp"

namespace pufmc {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string point_key(const ArchSpec& a, std::size_t n_crps, std::size_t replicate) {
  return a.label() + "|" + std::to_string(a.k) + "|" + std::to_string(a.f1) + "|" + std::to_string(a.f2) + "|" +
         std::to_string(n_crps) + "|" + std::to_string(replicate);
}

}  // namespace

void SweepSpec::validate() const {
  if (archs.empty()) throw ConfigError("sweep needs at least one architecture");
  if (n_values.empty()) throw ConfigError("sweep needs at least one N value");
  if (replications < 1) throw ConfigError("replication count must be at least 1");
  if (n_puf < 1000) throw ConfigError("N_PUF must be at least 1000");
  if (m_eval < 1) throw ConfigError("M_eval must be at least 1");
  for (const auto& a : archs) a.validate();
  for (std::size_t k : k_values) {
    if (k == 0) throw ConfigError("stage counts must be positive");
  }
}

nlohmann::json SweepSpec::to_json() const {
  nlohmann::json j;
  j["archs"] = nlohmann::json::array();
  for (const auto& a : archs) j["archs"].push_back(arch_to_json(a));
  j["n_values"] = n_values;
  j["k_values"] = k_values;
  j["N_PUF"] = n_puf;
  j["M_eval"] = m_eval;
  j["seed"] = seed;
  j["replications"] = replications;
  j["weighting"] = to_string(weighting);
  j["se_inflation"] = se_inflation;
  return j;
}

SweepSpec SweepSpec::from_json(const nlohmann::json& j) {
  SweepSpec s;
  s.archs.clear();
  for (const auto& a : j.at("archs")) s.archs.push_back(arch_from_json(a));
  s.n_values = j.at("n_values").get<std::vector<std::size_t>>();
  s.k_values = j.value("k_values", std::vector<std::size_t>{});
  s.n_puf = j.at("N_PUF").get<std::size_t>();
  s.m_eval = j.at("M_eval").get<std::size_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.replications = j.value("replications", std::size_t{1});
  s.weighting = parse_weighting(j.value("weighting", std::string("uniform")));
  s.se_inflation = j.value("se_inflation", 1.0);
  return s;
}

std::vector<GridPoint> expand_grid(const SweepSpec& spec) {
  spec.validate();
  std::vector<GridPoint> grid;
  for (const auto& base : spec.archs) {
    std::vector<std::size_t> ks = spec.k_values;
    if (ks.empty()) ks = {base.k};
    for (std::size_t k : ks) {
      const ArchSpec arch = base.k == k ? base : base.with_stages(k);
      arch.validate();
      for (std::size_t n : spec.n_values) {
        for (std::size_t r = 0; r < spec.replications; ++r) {
          GridPoint p;
          p.index = grid.size();
          p.arch = arch;
          p.n_crps = n;
          p.replicate = r;
          p.seed = derive_seed(derive_seed(derive_seed(spec.seed, k), n), r);
          grid.push_back(p);
        }
      }
    }
  }
  return grid;
}

std::size_t SweepResult::failures() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.ok; }));
}

std::string sweep_csv_header() {
  return "arch,k,n,f1,f2,N,N_PUF,M_eval,seed,advantage,bias,stderr,groups,retained_instances,weighting,"
         "wall_time_s,replicate,config_hash,tool_version,schema_version";
}

std::string sweep_csv_row(const SweepRow& row, const std::string& hash) {
  const auto& a = row.point.arch;
  const auto& e = row.estimate;
  std::ostringstream s;
  s << a.label() << ',' << a.k << ',' << a.chains << ',' << a.f1 << ',' << a.f2 << ',' << row.point.n_crps << ','
    << e.manifest.n_puf << ',' << e.m_eval << ',' << row.point.seed << ',' << fmt_double(e.advantage) << ','
    << fmt_double(e.bias) << ',' << fmt_double(e.standard_error) << ',' << e.retained_groups << ','
    << e.retained_instances << ',' << to_string(e.weighting) << ',' << fmt_double(e.wall_time_s) << ','
    << row.point.replicate << ',' << hash << ',' << kToolVersion << ',' << kSchemaVersion;
  return s.str();
}

namespace {

// Completed rows of an existing CSV under `hash`, keyed by grid point.
std::map<std::string, std::vector<std::string>> load_completed(const std::string& path, const std::string& hash) {
  std::map<std::string, std::vector<std::string>> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  if (!std::getline(in, line)) return done;
  if (line != sweep_csv_header()) {
    throw ConfigError("existing file " + path + " does not have the sweep CSV header; refusing to append");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 20 || f[17] != hash) continue;
    ArchSpec a;
    try {
      a = ArchSpec::parse(f[0] == "apuf" || f[0] == "ct" ? f[0]
                          : f[0].rfind("xor", 0) == 0 ? "xor:" + f[2]
                                                      : "ffxor:" + f[2] + ":" + f[3] + ":" + f[4],
                          std::stoul(f[1]));
    } catch (const std::exception&) {
      continue;
    }
    done[point_key(a, std::stoul(f[5]), std::stoul(f[16]))] = f;
  }
  return done;
}

SweepRow row_from_csv(const GridPoint& p, const std::vector<std::string>& f) {
  SweepRow row;
  row.point = p;
  row.resumed = true;
  auto& e = row.estimate;
  e.manifest.arch = p.arch;
  e.manifest.n_crps = p.n_crps;
  e.manifest.n_puf = std::stoull(f[6]);
  e.manifest.m_eval = std::stoull(f[7]);
  e.manifest.seed = std::stoull(f[8]);
  e.m_eval = e.manifest.m_eval;
  e.advantage = std::stod(f[9]);
  e.bias = std::stod(f[10]);
  e.standard_error = std::stod(f[11]);
  e.bias_standard_error = 2.0 * e.standard_error;
  e.retained_groups = std::stoull(f[12]);
  e.retained_instances = std::stoull(f[13]);
  e.weighting = parse_weighting(f[14]);
  e.manifest.weighting = e.weighting;
  e.wall_time_s = std::stod(f[15]);
  return row;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, const SweepIo& io) {
  const auto grid = expand_grid(spec);
  SweepResult result;
  result.spec = spec.to_json();
  result.config_hash = config_hash(result.spec);
  result.tool_version = kToolVersion;
  result.created = utc_timestamp();

  std::map<std::string, std::vector<std::string>> completed;
  std::ofstream csv;
  if (!io.csv_path.empty()) {
    const std::filesystem::path path(io.csv_path);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const bool exists = std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
    if (exists && io.resume) completed = load_completed(io.csv_path, result.config_hash);
    csv.open(path, exists && io.resume ? std::ios::app : std::ios::trunc);
    if (!csv) throw ConfigError("cannot write " + io.csv_path);
    if (!(exists && io.resume)) csv << sweep_csv_header() << '\n' << std::flush;
  }

  for (const auto& p : grid) {
    const auto hit = completed.find(point_key(p.arch, p.n_crps, p.replicate));
    if (hit != completed.end()) {
      result.rows.push_back(row_from_csv(p, hit->second));
      if (io.on_row) io.on_row(result.rows.back());
      continue;
    }
    SweepRow row;
    row.point = p;
    try {
      GameConfig g;
      g.arch = p.arch;
      g.n_crps = p.n_crps;
      g.n_puf = spec.n_puf;
      g.m_eval = spec.m_eval;
      g.seed = p.seed;
      g.weighting = spec.weighting;
      g.se_inflation = spec.se_inflation;
      g.threads = io.threads;
      row.estimate = run_game(g);
    } catch (const Error& err) {
      row.ok = false;
      row.error = err.what();
    }
    if (row.ok && csv.is_open()) csv << sweep_csv_row(row, result.config_hash) << '\n' << std::flush;
    result.rows.push_back(std::move(row));
    if (io.on_row) io.on_row(result.rows.back());
  }
  return result;
}

SweepResult sweep_crp_count(const SweepSpec& spec, const SweepIo& io) {
  return run_sweep(spec, io);
}

SweepResult sweep_stage_count(const SweepSpec& spec, const SweepIo& io) {
  if (spec.k_values.empty()) throw ConfigError("stage sweep needs a k grid");
  for (std::size_t i = 1; i < spec.k_values.size(); ++i) {
    if (spec.k_values[i] <= spec.k_values[i - 1]) throw ConfigError("stage sweep k grid must be strictly ascending");
  }
  return run_sweep(spec, io);
}

SweepSpec report_spec(std::size_t k, std::vector<std::size_t> n_values, std::size_t n_puf, std::size_t m_eval,
                      std::uint64_t seed) {
  SweepSpec s;
  s.archs = {ArchSpec::apuf(k),     ArchSpec::xor_puf(k, 2), ArchSpec::xor_puf(k, 4), ArchSpec::xor_puf(k, 6),
             ArchSpec::ff_xor(k, 1), ArchSpec::ff_xor(k, 2),  ArchSpec::ff_xor(k, 3),  ArchSpec::ct(k)};
  s.n_values = std::move(n_values);
  s.n_puf = n_puf;
  s.m_eval = m_eval;
  s.seed = seed;
  return s;
}

SweepResult architecture_report(const SweepSpec& spec, const SweepIo& io) {
  std::size_t k = spec.archs.empty() ? 0 : spec.archs.front().k;
  for (const auto& a : spec.archs) {
    if (a.k != k) throw ConfigError("architecture report needs a common stage count");
  }
  return run_sweep(spec, io);
}

nlohmann::json sweep_sidecar(const SweepResult& result) {
  nlohmann::json j;
  j["spec"] = result.spec;
  j["config_hash"] = result.config_hash;
  j["tool_version"] = result.tool_version;
  j["schema_version"] = kSchemaVersion;
  j["created"] = result.created;
  j["columns"] = sweep_csv_header();
  j["rows"] = result.rows.size();
  j["failures"] = nlohmann::json::array();
  for (const auto& r : result.rows) {
    if (r.ok) continue;
    j["failures"].push_back({{"index", r.point.index},
                             {"arch", r.point.arch.label()},
                             {"k", r.point.arch.k},
                             {"N", r.point.n_crps},
                             {"replicate", r.point.replicate},
                             {"error", r.error}});
  }
  return j;
}

void HistogramConfig::validate() const {
  arch.validate();
  if (n_condition > 1) throw ConfigError("histogram conditions on 0 or 1 CRPs");
  if (m_eval < 100) throw ConfigError("histogram needs at least 100 eval challenges");
  if (n_puf < 1000) throw ConfigError("N_PUF must be at least 1000");
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
}

nlohmann::json HistogramConfig::to_json() const {
  nlohmann::json j = arch_to_json(arch);
  j["N"] = n_condition;
  j["N_PUF"] = n_puf;
  j["M_eval"] = m_eval;
  j["seed"] = seed;
  j["bins"] = bins;
  return j;
}

namespace {

HistogramSeries make_series(std::string name, std::span<const std::uint64_t> plus, std::size_t population,
                            const std::vector<double>& edges) {
  HistogramSeries s;
  s.name = std::move(name);
  s.population = population;
  const double n = static_cast<double>(population);
  const std::size_t bins = edges.size() - 1;
  s.counts.assign(bins, 0);
  std::vector<double> abs_means;
  double binomial = 0.0;
  double sum = 0.0;
  for (std::uint64_t c : plus) {
    const double m = 2.0 * static_cast<double>(c) / n - 1.0;
    s.signed_means.push_back(m);
    abs_means.push_back(std::abs(m));
    sum += m;
    if (population > 1) binomial += (1.0 - m * m) / (n - 1.0);
    auto b = static_cast<std::size_t>((m + 1.0) / 2.0 * static_cast<double>(bins));
    s.counts[std::min(b, bins - 1)] += 1;
  }
  const double md = static_cast<double>(plus.size());
  s.mean = sum / md;
  s.mean_abs = std::accumulate(abs_means.begin(), abs_means.end(), 0.0) / md;
  s.mean_abs_se = standard_error_from_columns(abs_means, binomial).value;
  return s;
}

}  // namespace

BiasHistogram bias_histogram(const HistogramConfig& config) {
  config.validate();
  const GameSeeds seeds = game_seeds(config.seed);
  const std::size_t k = config.arch.k;
  CrpSet known;
  known.challenges = sample_challenges(k, config.n_condition, seeds.known, true);
  const auto eval = sample_challenges(k, config.m_eval, seeds.eval, false, known.challenges);
  const PufBatch batch(config.arch, config.n_puf, seeds.instances);

  BiasHistogram h;
  h.config = config;
  for (std::size_t b = 0; b <= config.bins; ++b) {
    h.edges.push_back(-1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(config.bins));
  }

  std::vector<std::uint32_t> everyone(config.n_puf);
  std::iota(everyone.begin(), everyone.end(), 0U);
  const auto all_plus = plus_counts(batch, everyone, eval, config.threads);
  h.unconditioned = make_series("unconditioned", all_plus, config.n_puf, h.edges);

  const GroupTable groups = condition_population(batch, known, config.threads);
  const std::size_t t = groups.largest_group();
  const auto group_plus = plus_counts(batch, groups.members(t), eval, config.threads);
  h.conditioned = make_series("conditioned", group_plus, groups.group_size(t), h.edges);
  return h;
}

void write_histogram_csv(std::ostream& out, const BiasHistogram& h) {
  out << "record,series,index,signed_mean,bin_lo,bin_hi,count\n";
  for (const auto* s : {&h.unconditioned, &h.conditioned}) {
    for (std::size_t i = 0; i < s->signed_means.size(); ++i) {
      out << "mean," << s->name << ',' << i << ',' << fmt_double(s->signed_means[i]) << ",,,\n";
    }
  }
  for (const auto* s : {&h.unconditioned, &h.conditioned}) {
    for (std::size_t b = 0; b < s->counts.size(); ++b) {
      out << "bin," << s->name << ',' << b << ",," << fmt_double(h.edges[b]) << ',' << fmt_double(h.edges[b + 1])
          << ',' << s->counts[b] << '\n';
    }
  }
}

nlohmann::json histogram_to_json(const BiasHistogram& h) {
  nlohmann::json j;
  j["config"] = h.config.to_json();
  j["config_hash"] = config_hash(j["config"]);
  j["tool_version"] = kToolVersion;
  j["schema_version"] = kSchemaVersion;
  j["conditioned_group"] = "largest";
  j["edges"] = h.edges;
  for (const auto* s : {&h.unconditioned, &h.conditioned}) {
    j[s->name] = {{"population", s->population},
                  {"mean", s->mean},
                  {"mean_abs", s->mean_abs},
                  {"mean_abs_se", s->mean_abs_se},
                  {"counts", s->counts}};
  }
  return j;
}

}  // namespace pufmc
