#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pufmc/batch.hpp"
#include "pufmc/closed_form.hpp"
#include "pufmc/engine.hpp"
#include "pufmc/errors.hpp"
#include "pufmc/experiments.hpp"
#include "pufmc/parallel.hpp"
#include "pufmc/serialize.hpp"

using json = nlohmann::json;
using namespace pufmc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitPartial = 4;
constexpr std::size_t kFullPopulation = 1000000;

// Options that take part in config-file merging. A flag given on the command
// line overrides the file, which overrides the built-in default.
class Settings {
 public:
  explicit Settings(json defaults) : values_(std::move(defaults)) {}

  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, T& var, const std::string& help) {
    auto* opt = app->add_option(flag, var, help);
    bindings_.push_back({key, opt, [&var] { return json(var); }});
    return opt;
  }

  CLI::Option* add_flag(CLI::App* app, const std::string& flag, const std::string& key, bool& var,
                        const std::string& help) {
    auto* opt = app->add_flag(flag, var, help);
    bindings_.push_back({key, opt, [&var] { return json(var); }});
    return opt;
  }

  void merge(const std::string& config_path) {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config file " + config_path);
      json file;
      try {
        file = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError("config file " + config_path + ": " + e.what());
      }
      if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
      for (const auto& [key, value] : file.items()) {
        if (!values_.contains(key)) throw ConfigError("config file has unknown key '" + key + "'");
        values_[key] = value;
      }
    }
    for (const auto& b : bindings_) {
      if (b.option->count() > 0) values_[b.key] = b.value();
    }
  }

  const json& values() const { return values_; }

  template <class T>
  T get(const std::string& key) const {
    try {
      return values_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config value '" + key + "' has the wrong type");
    }
  }

  bool given(const std::string& key) const {
    for (const auto& b : bindings_) {
      if (b.key == key && b.option->count() > 0) return true;
    }
    return false;
  }

 private:
  struct Binding {
    std::string key;
    CLI::Option* option;
    std::function<json()> value;
  };
  json values_;
  std::vector<Binding> bindings_;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& s : split(text, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s[0] == '-') throw ConfigError("'" + s + "' is not a non-negative integer");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

ArchSpec arch_from_settings(const Settings& s, const std::string& text, std::size_t k) {
  ArchSpec a = ArchSpec::parse(text, k);
  const auto f1 = s.get<std::size_t>("f1");
  const auto f2 = s.get<std::size_t>("f2");
  if (f1 != 0 || f2 != 0) {
    if (a.tag != ArchTag::FfXor) throw ConfigError("--f1/--f2 apply only to feed-forward architectures");
    a = ArchSpec::ff_xor(k, a.chains, f1, f2);
  }
  a.validate();
  return a;
}

std::filesystem::path output_path(const std::string& given, const std::string& fallback_name) {
  if (!given.empty()) return given;
  const char* dir = std::getenv("PUFMC_OUTPUT_DIR");
  return std::filesystem::path(dir != nullptr && *dir != '\0' ? dir : ".") / fallback_name;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::size_t population(const Settings& s) {
  if (s.get<bool>("full_scale") && !s.given("n_puf")) return kFullPopulation;
  return s.get<std::size_t>("n_puf");
}

json envelope(const Settings& s) {
  json out;
  out["tool_version"] = kToolVersion;
  out["schema_version"] = kSchemaVersion;
  out["config"] = s.values();
  out["config_hash"] = config_hash(s.values());
  return out;
}

int cmd_eval(const Settings& s) {
  GameConfig g;
  g.arch = arch_from_settings(s, s.get<std::string>("arch"), s.get<std::size_t>("k"));
  g.n_crps = s.get<std::size_t>("n_crps");
  g.n_puf = population(s);
  g.m_eval = s.get<std::size_t>("m_eval");
  g.seed = s.get<std::uint64_t>("seed");
  g.weighting = parse_weighting(s.get<std::string>("weighting"));
  g.se_inflation = s.get<double>("se_inflation");
  const auto est = run_game(g);

  const auto dump = s.get<std::string>("dump_instances");
  if (!dump.empty()) {
    std::ofstream out(dump, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + dump);
    write_archive(out, PufBatch(g.arch, g.n_puf, game_seeds(g.seed).instances));
  }
  json out = envelope(s);
  out["result"] = estimate_to_json(est, s.get<bool>("detail"));
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

int cmd_sweep(const Settings& s) {
  const auto kind = s.get<std::string>("kind");
  const std::size_t k = s.get<std::size_t>("k");
  SweepSpec spec;
  if (kind == "report") {
    spec = report_spec(k, parse_counts(s.get<std::string>("n_values")), population(s), s.get<std::size_t>("m_eval"),
                       s.get<std::uint64_t>("seed"));
    if (s.given("archs")) spec.archs.clear();
  } else if (kind != "crp" && kind != "stage") {
    throw ConfigError("unknown sweep kind '" + kind + "' (expected crp, stage or report)");
  }
  if (spec.archs.empty()) {
    for (const auto& a : split(s.get<std::string>("archs"), ',')) spec.archs.push_back(arch_from_settings(s, a, k));
  }
  if (kind != "report" || s.given("n_values")) spec.n_values = parse_counts(s.get<std::string>("n_values"));
  if (kind == "stage") spec.k_values = parse_counts(s.get<std::string>("k_values"));
  spec.n_puf = population(s);
  spec.m_eval = s.get<std::size_t>("m_eval");
  spec.seed = s.get<std::uint64_t>("seed");
  spec.replications = s.get<std::size_t>("replications");
  spec.weighting = parse_weighting(s.get<std::string>("weighting"));
  spec.se_inflation = s.get<double>("se_inflation");

  SweepIo io;
  io.csv_path = output_path(s.get<std::string>("out"), "sweep_" + kind + ".csv").string();
  io.resume = !s.get<bool>("no_resume");
  io.on_row = [](const SweepRow& r) {
    std::cerr << r.point.arch.label() << " k=" << r.point.arch.k << " N=" << r.point.n_crps
              << " rep=" << r.point.replicate << ": ";
    if (!r.ok) {
      std::cerr << "FAILED " << r.error << '\n';
    } else {
      std::cerr << "advantage " << r.estimate.advantage << " +/- " << r.estimate.standard_error
                << (r.resumed ? " (resumed)" : "") << '\n';
    }
  };

  SweepResult result;
  if (kind == "crp") {
    result = sweep_crp_count(spec, io);
  } else if (kind == "stage") {
    result = sweep_stage_count(spec, io);
  } else {
    result = architecture_report(spec, io);
  }
  json sidecar = sweep_sidecar(result);
  sidecar["cli_config"] = s.values();
  write_json_file(io.csv_path + ".json", sidecar);

  json out = envelope(s);
  out["csv"] = io.csv_path;
  out["rows"] = result.rows.size();
  out["failures"] = sidecar["failures"];
  std::cout << out.dump(2) << '\n';
  return result.failures() > 0 ? kExitPartial : kExitOk;
}

int cmd_closed_form(const Settings& s, const std::string& which) {
  json rec;
  rec["name"] = which;
  if (which == "orthant2d") {
    const double rho = s.get<double>("rho");
    rec["inputs"] = {{"rho", rho}};
    rec["value"] = orthant_prob_2d(rho);
    rec["tolerance"] = 0.0;
  } else if (which == "orthant3d") {
    const auto parts = split(s.get<std::string>("rhos"), ',');
    if (parts.size() != 3) throw ConfigError("--rhos needs three comma-separated correlations");
    CorrelationTriple t;
    try {
      t = {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
    } catch (const std::exception&) {
      throw ConfigError("--rhos entries must be numbers");
    }
    rec["inputs"] = {{"rho_xy", t.rho_xy}, {"rho_xz", t.rho_xz}, {"rho_yz", t.rho_yz}};
    rec["value"] = orthant_prob_3d(t);
    rec["tolerance"] = 0.0;
  } else {
    QuadratureConfig q;
    q.nodes = s.get<std::size_t>("nodes");
    q.tolerance = s.get<double>("tolerance");
    const auto terms = worked_example_terms(q);
    rec["inputs"] = {{"nodes", q.nodes}, {"bound_sigmas", q.bound_sigmas}};
    rec["value"] = terms.probability;
    rec["advantage"] = terms.probability - 0.5;
    rec["numerator"] = terms.numerator;
    rec["denominator"] = terms.denominator;
    rec["tolerance"] = q.tolerance;
  }
  rec["tool_version"] = kToolVersion;
  std::cout << rec.dump(2) << '\n';
  return kExitOk;
}

int cmd_hist(const Settings& s) {
  HistogramConfig h;
  h.arch = arch_from_settings(s, s.get<std::string>("arch"), s.get<std::size_t>("k"));
  h.n_condition = s.get<std::size_t>("n_crps");
  h.n_puf = population(s);
  h.m_eval = s.get<std::size_t>("m_eval");
  h.seed = s.get<std::uint64_t>("seed");
  h.bins = s.get<std::size_t>("bins");
  const auto hist = bias_histogram(h);

  const auto path = output_path(s.get<std::string>("out"), "hist_" + h.arch.label() + ".csv");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream csv(path);
  if (!csv) throw ConfigError("cannot write " + path.string());
  write_histogram_csv(csv, hist);
  json meta = histogram_to_json(hist);
  meta["cli_config"] = s.values();
  write_json_file(path.string() + ".json", meta);

  json out = envelope(s);
  out["csv"] = path.string();
  out["histogram"] = meta;
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

void print_error(const char* kind, const std::string& message) {
  json err{{"error", kind}, {"message", message}, {"tool_version", kToolVersion}};
  std::cerr << err.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo advantage estimation for delay-based PUF populations"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  const json game_defaults{{"arch", "apuf"},     {"k", 64},           {"n_crps", 1},       {"n_puf", 100000},
                           {"m_eval", 1000},     {"seed", 1},         {"weighting", "uniform"},
                           {"se_inflation", 1.0}, {"full_scale", false}, {"f1", 0},        {"f2", 0}};

  // eval
  auto* eval = app.add_subcommand("eval", "Run one unpredictability game and print the estimate as JSON");
  json eval_defaults = game_defaults;
  eval_defaults["dump_instances"] = "";
  eval_defaults["detail"] = false;
  Settings eval_s(eval_defaults);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write CSV plus a JSON sidecar");
  json sweep_defaults = game_defaults;
  sweep_defaults.erase("arch");
  sweep_defaults.erase("n_crps");
  sweep_defaults.update({{"kind", "crp"},
                         {"archs", "apuf,xor:2,ffxor:2,ct"},
                         {"n_values", "1,2,4,8,16"},
                         {"k_values", "8,16,32,64,128"},
                         {"replications", 1},
                         {"out", ""},
                         {"no_resume", false}});
  Settings sweep_s(sweep_defaults);

  // closed-form
  auto* cf = app.add_subcommand("closed-form", "Closed-form and quadrature oracles");
  cf->require_subcommand(1);
  auto* cf2 = cf->add_subcommand("orthant2d", "P(X>0, Y>0) for correlation rho");
  auto* cf3 = cf->add_subcommand("orthant3d", "P(X>0, Y>0, Z>0) for three correlations");
  auto* cfw = cf->add_subcommand("worked-example", "Three-stage arbiter worked example by quadrature");
  Settings cf_s(json{{"rho", 0.0}, {"rhos", "0,0,0"}, {"nodes", 16}, {"tolerance", 1e-4}});

  // hist
  auto* hist = app.add_subcommand("hist", "Per-challenge bias histograms with and without one observed CRP");
  json hist_defaults = game_defaults;
  hist_defaults.erase("weighting");
  hist_defaults.erase("se_inflation");
  hist_defaults.update({{"bins", 40}, {"out", ""}});
  Settings hist_s(hist_defaults);

  std::string arch_text;
  std::size_t k = 0, n_crps = 0, n_puf = 0, m_eval = 0, f1 = 0, f2 = 0, replications = 0, bins = 0, nodes = 0;
  std::uint64_t seed = 0;
  std::string weighting, kind, archs, n_values, k_values, out, dump, rhos, config_eval, config_sweep, config_hist;
  double se_inflation = 1.0, rho = 0.0, tolerance = 0.0;
  bool full_scale = false, no_resume = false, detail = false;

  auto add_game = [&](CLI::App* sub, Settings& s, bool with_arch, bool with_weighting) {
    if (with_arch) s.add(sub, "--arch", "arch", arch_text, "apuf | xor:N | ff | ffxor:N[:f1:f2] | ct");
    s.add(sub, "--k", "k", k, "Stage count");
    if (with_arch) s.add(sub, "--n-crps", "n_crps", n_crps, "Observed CRPs N");
    s.add(sub, "--n-puf", "n_puf", n_puf, "Simulated instances N_PUF");
    s.add(sub, "--m-eval", "m_eval", m_eval, "Eval challenges M_eval");
    s.add(sub, "--seed", "seed", seed, "Base seed");
    if (with_weighting) {
      s.add(sub, "--weighting", "weighting", weighting, "uniform | instance")
          ->check(CLI::IsMember({"uniform", "instance"}));
      s.add(sub, "--se-inflation", "se_inflation", se_inflation, "Standard-error inflation factor (e.g. 1.5)");
    }
    s.add_flag(sub, "--full-scale", "full_scale", full_scale, "Use N_PUF = 10^6 unless --n-puf is given");
    s.add(sub, "--f1", "f1", f1, "Feed-forward loop source stage (1-indexed)");
    s.add(sub, "--f2", "f2", f2, "Feed-forward loop target stage (1-indexed)");
  };

  add_game(eval, eval_s, true, true);
  eval_s.add(eval, "--dump-instances", "dump_instances", dump, "Write the instance parameters to a binary archive");
  eval_s.add_flag(eval, "--detail", "detail", detail, "Include per-challenge and per-group values");
  eval->add_option("--config", config_eval, "JSON config file");

  add_game(sweep, sweep_s, false, true);
  sweep_s.add(sweep, "--kind", "kind", kind, "crp | stage | report")->check(CLI::IsMember({"crp", "stage", "report"}));
  sweep_s.add(sweep, "--archs", "archs", archs, "Comma-separated architectures");
  sweep_s.add(sweep, "--n-values", "n_values", n_values, "Comma-separated N grid");
  sweep_s.add(sweep, "--k-values", "k_values", k_values, "Comma-separated k grid (stage sweep)");
  sweep_s.add(sweep, "--replications", "replications", replications, "Replicates per grid point");
  sweep_s.add(sweep, "--out", "out", out, "CSV path (default $PUFMC_OUTPUT_DIR/sweep_<kind>.csv)");
  sweep_s.add_flag(sweep, "--no-resume", "no_resume", no_resume, "Recompute rows already in the CSV");
  sweep->add_option("--config", config_sweep, "JSON config file");

  cf_s.add(cf2, "--rho", "rho", rho, "Correlation in [-1, 1]")->required();
  cf_s.add(cf3, "--rhos", "rhos", rhos, "rho_xy,rho_xz,rho_yz")->required();
  cf_s.add(cfw, "--nodes", "nodes", nodes, "Gauss-Legendre nodes per axis (>= 16)");
  cf_s.add(cfw, "--tolerance", "tolerance", tolerance, "Absolute tolerance");

  add_game(hist, hist_s, true, false);
  hist_s.add(hist, "--bins", "bins", bins, "Histogram bins over [-1, 1]");
  hist_s.add(hist, "--out", "out", out, "CSV path (default $PUFMC_OUTPUT_DIR/hist_<arch>.csv)");
  hist->add_option("--config", config_hist, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  }

  try {
    set_default_thread_count(threads);
    if (*eval) {
      eval_s.merge(config_eval);
      return cmd_eval(eval_s);
    }
    if (*sweep) {
      sweep_s.merge(config_sweep);
      return cmd_sweep(sweep_s);
    }
    if (*hist) {
      hist_s.merge(config_hist);
      return cmd_hist(hist_s);
    }
    cf_s.merge("");
    if (*cf2) return cmd_closed_form(cf_s, "orthant2d");
    if (*cf3) return cmd_closed_form(cf_s, "orthant3d");
    return cmd_closed_form(cf_s, "worked-example");
  } catch (const InfeasibleError& e) {
    print_error("infeasible", e.what());
    return kExitInfeasible;
  } catch (const ConfigError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  } catch (const DimensionError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
}
