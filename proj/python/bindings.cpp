// Python bindings. Records cross the boundary as JSON text and are decoded by
// the pufmc package.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <string>

#include "pufmc/arch.hpp"
#include "pufmc/closed_form.hpp"
#include "pufmc/engine.hpp"
#include "pufmc/errors.hpp"
#include "pufmc/experiments.hpp"
#include "pufmc/serialize.hpp"

namespace py = pybind11;
using namespace pufmc;

namespace {

std::string game_json(const std::string& arch, std::size_t k, std::size_t n_crps, std::size_t n_puf,
                      std::size_t m_eval, std::uint64_t seed, const std::string& weighting, double se_inflation,
                      unsigned threads, bool detail) {
  GameConfig g;
  g.arch = ArchSpec::parse(arch, k);
  g.n_crps = n_crps;
  g.n_puf = n_puf;
  g.m_eval = m_eval;
  g.seed = seed;
  g.weighting = parse_weighting(weighting);
  g.se_inflation = se_inflation;
  g.threads = threads;
  AdvantageEstimate e;
  {
    py::gil_scoped_release release;
    e = run_game(g);
  }
  return estimate_to_json(e, detail).dump();
}

std::string sweep_json(const std::string& kind, const std::string& spec_json, const std::string& csv_path,
                       bool resume, unsigned threads) {
  const auto spec = SweepSpec::from_json(nlohmann::json::parse(spec_json));
  SweepIo io;
  io.csv_path = csv_path;
  io.resume = resume;
  io.threads = threads;
  SweepResult r;
  {
    py::gil_scoped_release release;
    if (kind == "crp") {
      r = sweep_crp_count(spec, io);
    } else if (kind == "stage") {
      r = sweep_stage_count(spec, io);
    } else if (kind == "report") {
      r = architecture_report(spec, io);
    } else {
      throw ConfigError("unknown sweep kind: " + kind);
    }
  }
  const auto sidecar = sweep_sidecar(r);
  if (!csv_path.empty()) std::ofstream(csv_path + ".json") << sidecar.dump(2) << '\n';
  return sidecar.dump();
}

std::string histogram_json(const std::string& arch, std::size_t k, std::size_t n_condition, std::size_t n_puf,
                           std::size_t m_eval, std::uint64_t seed, std::size_t bins, const std::string& csv_path,
                           unsigned threads) {
  HistogramConfig h;
  h.arch = ArchSpec::parse(arch, k);
  h.n_condition = n_condition;
  h.n_puf = n_puf;
  h.m_eval = m_eval;
  h.seed = seed;
  h.bins = bins;
  h.threads = threads;
  BiasHistogram hist;
  {
    py::gil_scoped_release release;
    hist = bias_histogram(h);
  }
  const auto meta = histogram_to_json(hist);
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw ConfigError("cannot write " + csv_path);
    write_histogram_csv(out, hist);
    std::ofstream(csv_path + ".json") << meta.dump(2) << '\n';
  }
  return meta.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Monte Carlo advantage estimation for PUF populations";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

  m.attr("__version__") = kToolVersion;
  m.attr("SCHEMA_VERSION") = kSchemaVersion;
  m.attr("MAX_KNOWN_CRPS") = kMaxKnownCrps;

  m.def("orthant_prob_2d", &orthant_prob_2d, py::arg("rho"));
  m.def(
      "orthant_prob_3d",
      [](double xy, double xz, double yz) { return orthant_prob_3d({xy, xz, yz}); }, py::arg("rho_xy"),
      py::arg("rho_xz"), py::arg("rho_yz"));
  m.def(
      "worked_example_prob",
      [](std::size_t nodes, double tolerance) {
        QuadratureConfig q;
        q.nodes = nodes;
        q.tolerance = tolerance;
        return worked_example_prob(q);
      },
      py::arg("nodes") = QuadratureConfig{}.nodes, py::arg("tolerance") = QuadratureConfig{}.tolerance);

  m.def("run_game_json", &game_json, py::arg("arch"), py::arg("k"), py::arg("n_crps"), py::arg("n_puf"),
        py::arg("m_eval"), py::arg("seed"), py::arg("weighting"), py::arg("se_inflation"), py::arg("threads"),
        py::arg("detail"));
  m.def("sweep_json", &sweep_json, py::arg("kind"), py::arg("spec_json"), py::arg("csv_path"), py::arg("resume"),
        py::arg("threads"));
  m.def("histogram_json", &histogram_json, py::arg("arch"), py::arg("k"), py::arg("n_condition"), py::arg("n_puf"),
        py::arg("m_eval"), py::arg("seed"), py::arg("bins"), py::arg("csv_path"), py::arg("threads"));
  m.def(
      "config_hash", [](const std::string& j) { return config_hash(nlohmann::json::parse(j)); }, py::arg("json"));
}
