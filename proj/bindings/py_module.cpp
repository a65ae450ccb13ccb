// Python bindings for the main pipeline operations: channel draws, subcarrier
// assignment, single-sample runs, and full experiments. Configs cross the
// boundary as JSON strings; results come back as plain dicts and lists.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <vector>

#include "cpss/harness.hpp"
#include "cpss/rng.hpp"

namespace py = pybind11;

namespace {

cpss::AllocationMethod parse_method(const std::string& name) {
  if (name == "gs" || name == "gale_shapley") return cpss::AllocationMethod::GaleShapley;
  if (name == "tp" || name == "transportation") return cpss::AllocationMethod::Transportation;
  throw cpss::ConfigError("method must be gs or tp");
}

std::vector<std::vector<double>> to_gains(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& array) {
  if (array.ndim() != 2) throw cpss::ConfigError("gains must be a 2-D array");
  const auto view = array.unchecked<2>();
  std::vector<std::vector<double>> gains(static_cast<size_t>(view.shape(0)),
                                         std::vector<double>(static_cast<size_t>(view.shape(1))));
  for (py::ssize_t u = 0; u < view.shape(0); ++u)
    for (py::ssize_t s = 0; s < view.shape(1); ++s) gains[u][s] = view(u, s);
  return gains;
}

py::dict assignment_to_dict(const cpss::Assignment& assignment) {
  py::dict matches;
  for (cpss::Band band : {cpss::Band::Dedicated, cpss::Band::Shared})
    for (const auto& [subcarrier, users] : assignment.band(band))
      matches[py::int_(subcarrier)] = users;
  py::dict out;
  out["matches"] = matches;
  out["unmatched"] = assignment.unmatched;
  return out;
}

py::dict row_to_dict(const cpss::MetricsRow& row) {
  py::dict d;
  d["method"] = row.method;
  d["sweep"] = row.sweep;
  d["sweep_value"] = row.sweep_value;
  d["snr_db"] = row.snr_db;
  d["mean_wsr"] = row.mean_wsr;
  d["std_error"] = row.std_error;
  d["samples"] = row.samples;
  d["mean_iters"] = row.mean_iters;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-cell co-primary spectrum sharing simulator";
  m.attr("__version__") = "1.0.0";

  m.def("count_feasible_groups", &cpss::count_feasible_groups, py::arg("users"),
        py::arg("capacity"),
        "Number of nonempty user groups of size <= capacity.");

  m.def(
      "draw_rayleigh",
      [](uint64_t seed, int rows, int cols) {
        cpss::RandomStream stream(seed);
        const cpss::ComplexMatrix h = cpss::draw_rayleigh(stream, rows, cols);
        py::array_t<std::complex<double>> out({rows, cols});
        std::memcpy(out.mutable_data(), h.data().data(),
                    sizeof(std::complex<double>) * h.data().size());
        return out;
      },
      py::arg("seed"), py::arg("rows"), py::arg("cols"),
      "Matrix of i.i.d. unit-variance complex Gaussian entries.");

  m.def(
      "assign",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& gains,
         int capacity, const std::string& method) {
        const std::vector<std::vector<double>> g = to_gains(gains);
        std::vector<int> users(g.size());
        for (size_t i = 0; i < users.size(); ++i) users[i] = static_cast<int>(i);
        std::vector<int> subcarriers(g.empty() ? 0 : g[0].size());
        for (size_t i = 0; i < subcarriers.size(); ++i) subcarriers[i] = static_cast<int>(i);

        if (parse_method(method) == cpss::AllocationMethod::GaleShapley) {
          cpss::GsStats stats;
          const cpss::Assignment out = cpss::gale_shapley(
              cpss::build_preferences_from_gains(g, users, subcarriers), capacity, &stats);
          py::dict d = assignment_to_dict(out);
          d["proposals"] = stats.proposals;
          return d;
        }
        return assignment_to_dict(cpss::transportation_assign(g, capacity));
      },
      py::arg("gains"), py::arg("capacity"), py::arg("method") = "gs",
      "Single-band assignment from a user-by-subcarrier gain matrix.");

  m.def(
      "run_sample",
      [](const std::string& config_json, uint64_t sample_index, const std::string& method) {
        const cpss::ScenarioConfig config = cpss::parse_config(config_json);
        const cpss::SampleResult result =
            cpss::run_sample(config, sample_index, parse_method(method));
        py::dict d;
        d["trace"] = result.trace;
        d["final_wsr"] = result.final_wsr;
        d["iterations"] = result.iterations;
        d["converged"] = result.converged;
        return d;
      },
      py::arg("config_json"), py::arg("sample_index") = 0, py::arg("method") = "gs",
      "One Monte Carlo sample of the full pipeline.");

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const cpss::ExperimentResult result =
            cpss::run_experiment(cpss::parse_config(config_json));
        py::list rows;
        for (const cpss::MetricsRow& row : result.table.rows) rows.append(row_to_dict(row));
        py::dict d;
        d["rows"] = rows;
        d["attempted"] = result.attempted;
        d["failed"] = result.failed;
        d["failures"] = result.failure_log;
        return d;
      },
      py::arg("config_json"), "Full experiment grid; returns aggregated rows.");

  m.def(
      "run_experiment_csv",
      [](const std::string& config_json) {
        const cpss::ExperimentResult result =
            cpss::run_experiment(cpss::parse_config(config_json));
        return cpss::render_csv(result.table);
      },
      py::arg("config_json"), "Full experiment rendered as the CSV the CLI writes.");
}
