#include "evtlab/config.hpp"
#include "evtlab/report.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace evtlab;

namespace {

std::string run(const std::string& command, const std::string& config, const std::string& name,
                std::optional<std::uint64_t> seed, std::optional<std::uint64_t> orbits,
                std::optional<std::string> levels, std::optional<std::size_t> k_max,
                std::optional<std::string> out_dir) {
    py::gil_scoped_release release;
    ExperimentConfig cfg = parse_config(config, name);
    if (seed) cfg.plan.seed = *seed;
    if (orbits) cfg.plan.orbits = *orbits;
    if (k_max) {
        cfg.k_max = *k_max;
        cfg.oracle_k = *k_max;
    }
    if (levels) {
        cfg.oracle_levels = parse_levels(*levels);
        cfg.tail_levels = cfg.oracle_levels;
    }
    CommandOutput out = run_command(command, cfg);
    if (out_dir) write_outputs(out, *out_dir);
    return out.report.dump();
}

std::string threshold(const std::string& config, const std::string& n, const std::string& tau) {
    ExperimentConfig cfg = parse_config(config);
    Real u = solve_threshold(cfg.spec, Position::parse(n).real(), Position::parse(tau).real());
    return to_decimal(u);
}

}  // namespace

PYBIND11_MODULE(_evtlab, m) {
    m.doc() = "extremal index and cluster statistics for piecewise expanding maps";

    auto base = py::register_exception<Error>(m, "EvtlabError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<IndeterminateError>(m, "IndeterminateError", base.ptr());
    py::register_exception<ResourceError>(m, "ResourceError", base.ptr());
    py::register_exception<RegimeError>(m, "RegimeError", base.ptr());

    m.def("run", &run, py::arg("command"), py::arg("config"), py::arg("name") = "<string>",
          py::arg("seed") = py::none(), py::arg("orbits") = py::none(), py::arg("levels") = py::none(),
          py::arg("k_max") = py::none(), py::arg("out_dir") = py::none(),
          "Run a command on TOML config text and return the JSON report.");
    m.def("solve_threshold", &threshold, py::arg("config"), py::arg("n"), py::arg("tau"),
          "Level u with n * mu(phi > u) = tau, as a decimal string.");
    m.def("config_hash", [](const std::string& text) { return hex64(fnv1a(text)); }, py::arg("text"));
}
