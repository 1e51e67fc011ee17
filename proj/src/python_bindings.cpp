#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "boltzlab/harness.hpp"
#include "boltzlab/ode_bounds.hpp"

namespace py = pybind11;
using namespace boltzlab;

namespace {

Config config_from(const std::string& text, const py::dict& overrides) {
    Config cfg = Config::parse_text(text);
    for (auto item : overrides)
        cfg.set(py::cast<std::string>(item.first), py::cast<std::string>(py::str(item.second)));
    return cfg;
}

py::dict report_to_dict(const RunReport& rep) {
    py::dict out;
    out["all_pass"] = rep.all_pass;
    py::list assertions;
    for (const auto& a : rep.assertions) {
        py::dict d;
        d["name"] = a.name;
        d["pass"] = a.pass;
        d["tolerance"] = a.tolerance;
        d["slack"] = a.slack;
        d["note"] = a.note;
        assertions.append(d);
    }
    out["assertions"] = assertions;
    out["files"] = rep.files;
    out["text"] = rep.text;
    out["a"] = rep.a;
    out["T"] = rep.T;
    out["C"] = rep.C;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "moment bounds and particle simulation for the homogeneous Boltzmann "
              "equation with hard-potential cutoff kernels";

    py::register_exception<ConfigError>(m, "ConfigError");

    m.def(
        "run_experiment",
        [](const std::string& config_text, const std::string& mode, const std::string& out_dir,
           const py::dict& overrides) {
            return report_to_dict(run_experiment(config_from(config_text, overrides), mode,
                                                 out_dir));
        },
        py::arg("config_text"), py::arg("mode"), py::arg("out_dir"),
        py::arg("overrides") = py::dict(),
        "Run one experiment mode (gamma, bounds, simulate, verify, creation, propagation); "
        "writes CSV artifacts and report.txt into out_dir.");

    m.def(
        "gamma",
        [](const std::vector<double>& orders, double beta, int dimension,
           const std::string& angular, long budget) {
            Config cfg;
            cfg.set("kernel.beta", std::to_string(beta));
            cfg.set("kernel.dimension", std::to_string(dimension));
            cfg.set("kernel.angular", angular);
            auto k = kernel_from_config(cfg);
            auto table = gamma_table(k, orders, budget);
            py::dict out;
            out["orders"] = table.orders();
            out["gamma"] = table.gamma();
            out["method"] = table.method();
            return out;
        },
        py::arg("orders"), py::arg("beta") = 1.0, py::arg("dimension") = 3,
        py::arg("angular") = "constant", py::arg("budget") = 4096,
        "Sharp angular-averaging constants gamma_p at the given orders.");

    m.def(
        "simulate",
        [](const std::string& config_text, const py::dict& overrides) {
            Config cfg = config_from(config_text, overrides);
            auto k = kernel_from_config(cfg);
            auto init = initial_from_config(cfg);
            auto rc = run_from_config(cfg);
            auto result = run(rc, k, init);
            py::dict out;
            py::list times, moments, stderrs, energy_drift;
            for (const auto& pt : result.points) {
                times.append(pt.time);
                moments.append(pt.moments.m);
                stderrs.append(pt.moments.stderr_m);
                energy_drift.append(pt.conservation.energy_rel_drift);
            }
            out["times"] = times;
            out["moments"] = moments;
            out["stderr"] = stderrs;
            out["energy_rel_drift"] = energy_drift;
            out["total_collisions"] = result.total_collisions;
            return out;
        },
        py::arg("config_text"), py::arg("overrides") = py::dict(),
        "Nanbu-Babovsky particle run; returns per-time moment estimates.");

    m.def(
        "emit_plots", [](const std::string& dir) { return emit_plots(dir); }, py::arg("dir"),
        "Render SVG plots from the CSV files in dir; returns the files written.");

    m.def(
        "verify",
        [](std::uint64_t seed, int sequences, int binomial_trials, int kernel_trials) {
            bool ok = true;
            for (const auto& a : verify_convolution_suite(seed, sequences, 30)) ok &= a.pass;
            for (const auto& a : verify_binomial_suite(seed, binomial_trials)) ok &= a.pass;
            for (const auto& a : verify_kernel_inequalities(seed, kernel_trials)) ok &= a.pass;
            return ok;
        },
        py::arg("seed") = 1, py::arg("sequences") = 200, py::arg("binomial_trials") = 2000,
        py::arg("kernel_trials") = 20000,
        "Deterministic inequality audits; returns True when every suite passes.");
}
