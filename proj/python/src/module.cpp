#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "fpt/boundary.hpp"
#include "fpt/cli.hpp"
#include "fpt/error.hpp"
#include "fpt/kernels.hpp"
#include "fpt/montecarlo.hpp"
#include "fpt/quadrature.hpp"
#include "fpt/validation.hpp"

namespace py = pybind11;
using namespace fpt;

namespace {

VPolicy policy_from(const std::string& mode) {
    if (mode == "limit") return VPolicy::epsilon_limit;
    if (mode == "auto") return VPolicy::exact_when_linear;
    throw ConfigError("v_mode must be 'limit' or 'auto'");
}

McParams mc_from(std::size_t n_paths, std::size_t steps, std::uint64_t seed, bool antithetic) {
    McParams p;
    p.n_paths = n_paths;
    p.steps = steps;
    p.seed = seed;
    p.antithetic = antithetic;
    return p;
}

py::dict curve_dict(const DensityCurve& c) {
    std::vector<std::string> status;
    std::vector<std::string> verdict;
    for (std::size_t i = 0; i < c.size(); ++i) {
        status.push_back(to_string(c.status[i]));
        verdict.push_back(c.diagnostics[i] ? to_string(c.diagnostics[i]->verdict) : "");
    }
    py::dict d;
    d["s"] = c.s;
    d["value"] = c.value;
    d["std_error"] = c.std_error;
    d["status"] = status;
    d["v"] = c.v;
    d["limit_verdict"] = verdict;
    return d;
}

py::dict estimate_dict(const McEstimate& e) {
    py::dict d;
    d["mean"] = e.mean;
    d["std_error"] = e.std_error;
    d["n_paths"] = e.n_paths;
    d["n_steps"] = e.n_steps;
    d["seed"] = e.seed;
    d["wall_seconds"] = e.wall_seconds;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "First-passage densities of Brownian motion to convex moving boundaries.";

    auto base = py::register_exception<Error>(m, "FptError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<BoundaryValidationError>(m, "BoundaryValidationError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<QuadratureError>(m, "QuadratureError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<Boundary>(m, "Boundary")
        .def_property_readonly("expression", [](const Boundary& b) { return b.expr().to_string(); })
        .def_property_readonly("initial_level", &Boundary::initial_level)
        .def_property_readonly("is_linear", &Boundary::is_linear)
        .def("f", &Boundary::f, py::arg("t"))
        .def("df", &Boundary::df, py::arg("t"))
        .def("d2f", &Boundary::d2f, py::arg("t"))
        .def("__repr__", [](const Boundary& b) { return "Boundary(" + b.expr().to_string() + ")"; });

    m.def("make_boundary", &make_boundary, py::arg("text"), py::arg("t_max") = 10.0,
          "Parse, differentiate and validate a boundary on a uniform grid over [0, t_max].");

    py::class_<QuadratureSpec>(m, "QuadratureSpec")
        .def(py::init<>())
        .def_readwrite("abs_tol", &QuadratureSpec::abs_tol)
        .def_readwrite("max_panels", &QuadratureSpec::max_panels)
        .def_readwrite("truncation_sigmas", &QuadratureSpec::truncation_sigmas)
        .def_readwrite("eps0", &QuadratureSpec::eps0)
        .def_readwrite("eps_ratio", &QuadratureSpec::eps_ratio)
        .def_readwrite("eps_terms", &QuadratureSpec::eps_terms);

    m.def("level_density", &level_density, py::arg("a"), py::arg("t"));
    m.def("heat_image_kernel", &heat_image_kernel, py::arg("t"), py::arg("y"), py::arg("tau"), py::arg("z"));
    m.def(
        "kernel_H",
        [](const Boundary& bd, double t, double a, double tau, double b) { return kernel_H({t, a, tau, b, tau}, bd); },
        py::arg("boundary"), py::arg("t"), py::arg("a"), py::arg("tau"), py::arg("b"));
    m.def(
        "green_G",
        [](const Boundary& bd, double t, double a, double tau, double b, double s) {
            return green_G({t, a, tau, b, s}, bd);
        },
        py::arg("boundary"), py::arg("t"), py::arg("a"), py::arg("tau"), py::arg("b"), py::arg("s"));
    m.def("girsanov_prefactor", &girsanov_prefactor, py::arg("boundary"), py::arg("s"));
    m.def(
        "chain_reconstruction_check",
        [](const Boundary& bd, double t, double a, double tau, double b, double s, double c) {
            return chain_reconstruction_check({t, a, tau, b, s}, bd, c);
        },
        py::arg("boundary"), py::arg("t"), py::arg("a"), py::arg("tau"), py::arg("b"), py::arg("s"),
        py::arg("c") = 1.0);

    m.def(
        "fpt_density",
        [](const Boundary& bd, const std::vector<double>& s_grid, const QuadratureSpec& spec,
           const std::string& v_mode) {
            DensityCurve c;
            {
                py::gil_scoped_release release;
                c = fpt_density(s_grid, bd, spec, policy_from(v_mode));
            }
            return curve_dict(c);
        },
        py::arg("boundary"), py::arg("s_grid"), py::arg("spec") = QuadratureSpec{}, py::arg("v_mode") = "limit");
    m.def(
        "fpt_cdf",
        [](const Boundary& bd, double t_max, const QuadratureSpec& spec, const std::string& v_mode) {
            CdfResult r;
            {
                py::gil_scoped_release release;
                r = fpt_cdf(t_max, bd, spec, policy_from(v_mode));
            }
            py::dict d;
            d["value"] = r.value;
            d["error"] = r.error;
            d["ok"] = r.ok;
            d["message"] = r.message;
            return d;
        },
        py::arg("boundary"), py::arg("t_max"), py::arg("spec") = QuadratureSpec{}, py::arg("v_mode") = "limit");

    m.def(
        "bridge_functional_estimate",
        [](const Boundary& bd, double s, std::size_t n_paths, std::size_t steps, std::uint64_t seed, bool antithetic) {
            McEstimate e;
            {
                py::gil_scoped_release release;
                e = bridge_functional_estimate(bd, s, mc_from(n_paths, steps, seed, antithetic));
            }
            return estimate_dict(e);
        },
        py::arg("boundary"), py::arg("s"), py::arg("n_paths"), py::arg("steps"), py::arg("seed"),
        py::arg("antithetic") = true);
    m.def(
        "girsanov_density_curve",
        [](const Boundary& bd, const std::vector<double>& s_grid, std::size_t n_paths, std::size_t steps,
           std::uint64_t seed) {
            DensityCurve c;
            {
                py::gil_scoped_release release;
                c = girsanov_density_curve(bd, s_grid, mc_from(n_paths, steps, seed, true));
            }
            return curve_dict(c);
        },
        py::arg("boundary"), py::arg("s_grid"), py::arg("n_paths"), py::arg("steps"), py::arg("seed"));
    m.def(
        "direct_hitting_density",
        [](const Boundary& bd, const std::vector<double>& s_grid, std::size_t n_paths, std::size_t steps,
           std::uint64_t seed) {
            DirectHittingResult r;
            {
                py::gil_scoped_release release;
                r = direct_hitting_density(bd, s_grid, mc_from(n_paths, steps, seed, true));
            }
            py::dict d = curve_dict(r.density);
            d["cdf"] = r.cdf;
            d["cdf_std_error"] = r.cdf_std_error;
            d["hit_fraction"] = r.hit_fraction;
            d["hit_std_error"] = r.hit_std_error;
            d["histogram"] = r.histogram;
            d["bin_width"] = r.bin_width;
            return d;
        },
        py::arg("boundary"), py::arg("s_grid"), py::arg("n_paths"), py::arg("steps"), py::arg("seed"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<std::string> full = {"fpt"};
            full.insert(full.end(), args.begin(), args.end());
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run_cli(full, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the fpt command line; returns (exit_code, stdout, stderr).");
}
