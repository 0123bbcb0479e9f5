// Python bindings. Results come back as dicts; base laws are given by their
// command-line strings ("rademacher", "uniform:w=1", "atoms:0:0.5,1:0.5", ...).

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "roskit/cli.hpp"
#include "roskit/constants.hpp"
#include "roskit/cpoisson.hpp"
#include "roskit/logconcave.hpp"
#include "roskit/specfun.hpp"

namespace py = pybind11;
using namespace roskit;

namespace {

py::dict to_dict(const ConstantResult& r) {
    py::dict d;
    d["value"] = r.value;
    d["method"] = r.method;
    d["error_bound"] = r.error_bound;
    d["diagnostics"] = r.diagnostics;
    return d;
}

SeriesPath parse_path(const std::string& s) {
    if (s == "auto") return SeriesPath::automatic;
    if (s == "grid") return SeriesPath::grid;
    if (s == "cumulant") return SeriesPath::cumulant;
    if (s == "mc") return SeriesPath::monte_carlo;
    throw std::invalid_argument("unknown path: " + s);
}

SupOptions options(const std::string& path) {
    SupOptions o;
    o.path = parse_path(path);
    return o;
}

py::dict match(const std::string& family, double p, double a, double b) {
    const MatchTarget t{p, a, b};
    py::dict d;
    if (family == "fminus") {
        const auto f = match_density_minus(t);
        d["alpha"] = f.alpha;
        d["gamma"] = f.gamma;
        d["form"] = to_string(f.form());
    } else if (family == "fplus") {
        const auto f = match_density_plus(t);
        d["alpha"] = f.alpha;
        d["gamma"] = f.gamma;
        d["form"] = to_string(f.form());
    } else if (family == "gminus") {
        const auto g = match_tail_minus(t);
        d["a"] = g.a;
        d["b"] = g.b;
        d["form"] = to_string(g.form());
    } else if (family == "gplus") {
        const auto g = match_tail_plus(t);
        d["a"] = g.a;
        d["b"] = g.b;
        d["form"] = to_string(g.form());
    } else {
        throw std::invalid_argument("unknown family: " + family);
    }
    return d;
}

py::tuple run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> full{"roskit"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : full) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code;
    try {
        const auto config = cli::parse_args(static_cast<int>(argv.size()), argv.data());
        py::gil_scoped_release release;
        code = cli::run(config, out, err);
    } catch (const cli::HelpRequested& h) {
        out << h.what();
        code = 0;
    } catch (const cli::UsageError& e) {
        err << e.what() << '\n';
        code = 2;
    }
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_roskit, m) {
    m.doc() = "Sharp Rosenthal-type constants and extremal checks";

    m.def("rosenthal_constant", [](double p, double tol) { return to_dict(rosenthal_constant_symmetric(p, tol)); },
          py::arg("p"), py::arg("tol") = 1e-9);
    m.def(
        "mixture_sup",
        [](double p, const std::string& V, double A, double B, double tol, const std::string& path) {
            const auto base = BaseDistribution::parse(V);
            ConstantResult r;
            {
                py::gil_scoped_release release;
                r = mixture_sup(p, base, A, B, tol, options(path));
            }
            return to_dict(r);
        },
        py::arg("p"), py::arg("V") = "rademacher", py::arg("A") = 1.0, py::arg("B") = 1.0, py::arg("tol") = 1e-9,
        py::arg("path") = "auto");
    m.def("positive_sum_sup", [](double p, double A, double B, double tol) { return to_dict(positive_sum_sup(p, A, B, tol)); },
          py::arg("p"), py::arg("A") = 1.0, py::arg("B") = 1.0, py::arg("tol") = 1e-9);
    m.def(
        "complex_constant",
        [](double p, double tol, const std::string& path) {
            ConstantResult r;
            {
                py::gil_scoped_release release;
                r = complex_constant(p, tol, options(path));
            }
            return to_dict(r);
        },
        py::arg("p"), py::arg("tol") = 1e-6, py::arg("path") = "auto");
    m.def("gaussian_abs_moment", &specfun::gaussian_abs_moment, py::arg("r"));
    m.def("feasibility_interval", [](double p, bool tail) {
        return tail ? feasibility_interval_tail(p) : feasibility_interval_density(p);
    }, py::arg("p"), py::arg("tail") = false);
    m.def("match", &match, py::arg("family"), py::arg("p"), py::arg("a"), py::arg("b"));
    m.def("run_cli", &run_cli, py::arg("args"),
          "Runs the command line in process; returns (exit code, stdout, stderr).");
}
