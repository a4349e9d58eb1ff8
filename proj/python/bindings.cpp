#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nhl/assumptions.hpp"
#include "nhl/config.hpp"
#include "nhl/harness.hpp"

namespace py = pybind11;
using namespace nhl;

namespace {

py::dict record_to_dict(const SweepRecord& r)
{
    py::dict d;
    d["epsilon"] = r.epsilon;
    d["seed"] = r.seed ? py::cast(*r.seed) : py::none();
    d["l2_error"] = r.l2_error;
    d["seminorm_error"] = r.seminorm_error;
    d["energy_eps"] = r.energy_eps;
    d["energy_hom"] = r.energy_hom;
    d["weak_gaps"] = r.weak_gaps;
    d["iterations"] = r.iterations;
    d["runtime_ms"] = r.runtime_ms;
    d["u_nu_norm"] = r.u_nu_norm;
    d["f_nu_bound"] = r.f_nu_bound;
    d["converged"] = r.converged;
    return d;
}

AssembledSystem assemble_for(const ExperimentConfig& cfg, double epsilon, std::optional<std::uint64_t> seed)
{
    const Grid grid(cfg.dim, cfg.box_halfwidth, cfg.n);
    CoefficientField field = make_field(cfg, epsilon);
    if (field.is_random()) {
        if (!seed) throw ConfigError("sweep.seeds", "random structures need a seed");
        field = draw_realization(field, *seed);
    }
    return assemble_system(grid, make_kernel(cfg), field, cfg.m, project(grid, make_rhs(cfg)), cfg.tail,
                           AssemblyOptions{cfg.threads, cfg.coeff_subsamples});
}

}  // namespace

PYBIND11_MODULE(_nhl, m)
{
    m.doc() = "Nonlocal homogenization laboratory";

    auto base = py::register_exception<Error>(m, "NhlError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    py::class_<ExperimentConfig>(m, "Config")
        .def_readwrite("n", &ExperimentConfig::n)
        .def_readwrite("dim", &ExperimentConfig::dim)
        .def_readwrite("box_halfwidth", &ExperimentConfig::box_halfwidth)
        .def_readwrite("m", &ExperimentConfig::m)
        .def_readwrite("epsilons", &ExperimentConfig::epsilons)
        .def_readwrite("seeds", &ExperimentConfig::seeds)
        .def_readwrite("threads", &ExperimentConfig::threads)
        .def_readwrite("reproducible", &ExperimentConfig::reproducible)
        .def("validate", &ExperimentConfig::validate)
        .def("to_toml", [](const ExperimentConfig& c) { return config_to_toml(c); })
        .def("to_json", [](const ExperimentConfig& c) { return config_to_json(c).dump(); })
        .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; });

    m.def("load_config", &parse_config, py::arg("path"), py::arg("overrides") = std::vector<std::string>{},
          "Read, override and validate an experiment file.");
    m.def("config_from_toml", &parse_config_text, py::arg("text"),
          py::arg("overrides") = std::vector<std::string>{});

    py::class_<SweepResult>(m, "SweepResult")
        .def_property_readonly("records",
                               [](const SweepResult& r) {
                                   py::list out;
                                   for (const auto& rec : r.records) out.append(record_to_dict(rec));
                                   return out;
                               })
        .def_readonly("complete", &SweepResult::complete)
        .def_readonly("error", &SweepResult::error)
        .def_readonly("u_hom", &SweepResult::u_hom)
        .def_readonly("notes", &SweepResult::notes)
        .def("to_csv", [](const SweepResult& r, bool reproducible) {
            std::ostringstream out;
            write_csv(out, r, reproducible);
            return out.str();
        }, py::arg("reproducible") = true);

    m.def("run_sweep", [](const ExperimentConfig& cfg) {
        py::gil_scoped_release release;
        return run_sweep(cfg);
    });

    m.def("effective_coefficient", [](const ExperimentConfig& cfg) {
        EffectiveCoefficient e = effective_coefficient(make_field(cfg, cfg.epsilons.front()),
                                                       make_effective_quadrature(cfg));
        py::dict d;
        d["constant"] = e.kind == EffectiveCoefficient::Kind::ConstantScalar;
        d["value"] = e.value;
        d["mc_stderr"] = e.mc_stderr ? py::cast(*e.mc_stderr) : py::none();
        return d;
    });

    m.def(
        "assemble",
        [](const ExperimentConfig& cfg, double epsilon, std::optional<std::uint64_t> seed) {
            AssembledSystem s = assemble_for(cfg, epsilon, seed);
            return py::make_tuple(s.A, s.M, s.b);
        },
        py::arg("config"), py::arg("epsilon"), py::arg("seed") = py::none(),
        "Form matrix A, diagonal mass M and load b of one problem instance.");

    m.def(
        "check_kernel",
        [](const std::string& type, double alpha, int dim, double upsilon, double rate) {
            ExperimentConfig cfg;
            cfg.dim = dim;
            cfg.kernel.type = type;
            cfg.kernel.alpha = alpha;
            cfg.kernel.upsilon = upsilon;
            cfg.kernel.rate = rate;
            Kernel k = make_kernel(cfg);
            py::dict out;
            for (auto kind : {Assumption::A1_symmetry, Assumption::A2_levy_khintchine, Assumption::A3_tail,
                              Assumption::A4_coercivity}) {
                AssumptionReport r = verify_assumption(k, kind, ProbeConfig{});
                out[py::str(to_string(kind))] = py::make_tuple(r.passed, r.witness_constant);
            }
            return out;
        },
        py::arg("type") = "fractional", py::arg("alpha") = 0.5, py::arg("dim") = 1, py::arg("upsilon") = 2.0,
        py::arg("rate") = 1.0, "Assumption name -> (passed, witness).");

    m.def(
        "gagliardo_seminorm_sq",
        [](int dim, double half_width, const Eigen::VectorXd& values, double alpha) {
            int n = dim == 1 ? static_cast<int>(values.size())
                             : static_cast<int>(std::lround(std::sqrt(double(values.size()))));
            Grid g(dim, half_width, n);
            return gagliardo_seminorm_sq(g, GridFunction(g, values), alpha, TailPolicy{});
        },
        py::arg("dim"), py::arg("half_width"), py::arg("values"), py::arg("alpha"));

    m.def("fit_rate", [](const std::vector<double>& eps, const std::vector<double>& err) {
        RateFit f = fit_rate(eps, err);
        return py::make_tuple(f.slope, f.intercept, f.residual);
    });

    m.attr("CSV_HEADER") = kCsvHeader;
}
