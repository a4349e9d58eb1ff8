#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nhl/assumptions.hpp"
#include "nhl/config.hpp"
#include "nhl/effective.hpp"
#include "nhl/harness.hpp"
#include "nhl/parallel.hpp"

namespace {

enum Exit { kOk = 0, kSolverFailure = 1, kParseError = 2, kConfigError = 3 };

struct Invocation {
    std::string config;
    std::vector<std::string> overrides;
    std::string output;
    std::string dump_matrix;
    int verbosity = 1;

    // inline kernel flags for check-kernel
    std::optional<std::string> kernel;
    std::optional<double> alpha;
    std::optional<int> dim;
    std::optional<double> upsilon;
    std::optional<double> rate;
    std::vector<std::string> assumptions;
};

nhl::ExperimentConfig load(const Invocation& inv, bool validate = true)
{
    if (inv.config.empty()) throw nhl::ParseError("a configuration file is required");
    std::ifstream in(inv.config, std::ios::binary);
    if (!in) throw nhl::ParseError("cannot read configuration file '" + inv.config + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json doc = nhl::parse_toml(ss.str());
    nhl::apply_overrides(doc, inv.overrides);
    return nhl::config_from_json(doc, validate);
}

int check_kernel(const Invocation& inv)
{
    nhl::ExperimentConfig cfg;
    if (!inv.config.empty()) {
        cfg = load(inv, false);
    } else if (!inv.kernel && !inv.alpha) {
        throw nhl::ParseError("check-kernel needs a configuration file or --kernel/--alpha flags");
    }
    if (inv.kernel) cfg.kernel.type = *inv.kernel;
    if (inv.alpha) cfg.kernel.alpha = *inv.alpha;
    if (inv.dim) cfg.dim = *inv.dim;
    if (inv.upsilon) cfg.kernel.upsilon = *inv.upsilon;
    if (inv.rate) cfg.kernel.rate = *inv.rate;
    nhl::check_kernel_parameters(cfg.dim, cfg.kernel.alpha);
    const nhl::Kernel k = nhl::make_kernel(cfg);

    std::vector<nhl::Assumption> kinds;
    for (const auto& a : inv.assumptions) kinds.push_back(nhl::assumption_from_string(a));
    if (kinds.empty()) {
        if (k.family() == nhl::KernelFamily::Convolution)
            kinds = {nhl::Assumption::A1_symmetry, nhl::Assumption::A2_levy_khintchine, nhl::Assumption::A3_tail,
                     nhl::Assumption::A4_coercivity};
        else
            kinds = {nhl::Assumption::B1_symmetry, nhl::Assumption::B2_tail, nhl::Assumption::B3_lower_density};
    }

    fmt::print("kernel {} (d = {}, alpha = {})\n", nhl::to_string(k.builtin()), k.dim(), k.alpha());
    bool all = true;
    nhl::ProbeConfig probe;
    for (auto kind : kinds) {
        nhl::AssumptionReport r = nhl::verify_assumption(k, kind, probe);
        all = all && r.passed;
        fmt::print("{:<20} {}  witness = {:.6g}", nhl::to_string(kind), r.passed ? "PASS" : "FAIL", r.witness_constant);
        if (std::isfinite(r.worst_radius)) fmt::print("  at r = {:.6g}", r.worst_radius);
        if (!r.detail.empty()) fmt::print("  ({})", r.detail);
        fmt::print("\n");
    }
    fmt::print("{}\n", all ? "all checked assumptions hold" : "some assumptions fail");
    return kOk;
}

int effective_coeff(const Invocation& inv)
{
    nhl::ExperimentConfig cfg = load(inv);
    const nhl::CoefficientField field = nhl::make_field(cfg, cfg.epsilons.front());
    const nhl::EffectiveCoefficient e = nhl::effective_coefficient(field, nhl::make_effective_quadrature(cfg));
    if (e.kind == nhl::EffectiveCoefficient::Kind::ConstantScalar) {
        fmt::print("{:.6f}\n", e.value);
    } else {
        const double L = cfg.box_halfwidth;
        const int nodes = 5;
        fmt::print("# effective coefficient on x_1 (rows) by y_1 (columns); other coordinates 0\n");
        fmt::print("{:>10}", "");
        for (int j = 0; j < nodes; ++j) fmt::print(" {:>10.4f}", -L + 2.0 * L * j / (nodes - 1));
        fmt::print("\n");
        for (int i = 0; i < nodes; ++i) {
            double x = -L + 2.0 * L * i / (nodes - 1);
            fmt::print("{:>10.4f}", x);
            for (int j = 0; j < nodes; ++j) {
                double y = -L + 2.0 * L * j / (nodes - 1);
                fmt::print(" {:>10.6f}", e(nhl::Point{x, 0.0}, nhl::Point{y, 0.0}));
            }
            fmt::print("\n");
        }
    }
    if (e.mc_stderr) fmt::print("# Monte Carlo standard error {:.3g}\n", *e.mc_stderr);
    return kOk;
}

void dump_matrix(const nhl::ExperimentConfig& cfg, const std::string& path)
{
    const nhl::Grid grid(cfg.dim, cfg.box_halfwidth, cfg.n);
    const int threads = cfg.threads > 0 ? cfg.threads : nhl::default_thread_count();
    nhl::KernelTable table(grid, nhl::make_kernel(cfg), cfg.tail, threads, cfg.coeff_subsamples);
    nhl::CoefficientField field = nhl::make_field(cfg, cfg.epsilons.front());
    if (field.is_random()) field = nhl::draw_realization(field, cfg.seeds.front());
    const nhl::AssembledSystem sys =
        nhl::assemble_system(table, nhl::CellWeights::from_field(grid, field, cfg.coeff_subsamples), cfg.m,
                             nhl::project(grid, nhl::make_rhs(cfg)), nhl::AssemblyOptions{threads, cfg.coeff_subsamples});
    nhl::write_matrix(path, sys.A);
}

int sweep(const Invocation& inv, bool single, bool nonlinear)
{
    nhl::ExperimentConfig cfg = load(inv);
    if (nonlinear) {
        cfg.mode = nhl::SweepMode::Nonlinear;
        cfg.validate();
    }
    if (single) {
        cfg.epsilons.resize(1);
        if (cfg.seeds.size() > 1) cfg.seeds.resize(1);
    }
    if (!inv.dump_matrix.empty()) dump_matrix(cfg, inv.dump_matrix);

    std::string out_path = inv.output.empty() ? cfg.output : inv.output;
    nhl::SweepOptions opt;
    if (inv.verbosity > 1)
        opt.on_record = [](const nhl::SweepRecord& r) {
            fmt::print(stderr, "epsilon {:g}{}: l2_error {:.6e}, {} iterations\n", r.epsilon,
                       r.seed ? fmt::format(" seed {}", *r.seed) : std::string(), r.l2_error, r.iterations);
        };
    nhl::SweepResult res = nhl::run_sweep(cfg, opt);
    if (out_path.empty())
        nhl::write_csv(std::cout, res, cfg.reproducible);
    else
        nhl::write_csv(out_path, res, cfg.reproducible);
    if (inv.verbosity > 0)
        for (const auto& note : res.notes)
            if (note.rfind("warning", 0) != 0) fmt::print(stderr, "note: {}\n", note);
    if (!res.complete) {
        fmt::print(stderr, "error: {}\n", res.error);
        return kSolverFailure;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Nonlocal homogenization laboratory"};
    app.require_subcommand(1);
    Invocation inv;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("config", inv.config, "experiment file (TOML)");
        if (config_required) c->required();
        sub->add_option("--set", inv.overrides, "override a key, e.g. --set kernel.alpha=0.4")->take_all();
        sub->add_flag_callback("-v,--verbose", [&] { inv.verbosity = 2; }, "progress output on stderr");
        sub->add_flag_callback("-q,--quiet", [&] { inv.verbosity = 0; }, "suppress notes");
    };

    auto* ck = app.add_subcommand("check-kernel", "report the structural kernel assumptions");
    add_common(ck, false);
    ck->add_option("--kernel", inv.kernel, "fractional, perturbed_fractional or tempered");
    ck->add_option("--alpha", inv.alpha, "kernel order in (0, 2)");
    ck->add_option("--dim", inv.dim, "dimension (1 or 2)");
    ck->add_option("--upsilon", inv.upsilon, "perturbation strength");
    ck->add_option("--rate", inv.rate, "tempering rate");
    ck->add_option("--assumption", inv.assumptions, "assumption to check (repeatable)");

    auto* ec = app.add_subcommand("effective-coeff", "print the homogenized coefficient");
    add_common(ec, true);

    auto* sv = app.add_subcommand("solve", "one epsilon (and seed); single-record CSV");
    auto* sw = app.add_subcommand("sweep", "epsilon sweep; CSV");
    auto* nl = app.add_subcommand("nonlinear-sweep", "epsilon sweep of the convex functional; CSV");
    for (auto* sub : {sv, sw, nl}) {
        add_common(sub, true);
        sub->add_option("-o,--output", inv.output, "CSV path (default: sweep.output or stdout)");
        sub->add_option("--dump-matrix", inv.dump_matrix, "write the first stiffness matrix as text");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kParseError;
    }

    try {
        if (*ck) return check_kernel(inv);
        if (*ec) return effective_coeff(inv);
        if (*sv) return sweep(inv, true, false);
        if (*sw) return sweep(inv, false, false);
        if (*nl) return sweep(inv, false, true);
    } catch (const nhl::ParseError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kParseError;
    } catch (const nhl::ConfigError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kConfigError;
    } catch (const nhl::QuadratureError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kSolverFailure;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kSolverFailure;
    }
    return kOk;
}
