#include "nhl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "nhl/parallel.hpp"

namespace nhl {

namespace {

bool is_integer_ratio(double r)
{
    double k = std::round(r);
    return k >= 1.0 && std::abs(r - k) <= 1e-9 * std::max(1.0, r);
}

CellFunction make_cell(const CellSpec& s, const std::string& key)
{
    const auto& p = s.params;
    auto need = [&](std::size_t lo, std::size_t hi) {
        if (p.size() < lo || p.size() > hi)
            throw ConfigError(key + ".params", "'" + s.type + "' expects " + std::to_string(lo) +
                                                   (lo == hi ? "" : "-" + std::to_string(hi)) + " parameters");
    };
    try {
        if (s.type == "constant") {
            need(1, 1);
            return CellFunction::constant(p[0]);
        }
        if (s.type == "two_phase") {
            need(3, 3);
            return CellFunction::two_phase(p[0], p[1], p[2]);
        }
        if (s.type == "cosine") {
            need(2, 3);
            return CellFunction::cosine(p[0], p[1], p.size() == 3 ? static_cast<int>(p[2]) : 0);
        }
    } catch (const ConfigError& e) {
        if (e.key() == "coeff") throw ConfigError(key + ".params", e.what());
        throw;
    }
    throw ConfigError(key + ".type", "unknown cell function '" + s.type + "'");
}

SymmetricCoefficient make_symmetric(const CoeffSpec& c)
{
    const auto& s = c.symmetric;
    const auto& p = s.params;
    const std::string key = "coeff.symmetric";
    auto need = [&](std::size_t lo, std::size_t hi) {
        if (p.size() < lo || p.size() > hi)
            throw ConfigError(key + ".params", "'" + s.type + "' has the wrong number of parameters");
    };
    if (s.type == "separable_cosine") {
        need(2, 3);
        return SymmetricCoefficient::separable_cosine(p[0], p[1], p.size() == 3 ? static_cast<int>(p[2]) : 0);
    }
    if (s.type == "slow_separable") {
        need(3, 3);
        return SymmetricCoefficient::slow_separable(p[0], p[1], p[2]);
    }
    if (s.type == "symmetrized_pair")
        return SymmetricCoefficient::symmetrized_pair(make_cell(c.lambda, "coeff.lambda"), make_cell(c.mu, "coeff.mu"));
    throw ConfigError(key + ".type", "unknown symmetric coefficient '" + s.type + "'");
}

Point to_point_checked(const std::vector<double>& v, int dim, const std::string& key)
{
    if (static_cast<int>(v.size()) != dim) throw ConfigError(key, "expected " + std::to_string(dim) + " coordinates");
    Point p{0.0, 0.0};
    for (int k = 0; k < dim; ++k) p[k] = v[k];
    return p;
}

struct Solve {
    Eigen::VectorXd u;
    int iterations = 0;
    bool converged = false;
    double energy = 0.0;
    std::string failure;
};

Solve solve(const AssembledSystem& sys, const ExperimentConfig& cfg, const SolverOptions& sopt)
{
    Solve s;
    if (cfg.mode == SweepMode::Linear) {
        LinearSolveReport r = solve_linear(sys, cfg.solver_tol, cfg.solver_max_iter, sopt);
        s.u = r.solution;
        s.iterations = r.iterations;
        s.converged = r.converged;
        if (!r.converged) s.failure = "conjugate gradients did not reach solver.tol";
        s.energy = s.u.dot(sys.A * s.u) + sys.m * s.u.dot(sys.M.cwiseProduct(s.u)) - 2.0 * sys.b.dot(s.u);
    } else {
        NonlinearSolveReport r = minimize_functional(sys, cfg.phi, Eigen::VectorXd::Zero(sys.b.size()),
                                                     cfg.nonlinear_tol, cfg.nonlinear_max_iter, sopt);
        s.u = r.solution;
        s.iterations = r.iterations;
        s.converged = r.converged;
        s.failure = r.failure;
        s.energy = 2.0 * r.objective;
    }
    return s;
}

// (sum_{i != j} I_ij |v_i - v_j|^p + 2 sum_i e_i |v_i|^p)^{1/p} from a unit-coefficient system
double gagliardo_p(const AssembledSystem& unit, const Eigen::VectorXd& v, double p)
{
    if (p == 2.0) return std::sqrt(std::max(0.0, gagliardo_seminorm_sq(unit, v)));
    const Eigen::Index N = v.size();
    double s = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) s += -2.0 * unit.A(i, j) * std::pow(std::abs(v[i] - v[j]), p);
        s += 2.0 * unit.exterior[j] * std::pow(std::abs(v[j]), p);
    }
    return std::pow(s, 1.0 / p);
}

double lp_norm(const Eigen::VectorXd& v, double p, double vol)
{
    if (p == 2.0) return std::sqrt(vol * v.squaredNorm());
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x), p);
    return std::pow(vol * s, 1.0 / p);
}

}  // namespace

// -------------------------------------------------------------------------------------------------

void ExperimentConfig::validate() const
{
    if (dim != 1 && dim != 2) throw ConfigError("grid.dim", "dimension must be 1 or 2");
    if (n < 1) throw ConfigError("grid.n", "grid needs at least one cell per axis");
    if (!(box_halfwidth > 0.0) || !std::isfinite(box_halfwidth))
        throw ConfigError("grid.box_halfwidth", "box half-width must be positive");

    if (kernel.type != "fractional" && kernel.type != "perturbed_fractional" && kernel.type != "tempered")
        throw ConfigError("kernel.type", "unknown kernel '" + kernel.type + "'");
    check_kernel_parameters(dim, kernel.alpha);
    check_assembly_order(kernel.alpha);
    if (!(kernel.upsilon >= 1.0)) throw ConfigError("kernel.upsilon", "upsilon must be >= 1");
    if (!(kernel.rate > 0.0)) throw ConfigError("kernel.rate", "tempering rate must be positive");

    if (mode == SweepMode::Nonlinear) {
        phi.validate();
        if (!(kernel.alpha < phi.p)) throw ConfigError("kernel.alpha", "nonlinear runs need alpha < p");
        if (!(nonlinear_tol > 0.0)) throw ConfigError("nonlinear.tol", "tolerance must be positive");
        if (nonlinear_max_iter < 1) throw ConfigError("nonlinear.max_iter", "iteration cap must be positive");
        if (kernel.type == "tempered")
            throw ConfigError("kernel.type", "nonlinear runs need two-sided power bounds on the kernel");
    }
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("problem.m", "m must be positive");

    if (!(coeff.gamma >= 1.0)) throw ConfigError("coeff.gamma", "gamma must be >= 1");
    if (coeff.q_values.empty()) throw ConfigError("coeff.q_values", "at least one resolution is required");
    for (int q : coeff.q_values)
        if (q < 64) throw ConfigError("coeff.q_values", "cell quadrature needs at least 64 nodes per axis");
    if (coeff.effective_method != "exact" && coeff.effective_method != "monte_carlo")
        throw ConfigError("coeff.effective_method", "expected 'exact' or 'monte_carlo'");
    if (coeff.effective_method == "monte_carlo" && coeff.mc_samples < 1000)
        throw ConfigError("coeff.mc_samples", "Monte Carlo averages need at least 1000 samples");

    if (epsilons.empty()) throw ConfigError("sweep.epsilons", "epsilon list is empty");
    const double h = 2.0 * box_halfwidth / n;
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
        double e = epsilons[k];
        if (!(e > 0.0)) throw ConfigError("sweep.epsilons", "epsilons must be positive");
        if (k > 0 && !(e < epsilons[k - 1])) throw ConfigError("sweep.epsilons", "epsilons must strictly decrease");
        if (!is_integer_ratio(e / h))
            throw ConfigError("sweep.epsilons", fmt::format("epsilon {} is not a multiple of the cell size {}", e, h));
        if (!is_integer_ratio(2.0 * box_halfwidth / e))
            throw ConfigError("sweep.epsilons", fmt::format("epsilon {} does not divide the box width", e));
    }
    make_field(*this, epsilons.front());
    bool random = coeff.structure == Structure::RandomProduct || coeff.structure == Structure::RandomSymmetric ||
                  coeff.structure == Structure::RandomCheckerboardProduct;
    if (random && seeds.empty()) throw ConfigError("sweep.seeds", "random structures need at least one seed");
    if (!random && !seeds.empty()) throw ConfigError("sweep.seeds", "periodic structures take no seeds");

    if (!(solver_tol > 0.0 && solver_tol <= 1e-6)) throw ConfigError("solver.tol", "tolerance must lie in (0, 1e-6]");
    if (solver_max_iter < 1) throw ConfigError("solver.max_iter", "iteration cap must be positive");
    if (threads < 0) throw ConfigError("solver.threads", "thread count must be >= 0");
    tail.validate();
    if (coeff_subsamples < 0) throw ConfigError("quad.coeff_subsamples", "subsamples must be >= 0");
    make_rhs(*this);
}

Kernel make_kernel(const ExperimentConfig& cfg)
{
    if (cfg.kernel.type == "fractional") return Kernel::fractional_power(cfg.dim, cfg.kernel.alpha);
    if (cfg.kernel.type == "perturbed_fractional")
        return Kernel::perturbed_fractional(cfg.dim, cfg.kernel.alpha, cfg.kernel.upsilon);
    if (cfg.kernel.type == "tempered") return Kernel::tempered(cfg.dim, cfg.kernel.alpha, cfg.kernel.rate);
    throw ConfigError("kernel.type", "unknown kernel '" + cfg.kernel.type + "'");
}

CoefficientField make_field(const ExperimentConfig& cfg, double epsilon)
{
    const CoeffSpec& c = cfg.coeff;
    switch (c.structure) {
    case Structure::PeriodicProduct:
        return CoefficientField::periodic_product(cfg.dim, make_cell(c.lambda, "coeff.lambda"),
                                                  make_cell(c.mu, "coeff.mu"), c.gamma, epsilon);
    case Structure::RandomProduct:
        return CoefficientField::random_product(cfg.dim, make_cell(c.lambda, "coeff.lambda"),
                                                make_cell(c.mu, "coeff.mu"), c.gamma, epsilon);
    case Structure::RandomCheckerboardProduct: {
        if (c.lambda.type != "checkerboard" || c.lambda.params.size() != 3)
            throw ConfigError("coeff.lambda", "checkerboard structure needs lambda = {type = \"checkerboard\", "
                                              "params = [a, b, q]}");
        CheckerboardLaw law{c.lambda.params[0], c.lambda.params[1], c.lambda.params[2]};
        return CoefficientField::random_checkerboard_product(cfg.dim, law, make_cell(c.mu, "coeff.mu"), c.gamma,
                                                             epsilon);
    }
    case Structure::PeriodicSymmetric:
        return CoefficientField::periodic_symmetric(cfg.dim, make_symmetric(c), c.gamma, epsilon);
    case Structure::RandomSymmetric:
        return CoefficientField::random_symmetric(cfg.dim, make_symmetric(c), c.gamma, epsilon);
    }
    throw ConfigError("coeff.structure", "unknown structure");
}

FunctionSpec make_rhs(const ExperimentConfig& cfg)
{
    const RhsSpec& f = cfg.f;
    if (f.type == "zero") return FunctionSpec::zero();
    if (f.type == "gaussian")
        return FunctionSpec::gaussian(to_point_checked(f.center, cfg.dim, "problem.f.center"), f.width, f.amplitude);
    if (f.type == "cosine_bump")
        return FunctionSpec::cosine_bump(to_point_checked(f.center, cfg.dim, "problem.f.center"), f.width,
                                         f.amplitude);
    if (f.type == "indicator")
        return FunctionSpec::indicator(to_point_checked(f.lo, cfg.dim, "problem.f.lo"),
                                       to_point_checked(f.hi, cfg.dim, "problem.f.hi"), f.amplitude);
    throw ConfigError("problem.f.type", "unknown function '" + f.type + "'");
}

EffectiveQuadrature make_effective_quadrature(const ExperimentConfig& cfg)
{
    EffectiveQuadrature q;
    q.q = *std::max_element(cfg.coeff.q_values.begin(), cfg.coeff.q_values.end());
    q.monte_carlo = cfg.coeff.effective_method == "monte_carlo";
    q.mc_samples = cfg.coeff.mc_samples;
    q.seed = cfg.coeff.seed;
    q.stderr_cap = cfg.coeff.stderr_cap;
    return q;
}

std::vector<FunctionSpec> weak_test_functions(const Grid& g)
{
    const double L = g.half_width();
    auto at = [&](double c) { return Point{c, g.dim() == 2 ? c : 0.0}; };
    return {FunctionSpec::gaussian(at(0.0), 0.4 * L), FunctionSpec::gaussian(at(-0.3 * L), 0.4 * L),
            FunctionSpec::gaussian(at(0.3 * L), 0.4 * L)};
}

SweepResult run_sweep(const ExperimentConfig& cfg, const SweepOptions& opt)
{
    cfg.validate();
    SweepResult result;
    const Grid grid(cfg.dim, cfg.box_halfwidth, cfg.n);
    const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
    const Kernel kernel = make_kernel(cfg);
    const AssemblyOptions aopt{threads, cfg.coeff_subsamples};
    const SolverOptions sopt{threads, cfg.reproducible};
    const double p = cfg.mode == SweepMode::Nonlinear ? cfg.phi.p : 2.0;
    const double vol = grid.cell_volume();

    KernelTable table(grid, kernel, cfg.tail, threads, cfg.coeff_subsamples);
    std::optional<KernelTable> unit_table;
    if (kernel.builtin() != KernelBuiltin::FractionalPower)
        unit_table.emplace(grid, Kernel::fractional_power(cfg.dim, cfg.kernel.alpha), cfg.tail, threads);
    const AssembledSystem unit =
        assemble_system(unit_table ? *unit_table : table, CellWeights::unit(grid), cfg.m, GridFunction(grid), aopt);

    const FunctionSpec fspec = make_rhs(cfg);
    const GridFunction f = project(grid, fspec);
    double outside = mass_outside_box(grid, fspec);
    if (outside > 1e-10) {
        std::string note = fmt::format("warning: {:.3g} of the right-hand side mass lies outside the box", outside);
        result.notes.push_back(note);
        std::cerr << note << "\n";
    }
    if (cfg.mode == SweepMode::Nonlinear && cfg.phi.p != 2.0)
        result.notes.push_back("nonlinear run restricted to kernels with two-sided power bounds and alpha < p");

    const CoefficientField field0 = make_field(cfg, cfg.epsilons.front());
    result.effective = effective_coefficient(field0, make_effective_quadrature(cfg));
    const AssembledSystem hom =
        assemble_system(table, CellWeights::homogenized(grid, field0, result.effective, cfg.coeff_subsamples), cfg.m,
                        f, aopt);
    Solve s0 = solve(hom, cfg, sopt);
    if (!s0.converged) {
        result.complete = false;
        result.error = "homogenized solve failed: " + s0.failure;
        return result;
    }
    result.u_hom = s0.u;

    std::vector<Eigen::VectorXd> tests;
    for (const FunctionSpec& t : weak_test_functions(grid)) tests.push_back(project(grid, t).values);

    std::vector<std::optional<std::uint64_t>> seeds;
    if (field0.is_random())
        for (auto sd : cfg.seeds) seeds.emplace_back(sd);
    else
        seeds.emplace_back(std::nullopt);

    for (double eps : cfg.epsilons) {
        for (const auto& seed : seeds) {
            auto t0 = std::chrono::steady_clock::now();
            CoefficientField field = make_field(cfg, eps);
            if (seed) field = draw_realization(field, *seed);
            AssembledSystem sys =
                assemble_system(table, CellWeights::from_field(grid, field, cfg.coeff_subsamples), cfg.m, f, aopt);
            Solve s = solve(sys, cfg, sopt);

            SweepRecord r;
            r.epsilon = eps;
            r.seed = seed;
            r.iterations = s.iterations;
            r.converged = s.converged;
            Eigen::VectorXd diff = s.u - s0.u;
            r.l2_error = lp_norm(diff, p, vol);
            r.seminorm_error = gagliardo_p(unit, diff, p);
            r.energy_eps = s.energy;
            r.energy_hom = s0.energy;
            for (const auto& phi : tests) r.weak_gaps.push_back(std::abs(vol * diff.dot(phi)));
            r.u_nu_norm = std::sqrt(s.u.dot(sys.M.cwiseProduct(s.u)));
            r.f_nu_bound = std::sqrt(vol * f.values.dot(sys.nu.cwiseProduct(f.values))) / cfg.m;
            r.u_l2 = std::sqrt(vol * s.u.squaredNorm());
            r.u_seminorm = std::sqrt(std::max(0.0, gagliardo_seminorm_sq(unit, s.u)));
            r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            result.records.push_back(r);
            if (opt.on_record) opt.on_record(r);
            if (!s.converged) {
                result.complete = false;
                result.error = fmt::format("solve failed at epsilon {}: {}", eps, s.failure);
                return result;
            }
        }
    }
    return result;
}

std::vector<std::pair<double, double>> energy_gap(const std::vector<SweepRecord>& records)
{
    std::vector<std::pair<double, double>> out;
    for (const auto& r : records) out.emplace_back(r.epsilon, std::abs(r.energy_eps - r.energy_hom));
    return out;
}

RateFit fit_rate(const std::vector<double>& epsilons, const std::vector<double>& errors)
{
    if (epsilons.size() != errors.size()) throw Error("fit_rate: mismatched inputs");
    if (epsilons.size() < 2) throw Error("fit_rate: need at least two records");
    const std::size_t n = epsilons.size();
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (!(errors[k] > 0.0) || !(epsilons[k] > 0.0)) throw Error("fit_rate: errors and epsilons must be positive");
        x[k] = std::log(epsilons[k]);
        y[k] = std::log(errors[k]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx == 0.0) throw Error("fit_rate: epsilons must not all coincide");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double res = y[k] - fit.intercept - fit.slope * x[k];
        ss += res * res;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

RateFit fit_rate(const std::vector<SweepRecord>& records)
{
    std::vector<double> e, err;
    for (const auto& r : records) {
        e.push_back(r.epsilon);
        err.push_back(r.l2_error);
    }
    return fit_rate(e, err);
}

std::vector<EnsembleStat> ensemble_summary(const std::vector<SweepRecord>& records)
{
    std::vector<EnsembleStat> out;
    std::vector<std::vector<double>> groups;
    for (const auto& r : records) {
        std::size_t k = 0;
        while (k < out.size() && out[k].epsilon != r.epsilon) ++k;
        if (k == out.size()) {
            out.push_back({r.epsilon});
            groups.emplace_back();
        }
        groups[k].push_back(r.l2_error);
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto& g = groups[k];
        double mean = 0.0;
        for (double v : g) mean += v;
        mean /= g.size();
        out[k].mean = mean;
        out[k].count = g.size();
        if (g.size() < 2) {
            out[k].stddev = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        double ss = 0.0;
        for (double v : g) ss += (v - mean) * (v - mean);
        out[k].stddev = std::sqrt(ss / (g.size() - 1));
        out[k].stddev_defined = true;
    }
    return out;
}

void write_csv(std::ostream& out, const SweepResult& result, bool reproducible)
{
    out << kCsvHeader << "\n";
    for (const auto& r : result.records) {
        out << fmt::format("{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g}", r.epsilon,
                           r.seed ? std::to_string(*r.seed) : std::string(), r.l2_error, r.seminorm_error,
                           r.energy_eps, r.energy_hom);
        for (std::size_t k = 0; k < 3; ++k)
            out << fmt::format(",{:.17g}", k < r.weak_gaps.size() ? r.weak_gaps[k] : 0.0);
        out << fmt::format(",{},{}\n", r.iterations, reproducible ? std::string("0") : fmt::format("{:.3f}", r.runtime_ms));
    }
    if (!result.complete) out << "# INCOMPLETE\n";
}

void write_csv(const std::string& path, const SweepResult& result, bool reproducible)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_csv(out, result, reproducible);
}

}  // namespace nhl
