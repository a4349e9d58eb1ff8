#include "nhl/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "nhl/parallel.hpp"

namespace nhl {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-14;

int resolve_threads(int threads) { return threads > 0 ? threads : default_thread_count(); }

using Index = Eigen::Index;

// y = (A + m M) x, one row per task; rows are independent, so the result does not depend on
// the thread count
void apply_operator(const AssembledSystem& sys, const Eigen::VectorXd& x, Eigen::VectorXd& y, int threads)
{
    const Index N = sys.A.rows();
    y.resize(N);
    parallel_for_blocks(static_cast<std::size_t>(N), threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            auto k = static_cast<Index>(i);
            y[k] = sys.A.col(k).dot(x) + sys.m * sys.M[k] * x[k];
        }
    });
}

double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const SolverOptions& opt)
{
    if (opt.reproducible) return a.dot(b);
    const int threads = resolve_threads(opt.threads);
    const std::size_t n = static_cast<std::size_t>(a.size());
    std::vector<double> partial(static_cast<std::size_t>(threads), 0.0);
    std::size_t chunk = (n + threads - 1) / std::max(threads, 1);
    parallel_for_blocks(static_cast<std::size_t>(threads), threads, [&](std::size_t tb, std::size_t te) {
        for (std::size_t t = tb; t < te; ++t) {
            std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
            if (lo < hi)
                partial[t] = a.segment(static_cast<Index>(lo), static_cast<Index>(hi - lo))
                                 .dot(b.segment(static_cast<Index>(lo), static_cast<Index>(hi - lo)));
        }
    });
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

double pow_abs(double x, double p)
{
    x = std::abs(x);
    if (p == 2.0) return x * x;
    if (p == 3.0) return x * x * x;
    return std::pow(x, p);
}

// |a + s|^p - |a|^p
double pow_increment(double a, double s, double p)
{
    if (p == 2.0) return s * (2.0 * a + s);
    if (a != 0.0 && std::abs(s) < std::abs(a)) return pow_abs(a, p) * std::expm1(p * std::log1p(s / a));
    return pow_abs(a + s, p) - pow_abs(a, p);
}

// Sum over columns of per-column partial sums, combined in column order.
template <class Column>
double column_sum(Index N, int threads, Column&& column)
{
    std::vector<double> partial(static_cast<std::size_t>(N), 0.0);
    parallel_for_blocks(static_cast<std::size_t>(N), threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) partial[j] = column(static_cast<Index>(j));
    });
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

Eigen::VectorXd hessian_diagonal(const AssembledSystem& sys, const PhiSpec& phi, const Eigen::VectorXd& u,
                                 int threads)
{
    const Index N = u.size();
    Eigen::VectorXd H(N);
    const double scale = std::max(u.cwiseAbs().maxCoeff(), 1e-300);
    const double floor_t = 1e-8 * scale;
    auto dd = [&](double t) { return phi.ddphi(std::abs(t) < floor_t ? floor_t : t); };
    parallel_for_blocks(static_cast<std::size_t>(N), threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t ii = b; ii < e; ++ii) {
            auto i = static_cast<Index>(ii);
            double s = 0.0;
            for (Index j = 0; j < N; ++j)
                if (j != i) s += -sys.A(j, i) * dd(u[i] - u[j]);
            s += sys.exterior[i] * dd(u[i]);
            double ui = std::abs(u[i]) < floor_t ? floor_t : std::abs(u[i]);
            s += sys.m * sys.M[i] * (phi.p - 1.0) * std::pow(ui, phi.p - 2.0);
            double lower = 1e-10 * (sys.A(i, i) + sys.m * sys.M[i]);
            H[i] = std::max(s, lower);
        }
    });
    return H;
}

}  // namespace

LinearSolveReport solve_linear(const AssembledSystem& sys, double tol, int max_iter, const SolverOptions& opt)
{
    if (!(tol > 0.0 && tol <= 1e-6)) throw ConfigError("solver.tol", "tolerance must lie in (0, 1e-6]");
    if (max_iter < 1) throw ConfigError("solver.max_iter", "iteration cap must be positive");
    auto t0 = std::chrono::steady_clock::now();
    const int threads = resolve_threads(opt.threads);
    const Index N = sys.A.rows();

    LinearSolveReport rep;
    rep.solution = Eigen::VectorXd::Zero(N);
    const double bnorm = std::sqrt(dot(sys.b, sys.b, opt));
    if (bnorm == 0.0) {
        rep.converged = true;
        return rep;
    }
    Eigen::VectorXd diag(N);
    for (Index i = 0; i < N; ++i) diag[i] = sys.A(i, i) + sys.m * sys.M[i];

    Eigen::VectorXd& x = rep.solution;
    Eigen::VectorXd r = sys.b, z = r.cwiseQuotient(diag), p = z, Ap(N);
    double rz = dot(r, z, opt);
    for (int it = 1; it <= max_iter; ++it) {
        apply_operator(sys, p, Ap, threads);
        double alpha = rz / dot(p, Ap, opt);
        x += alpha * p;
        r -= alpha * Ap;
        rep.iterations = it;
        if (std::sqrt(dot(r, r, opt)) <= tol * bnorm) {
            rep.converged = true;
            break;
        }
        z = r.cwiseQuotient(diag);
        double rz_next = dot(r, z, opt);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    Eigen::VectorXd Ax(N);
    apply_operator(sys, x, Ax, threads);
    rep.relative_residual = std::sqrt(dot(Ax - sys.b, Ax - sys.b, opt)) / bnorm;
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// -------------------------------------------------------------------------------------------------

void PhiSpec::validate() const
{
    if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("nonlinear.p", "p must exceed 1");
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("nonlinear.c", "c must be positive");
}

double PhiSpec::phi(double t) const { return c * pow_abs(t, p); }

double PhiSpec::dphi(double t) const
{
    if (t == 0.0) return 0.0;
    if (p == 2.0) return 2.0 * c * t;
    return c * p * pow_abs(t, p - 1.0) * (t > 0.0 ? 1.0 : -1.0);
}

double PhiSpec::ddphi(double t) const
{
    if (p == 2.0) return 2.0 * c;
    return c * p * (p - 1.0) * pow_abs(t, p - 2.0);
}

double PhiSpec::increment(double a, double s) const { return c * pow_increment(a, s, p); }

double PhiSpec::upsilon2() const { return std::max(c, 1.0 / c) * std::max(p, 1.0); }

double functional_value(const AssembledSystem& sys, const PhiSpec& phi, const Eigen::VectorXd& u,
                        const SolverOptions& opt)
{
    const Index N = sys.A.rows();
    if (u.size() != N) throw DimensionError("vector does not match the system size");
    const int threads = resolve_threads(opt.threads);
    // 1/2 sum_{i != j} = sum_{i < j} by symmetry of w and evenness of Phi
    double pairs = column_sum(N, threads, [&](Index j) {
        double s = 0.0;
        for (Index i = 0; i < j; ++i) s += -sys.A(i, j) * phi.phi(u[j] - u[i]);
        return s;
    });
    double local = 0.0;
    for (Index i = 0; i < N; ++i)
        local += sys.exterior[i] * phi.phi(u[i]) + sys.m / phi.p * sys.M[i] * pow_abs(u[i], phi.p) - sys.b[i] * u[i];
    return pairs + local;
}

Eigen::VectorXd functional_gradient(const AssembledSystem& sys, const PhiSpec& phi, const Eigen::VectorXd& u,
                                    const SolverOptions& opt)
{
    const Index N = sys.A.rows();
    if (u.size() != N) throw DimensionError("vector does not match the system size");
    Eigen::VectorXd g(N);
    parallel_for_blocks(static_cast<std::size_t>(N), resolve_threads(opt.threads), [&](std::size_t b, std::size_t e) {
        for (std::size_t ii = b; ii < e; ++ii) {
            auto i = static_cast<Index>(ii);
            double s = 0.0;
            for (Index j = 0; j < N; ++j)
                if (j != i) s += -sys.A(j, i) * phi.dphi(u[i] - u[j]);
            double ui = u[i];
            double lower = ui == 0.0 ? 0.0 : sys.m * sys.M[i] * pow_abs(ui, phi.p - 1.0) * (ui > 0.0 ? 1.0 : -1.0);
            g[i] = s + sys.exterior[i] * phi.dphi(ui) + lower - sys.b[i];
        }
    });
    return g;
}

double functional_increment(const AssembledSystem& sys, const PhiSpec& phi, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& d, double t, const SolverOptions& opt)
{
    const Index N = sys.A.rows();
    double pairs = column_sum(N, resolve_threads(opt.threads), [&](Index j) {
        double s = 0.0;
        for (Index i = 0; i < j; ++i) s += -sys.A(i, j) * phi.increment(u[j] - u[i], t * (d[j] - d[i]));
        return s;
    });
    double local = 0.0;
    for (Index i = 0; i < N; ++i) {
        double s = t * d[i];
        local += sys.exterior[i] * phi.increment(u[i], s) + sys.m / phi.p * sys.M[i] * pow_increment(u[i], s, phi.p) -
                 sys.b[i] * s;
    }
    return pairs + local;
}

NonlinearSolveReport minimize_functional(const AssembledSystem& sys, const PhiSpec& phi,
                                         const Eigen::VectorXd& start, double tol, int max_iter,
                                         const SolverOptions& opt)
{
    phi.validate();
    if (!(tol > 0.0)) throw ConfigError("nonlinear.tol", "tolerance must be positive");
    if (max_iter < 1) throw ConfigError("nonlinear.max_iter", "iteration cap must be positive");
    const Index N = sys.A.rows();
    if (start.size() != N) throw DimensionError("start vector does not match the system size");
    const int threads = resolve_threads(opt.threads);

    NonlinearSolveReport rep;
    Eigen::VectorXd u = start;
    Eigen::VectorXd g = functional_gradient(sys, phi, u, opt);
    double J = functional_value(sys, phi, u, opt);
    rep.objective_history.push_back(J);
    const double bnorm = sys.b.norm();
    const double target = tol * (bnorm > 0.0 ? bnorm : 1.0);

    Eigen::VectorXd d, z, g_prev, z_prev;
    bool restart = true;
    for (int it = 0;; ++it) {
        rep.gradient_norm = g.norm();
        if (rep.gradient_norm <= target) {
            rep.converged = true;
            break;
        }
        if (it >= max_iter) {
            rep.failure = "iteration cap reached";
            break;
        }
        z = g.cwiseQuotient(hessian_diagonal(sys, phi, u, threads));
        if (restart) {
            d = -z;
        } else {
            double beta = std::max(0.0, z.dot(g - g_prev) / z_prev.dot(g_prev));
            d = -z + beta * d;
        }
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            d = -z;
            slope = g.dot(d);
        }
        double t = 1.0, delta = 0.0;
        bool accepted = false;
        while (t >= kMinStep) {
            delta = functional_increment(sys, phi, u, d, t, opt);
            if (delta <= kArmijo * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
            ++rep.backtracks;
        }
        if (!accepted) {
            rep.failure = "line search failed (step below 1e-14)";
            break;
        }
        rep.min_step = std::min(rep.min_step, t);
        u += t * d;
        J += delta;
        rep.objective_history.push_back(J);
        g_prev = g;
        z_prev = z;
        g = functional_gradient(sys, phi, u, opt);
        restart = false;
        rep.iterations = it + 1;
    }
    rep.solution = u;
    rep.objective = functional_value(sys, phi, u, opt);
    return rep;
}

}  // namespace nhl
