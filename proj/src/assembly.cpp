#include "nhl/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>
#include <fmt/os.h>

#include "nhl/parallel.hpp"
#include "nhl/quadrature.hpp"

namespace nhl {

namespace {

constexpr double kPi = std::numbers::pi;
// Offsets at or beyond this (max-norm) distance use fixed tensor Gauss rules.
constexpr int kFarOffset = 4;
// Width, in cells, of the virtual-cell band that carries the near exterior in 2D.
constexpr int kBand = 2;
// Midpoints per axis for the period mean in symmetric exterior weights.
constexpr int kPeriodNodes = 16;

int resolve_threads(int threads) { return threads > 0 ? threads : default_thread_count(); }

int resolve_subsamples(int dim, int s)
{
    if (s < 0) throw ConfigError("quad.coeff_subsamples", "subsamples must be positive");
    return s > 0 ? s : default_subsamples(dim);
}

std::vector<Point> subcell_points(const Grid& g, std::size_t cell, int s)
{
    Point lo = g.lower(cell);
    double step = g.h() / s;
    std::vector<Point> pts;
    if (g.dim() == 1) {
        for (int a = 0; a < s; ++a) pts.push_back({lo[0] + (a + 0.5) * step, 0.0});
    } else {
        for (int b = 0; b < s; ++b)
            for (int a = 0; a < s; ++a) pts.push_back({lo[0] + (a + 0.5) * step, lo[1] + (b + 0.5) * step});
    }
    return pts;
}

template <class F>
Eigen::VectorXd cell_means(const Grid& g, int s, F&& f)
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
    for (std::size_t c = 0; c < g.size(); ++c) {
        auto pts = subcell_points(g, c, s);
        double sum = 0.0;
        for (const Point& x : pts) sum += f(x);
        v[static_cast<Eigen::Index>(c)] = sum / pts.size();
    }
    return v;
}

template <class F>
std::function<double(std::size_t, std::size_t)> subcell_pair_mean(const Grid& g, int s, F f)
{
    return [g, s, f](std::size_t i, std::size_t j) {
        auto pi = subcell_points(g, i, s), pj = subcell_points(g, j, s);
        double sum = 0.0;
        for (const Point& x : pi)
            for (const Point& y : pj) sum += f(x, y);
        return sum / (pi.size() * pj.size());
    };
}

std::vector<Point> period_nodes(int dim)
{
    std::vector<Point> pts;
    for (int b = 0; b < (dim == 2 ? kPeriodNodes : 1); ++b)
        for (int a = 0; a < kPeriodNodes; ++a)
            pts.push_back({(a + 0.5) / kPeriodNodes, dim == 2 ? (b + 0.5) / kPeriodNodes : 0.0});
    return pts;
}

void check_dims(const Grid& g, int other, const char* what)
{
    if (g.dim() != other)
        throw DimensionError(std::string(what) + " has dimension " + std::to_string(other) + ", grid has " +
                             std::to_string(g.dim()));
}

// ---------------------------------------------------------------------------------------------
// 1D offset integrals: \int K(z) tent(z - k h) dz with tent(s) = max(0, h - |s|).

double power_antiderivative(double z, double alpha)
{
    return z == 0.0 ? 0.0 : -std::pow(z, 1.0 - alpha) / (alpha * (1.0 - alpha));
}

// Singular integrands overflow only on sub-denormal neighbourhoods of the singularity.
double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

double offset_1d(const Kernel& K, int k, double h, const quad::Options& opt)
{
    k = std::abs(k);
    const double alpha = K.alpha();
    if (K.builtin() == KernelBuiltin::FractionalPower && k <= kFarOffset) {
        return power_antiderivative((k + 1) * h, alpha) - 2.0 * power_antiderivative(k * h, alpha) +
               power_antiderivative((k - 1) * h, alpha);
    }
    auto prof = [&](double s) { return K.profile(Point{s, 0.0}); };
    double a = (k - 1) * h, m = k * h, b = (k + 1) * h;
    auto rising = [&](double s) { return prof(s) * (s - a); };
    auto falling = [&](double s) { return prof(s) * (b - s); };
    if (k >= kFarOffset + 1) return quad::gauss(rising, a, m, 8) + quad::gauss(falling, m, b, 8);
    double left = k == 1 ? quad::endpoint_singular([&](double s) { return s > 0.0 ? finite_or_zero(rising(s)) : 0.0; }, a, m, opt)
                         : quad::smooth(rising, a, m, opt);
    return left + quad::smooth(falling, m, b, opt);
}

// \int_{rho0}^{rho1} T(rho) d rho with T the one-sided tail of K along dir.
double exterior_side_1d(const Kernel& K, double rho0, double rho1, double dir, const TailPolicy& tail)
{
    const double alpha = K.alpha();
    if (K.builtin() == KernelBuiltin::FractionalPower)
        return (std::pow(rho1, 1.0 - alpha) - std::pow(rho0, 1.0 - alpha)) / (alpha * (1.0 - alpha));
    quad::Options opt = tail.options();
    TailClosure closure{tail.r_far, opt};
    Point e{dir, 0.0};
    auto f = [&](double s) { return s > 0.0 ? finite_or_zero(K.profile(s * e) * (s - rho0)) : 0.0; };
    double near = rho0 == 0.0 ? quad::endpoint_singular(f, rho0, rho1, opt) : quad::smooth(f, rho0, rho1, opt);
    return near + (rho1 - rho0) * K.radial_tail(rho1, e, closure);
}

// ---------------------------------------------------------------------------------------------
// 2D offset integrals, split into the four rectangles on which the tent product is bilinear.

struct Linear {
    double c0, c1;  // c0 + c1 t
    double operator()(double t) const { return c0 + c1 * t; }
};

double corner_polar(const Kernel& K, double sx, double sy, Linear px, Linear py, double h, const quad::Options& opt)
{
    // z = (sx u, sy v) with (u, v) in [0, h]^2, polar in (u, v)
    double a0 = px.c0, a1 = px.c1 * sx, b0 = py.c0, b1 = py.c1 * sy;
    const double alpha = K.alpha();
    const bool power = K.builtin() == KernelBuiltin::FractionalPower;
    auto radial = [&](double phi) {
        double c = std::cos(phi), s = std::sin(phi);
        double R = phi < 0.25 * kPi ? h / c : h / s;
        double c1 = a0 * b1 * s + a1 * b0 * c, c2 = a1 * b1 * c * s;
        if (power) return c1 * std::pow(R, 1.0 - alpha) / (1.0 - alpha) + c2 * std::pow(R, 2.0 - alpha) / (2.0 - alpha);
        Point dir{sx * c, sy * s};
        return quad::endpoint_singular(
            [&](double r) { return r > 0.0 ? finite_or_zero(K.profile(r * dir) * (c1 * r + c2 * r * r) * r) : 0.0; },
            0.0, R, opt);
    };
    return quad::smooth(radial, 0.0, 0.25 * kPi, opt) + quad::smooth(radial, 0.25 * kPi, 0.5 * kPi, opt);
}

double offset_2d(const Kernel& K, int k0, int k1, double h, const quad::Options& opt)
{
    double total = 0.0;
    const int far = std::max(std::abs(k0), std::abs(k1));
    for (int a = 0; a < 2; ++a) {
        double x0 = (k0 - 1 + a) * h, x1 = x0 + h;
        Linear px = a == 0 ? Linear{-(k0 - 1) * h, 1.0} : Linear{(k0 + 1) * h, -1.0};
        for (int b = 0; b < 2; ++b) {
            double y0 = (k1 - 1 + b) * h, y1 = y0 + h;
            Linear py = b == 0 ? Linear{-(k1 - 1) * h, 1.0} : Linear{(k1 + 1) * h, -1.0};
            bool corner_x = x0 == 0.0 || x1 == 0.0, corner_y = y0 == 0.0 || y1 == 0.0;
            if (corner_x && corner_y) {
                total += corner_polar(K, x1 > 0.0 ? 1.0 : -1.0, y1 > 0.0 ? 1.0 : -1.0, px, py, h, opt);
                continue;
            }
            auto f = [&](double x, double y) { return K.profile(Point{x, y}) * px(x) * py(y); };
            if (far >= kFarOffset) {
                total += quad::gauss([&](double x) { return quad::gauss([&](double y) { return f(x, y); }, y0, y1, 8); },
                                     x0, x1, 8);
            } else {
                total += quad::smooth(
                    [&](double x) { return quad::smooth([&](double y) { return f(x, y); }, y0, y1, opt); }, x0, x1,
                    opt);
            }
        }
    }
    return total;
}

// \int over the exterior of [-Lp, Lp]^2 of K(y - x) dy for x well inside.
double far_exterior_2d(const Kernel& K, const Point& x, double Lp, const TailPolicy& tail)
{
    quad::Options opt = tail.options();
    TailClosure closure{tail.r_far, opt};
    std::array<double, 4> corners{std::atan2(-Lp - x[1], Lp - x[0]), std::atan2(Lp - x[1], Lp - x[0]),
                                  std::atan2(Lp - x[1], -Lp - x[0]), std::atan2(-Lp - x[1], -Lp - x[0])};
    for (double& t : corners)
        if (t < corners[0]) t += 2.0 * kPi;
    std::sort(corners.begin(), corners.end());
    auto integrand = [&](double t) {
        double c = std::cos(t), s = std::sin(t);
        double rho = std::numeric_limits<double>::infinity();
        if (c > 0.0) rho = std::min(rho, (Lp - x[0]) / c);
        if (c < 0.0) rho = std::min(rho, (-Lp - x[0]) / c);
        if (s > 0.0) rho = std::min(rho, (Lp - x[1]) / s);
        if (s < 0.0) rho = std::min(rho, (-Lp - x[1]) / s);
        return K.radial_tail(rho, Point{c, s}, closure);
    };
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
        double t0 = corners[k], t1 = k < 3 ? corners[k + 1] : corners[0] + 2.0 * kPi;
        sum += quad::smooth(integrand, t0, t1, opt);
    }
    return sum;
}

}  // namespace

// -------------------------------------------------------------------------------------------------

void check_assembly_order(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("kernel.alpha",
                          "piecewise-constant discretization needs alpha in (0, 1); got " + std::to_string(alpha));
}

void TailPolicy::validate() const
{
    if (!(tolerance > 0.0 && tolerance <= 1e-4)) throw ConfigError("quad.tolerance", "tolerance must lie in (0, 1e-4]");
    if (!(r_far > 0.0)) throw ConfigError("quad.r_far", "far-field radius must be positive");
    if (max_depth < 1) throw ConfigError("quad.max_depth", "depth cap must be at least 1");
}

quad::Options TailPolicy::options() const
{
    quad::Options o;
    o.rel_tol = tolerance;
    o.max_depth = max_depth;
    return o;
}

int default_subsamples(int dim) { return dim == 1 ? 4 : 2; }

PairFactor PairFactor::constant(double c, std::size_t n)
{
    PairFactor p;
    PairFactor::Term t;
    t.coef = c;
    t.left = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    t.right = t.left;
    p.terms.push_back(std::move(t));
    return p;
}

// -------------------------------------------------------------------------------------------------
// Weights

CellWeights CellWeights::unit(const Grid& g)
{
    CellWeights w;
    auto n = static_cast<Eigen::Index>(g.size());
    w.pair = PairFactor::constant(1.0, g.size());
    w.exterior = Eigen::VectorXd::Ones(n);
    w.nu = Eigen::VectorXd::Ones(n);
    return w;
}

CellWeights CellWeights::from_field(const Grid& g, const CoefficientField& c, int subsamples)
{
    check_dims(g, c.dim(), "coefficient");
    const int s = resolve_subsamples(g.dim(), subsamples);
    CellWeights w;
    if (c.is_product()) {
        Eigen::VectorXd mu = cell_means(g, s, [&](const Point& x) { return c.mu_at(x); });
        w.nu = cell_means(g, s, [&](const Point& x) { return c.nu(x); });
        double mu_mean = cell_average(*c.mu_template(), g.dim());
        w.pair.terms.push_back({1.0, mu, mu});
        w.exterior = mu * mu_mean;
        w.weighted_mass = true;
        return w;
    }

    const SymmetricCoefficient& sym = *c.symmetric();
    const int axis = sym.axis();
    auto cosf = [&](const Point& x) { return std::cos(2.0 * kPi * c.fast_point(x)[axis]); };
    auto ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.size()));
    switch (sym.kind()) {
    case SymmetricCoefficient::Kind::SeparableCosine: {
        Eigen::VectorXd cm = cell_means(g, s, cosf);
        w.pair.terms.push_back({sym.base(), ones, ones});
        w.pair.terms.push_back({sym.amplitude(), cm, cm});
        break;
    }
    case SymmetricCoefficient::Kind::SymmetrizedPair: {
        Eigen::VectorXd l = cell_means(g, s, [&](const Point& x) { return (*sym.lambda())(c.fast_point(x)); });
        Eigen::VectorXd m = cell_means(g, s, [&](const Point& x) { return (*sym.mu())(c.fast_point(x)); });
        w.pair.terms.push_back({0.5, l, m});
        w.pair.terms.push_back({0.5, m, l});
        break;
    }
    case SymmetricCoefficient::Kind::SlowSeparable: {
        auto slow = [&](const Point& x) { return std::cos(kPi * x[0]); };
        Eigen::VectorXd cm = cell_means(g, s, cosf);
        Eigen::VectorXd xm = cell_means(g, s, slow);
        Eigen::VectorXd xc = cell_means(g, s, [&](const Point& x) { return slow(x) * cosf(x); });
        double sa = sym.slow_amplitude();
        w.pair.terms.push_back({sym.base(), ones, ones});
        w.pair.terms.push_back({sym.amplitude(), cm, cm});
        w.pair.terms.push_back({sa * sym.base(), xm, xm});
        w.pair.terms.push_back({sa * sym.amplitude(), xc, xc});
        break;
    }
    case SymmetricCoefficient::Kind::Custom:
        w.pair.generic = subcell_pair_mean(g, s, [c](const Point& x, const Point& y) { return c(x, y); });
        break;
    }
    // exterior: the period mean over the partner's fast variable, slow variables at y = x
    const std::vector<Point> eta = period_nodes(g.dim());
    w.exterior = cell_means(g, s, [&](const Point& x) {
        Point xi = c.fast_point(x);
        double sum = 0.0;
        for (const Point& e : eta) sum += sym(x, x, xi, e);
        return sum / eta.size();
    });
    w.nu = ones;
    return w;
}

CellWeights CellWeights::homogenized(const Grid& g, const CoefficientField& c, const EffectiveCoefficient& e,
                                     int subsamples)
{
    check_dims(g, c.dim(), "coefficient");
    const int s = resolve_subsamples(g.dim(), subsamples);
    auto n = static_cast<Eigen::Index>(g.size());
    CellWeights w;
    if (c.is_product()) {
        double a = e.mu_mean * e.mu_mean;
        w.pair = PairFactor::constant(a, g.size());
        w.exterior = Eigen::VectorXd::Constant(n, a);
        w.nu = Eigen::VectorXd::Constant(n, e.nu_mean);
        w.weighted_mass = true;
        return w;
    }
    const SymmetricCoefficient& sym = *c.symmetric();
    auto ones = Eigen::VectorXd::Ones(n);
    if (sym.separable()) {
        w.pair.terms.push_back({e.value, ones, ones});
        if (sym.kind() == SymmetricCoefficient::Kind::SlowSeparable) {
            Eigen::VectorXd xm = cell_means(g, s, [](const Point& x) { return std::cos(kPi * x[0]); });
            w.pair.terms.push_back({sym.slow_amplitude() * e.value, xm, xm});
        }
    } else {
        w.pair.generic = subcell_pair_mean(g, s, [e](const Point& x, const Point& y) { return e(x, y); });
    }
    w.exterior = cell_means(g, s, [&](const Point& x) { return e(x, x); });
    w.nu = ones;
    return w;
}

// -------------------------------------------------------------------------------------------------
// Kernel table

KernelTable::KernelTable(const Grid& g, const Kernel& k, const TailPolicy& tail, int threads, int subsamples)
    : grid_(g), kernel_(k), base_(k)
{
    check_dims(g, k.dim(), "kernel");
    check_assembly_order(k.alpha());
    tail.validate();
    const int s = resolve_subsamples(g.dim(), subsamples);
    threads = resolve_threads(threads);

    if (k.family() == KernelFamily::General) {
        if (!k.is_power_type()) throw Error("general kernels must be of power type for assembly");
        base_ = Kernel::fractional_power(g.dim(), k.alpha());
        if (k.builtin() == KernelBuiltin::BoundedPerturbedFractional) {
            Eigen::VectorXd a = cell_means(g, s, [&](const Point& x) { return k.multiplier(x); });
            modulation_.terms.push_back({1.0, a, a});
        } else {
            modulation_.generic =
                subcell_pair_mean(g, s, [k](const Point& x, const Point& y) { return k.modulation(x, y); });
        }
        exterior_modulation_ = cell_means(g, s, [&](const Point& x) { return k.exterior_modulation(x); });
    }

    band_ = g.dim() == 2 ? kBand : 0;
    reach_ = g.n() - 1 + band_;
    build_offsets(tail, threads);
    build_exterior(tail, threads);
}

std::size_t KernelTable::slot(int k0, int k1) const
{
    if (grid_.dim() == 1) return static_cast<std::size_t>(std::abs(k0));
    const int w = 2 * reach_ + 1;
    return static_cast<std::size_t>(k0 + reach_) * w + static_cast<std::size_t>(k1 + reach_);
}

void KernelTable::build_offsets(const TailPolicy& tail, int threads)
{
    const double h = grid_.h();
    const quad::Options opt = tail.options();
    if (grid_.dim() == 1) {
        offsets_.assign(static_cast<std::size_t>(reach_) + 1, 0.0);
        parallel_for_blocks(offsets_.size() - 1, threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k) offsets_[k + 1] = offset_1d(base_, static_cast<int>(k + 1), h, opt);
        });
        return;
    }
    const int w = 2 * reach_ + 1;
    offsets_.assign(static_cast<std::size_t>(w) * w, 0.0);
    // one representative per symmetry class: k -> -k always, plus the axis reflections and
    // the diagonal swap for radial kernels
    const bool radial = base_.is_radial();
    std::vector<std::array<int, 2>> reps;
    for (int k0 = -reach_; k0 <= reach_; ++k0)
        for (int k1 = -reach_; k1 <= reach_; ++k1) {
            if (k0 == 0 && k1 == 0) continue;
            if (radial ? (k1 >= 0 && k0 >= k1) : (k1 > 0 || (k1 == 0 && k0 > 0))) reps.push_back({k0, k1});
        }
    std::vector<double> values(reps.size());
    parallel_for_blocks(reps.size(), threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) values[r] = offset_2d(base_, reps[r][0], reps[r][1], h, opt);
    });
    for (std::size_t r = 0; r < reps.size(); ++r) {
        auto [k0, k1] = reps[r];
        if (radial) {
            for (int a : {k0, -k0})
                for (int b : {k1, -k1}) {
                    offsets_[slot(a, b)] = values[r];
                    offsets_[slot(b, a)] = values[r];
                }
        } else {
            offsets_[slot(k0, k1)] = values[r];
            offsets_[slot(-k0, -k1)] = values[r];
        }
    }
}

void KernelTable::build_exterior(const TailPolicy& tail, int threads)
{
    const std::size_t N = grid_.size();
    const double h = grid_.h(), L = grid_.half_width();
    exterior_.resize(static_cast<Eigen::Index>(N));
    if (grid_.dim() == 1) {
        parallel_for_blocks(N, threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t c = b; c < e; ++c) {
                double lo = grid_.lower(c)[0], hi = lo + h;
                exterior_[static_cast<Eigen::Index>(c)] =
                    exterior_side_1d(base_, std::max(0.0, L - hi), L - lo, 1.0, tail) +
                    exterior_side_1d(base_, std::max(0.0, lo + L), hi + L, -1.0, tail);
            }
        });
    } else {
        const int n = grid_.n();
        const double Lp = L + band_ * h;
        parallel_for_blocks(N, threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t c = b; c < e; ++c) {
                auto [i0, i1] = grid_.index(c);
                double band = 0.0;
                for (int j1 = -band_; j1 < n + band_; ++j1)
                    for (int j0 = -band_; j0 < n + band_; ++j0) {
                        if (j0 >= 0 && j0 < n && j1 >= 0 && j1 < n) continue;
                        band += offsets_[slot(j0 - i0, j1 - i1)];
                    }
                Point lo = grid_.lower(c);
                double far = quad::gauss(
                    [&](double x) {
                        return quad::gauss([&](double y) { return far_exterior_2d(base_, Point{x, y}, Lp, tail); },
                                           lo[1], lo[1] + h, 8);
                    },
                    lo[0], lo[0] + h, 8);
                exterior_[static_cast<Eigen::Index>(c)] = band + far;
            }
        });
    }
    if (exterior_modulation_.size() > 0) exterior_ = exterior_.cwiseProduct(exterior_modulation_);
}

double KernelTable::offset_integral(int k0, int k1) const
{
    if (k0 == 0 && k1 == 0) throw Error("offset_integral: the diagonal cell pair is singular");
    if (std::max(std::abs(k0), std::abs(k1)) > reach_) throw Error("offset_integral: offset outside the table");
    return offsets_[slot(k0, k1)];
}

double KernelTable::pair_integral(std::size_t i, std::size_t j) const
{
    auto a = grid_.index(i), b = grid_.index(j);
    double base = offsets_[slot(b[0] - a[0], b[1] - a[1])];
    if (!modulation_.terms.empty() || modulation_.generic) base *= modulation_(i, j);
    return base;
}

// -------------------------------------------------------------------------------------------------
// Systems

AssembledSystem assemble_system(const KernelTable& table, const CellWeights& w, double m, const GridFunction& f,
                                const AssemblyOptions& opt)
{
    const Grid& g = table.grid();
    if (!(m > 0.0)) throw ConfigError("problem.m", "m must be positive");
    if (!(f.grid == g)) throw DimensionError("right-hand side lives on a different grid");
    const auto N = static_cast<Eigen::Index>(g.size());
    if (w.exterior.size() != N || w.nu.size() != N) throw DimensionError("weights do not match the grid");

    AssembledSystem sys(g);
    sys.m = m;
    sys.weighted_mass = w.weighted_mass;
    sys.A = Eigen::MatrixXd::Zero(N, N);
    Eigen::MatrixXd& A = sys.A;
    // column j holds row j by symmetry; each worker owns a block of columns
    parallel_for_blocks(static_cast<std::size_t>(N), resolve_threads(opt.threads), [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j)
            for (std::size_t i = 0; i < static_cast<std::size_t>(N); ++i)
                if (i != j)
                    A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                        -table.pair_integral(j, i) * w.pair(j, i);
    });
    for (Eigen::Index j = 0; j < N; ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            double v = 0.5 * (A(i, j) + A(j, i));
            A(i, j) = v;
            A(j, i) = v;
        }
    sys.exterior.resize(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < N; ++j)
            if (j != i) sum += std::abs(A(j, i));
        sys.exterior[i] = table.exterior_integral(static_cast<std::size_t>(i)) * w.exterior[i];
        A(i, i) = sum + sys.exterior[i];
    }
    const double vol = g.cell_volume();
    sys.nu = w.weighted_mass ? w.nu : Eigen::VectorXd::Ones(N);
    sys.M = vol * sys.nu;
    sys.b = vol * sys.nu.cwiseProduct(f.values);
    return sys;
}

AssembledSystem assemble_system(const Grid& g, const Kernel& k, const CoefficientField& c, double m,
                                const GridFunction& f, const TailPolicy& tail, const AssemblyOptions& opt)
{
    check_dims(g, c.dim(), "coefficient");
    KernelTable table(g, k, tail, opt.threads, opt.subsamples);
    return assemble_system(table, CellWeights::from_field(g, c, opt.subsamples), m, f, opt);
}

double gagliardo_seminorm_sq(const Grid& g, const GridFunction& u, double alpha, const TailPolicy& tail)
{
    if (!(u.grid == g)) throw DimensionError("function lives on a different grid");
    KernelTable table(g, Kernel::fractional_power(g.dim(), alpha), tail);
    AssembledSystem sys = assemble_system(table, CellWeights::unit(g), 1.0, GridFunction(g));
    return gagliardo_seminorm_sq(sys, u.values);
}

double gagliardo_seminorm_sq(const AssembledSystem& unit, const Eigen::VectorXd& u)
{
    if (u.size() != unit.A.rows()) throw DimensionError("vector does not match the system size");
    return 2.0 * u.dot(unit.A * u);
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& A)
{
    auto out = fmt::output_file(path);
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) out.print("{}{:.17g}", j == 0 ? "" : " ", A(i, j));
        out.print("\n");
    }
}

}  // namespace nhl
