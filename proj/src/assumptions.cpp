#include "nhl/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nhl/rng.hpp"

namespace nhl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Quadrature directions on the unit sphere: (+1, -1) with unit weights in d = 1, equispaced
/// trapezoid nodes with weight 2 pi / N in d = 2.
struct Directions {
    std::vector<Point> dirs;
    std::vector<double> weights;
};

Directions sphere_nodes(int dim, int nodes)
{
    Directions out;
    if (dim == 1) {
        out.dirs = {Point{1.0, 0.0}, Point{-1.0, 0.0}};
        out.weights = {1.0, 1.0};
        return out;
    }
    for (int i = 0; i < nodes; ++i) {
        double t = kTwoPi * i / nodes;
        out.dirs.push_back({std::cos(t), std::sin(t)});
        out.weights.push_back(kTwoPi / nodes);
    }
    return out;
}

/// \int_{S^{d-1}} g(theta) d theta, collapsing to one evaluation for radial kernels.
template <class G>
double sphere_integral(const Kernel& k, const Directions& nodes, G&& g)
{
    if (k.is_radial()) {
        double total = 0.0;
        for (double w : nodes.weights) total += w;
        return total * g(Point{1.0, 0.0});
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.dirs.size(); ++i) sum += nodes.weights[i] * g(nodes.dirs[i]);
    return sum;
}

quad::Options probe_quad(const ProbeConfig& probe)
{
    quad::Options opt = probe.closure.quad;
    opt.rel_tol = probe.tolerance;
    return opt;
}

TailClosure probe_closure(const ProbeConfig& probe)
{
    TailClosure c = probe.closure;
    c.quad = probe_quad(probe);
    return c;
}

void require_convolution(const Kernel& k, Assumption kind)
{
    if (k.family() != KernelFamily::Convolution)
        throw Error("assumption " + to_string(kind) + " requires a convolution kernel");
}

AssumptionReport check_symmetry(const Kernel& k, Assumption kind, const ProbeConfig& probe)
{
    CounterRng rng(probe.seed);
    const int d = k.dim();
    AssumptionReport rep;
    rep.kind = kind;
    rep.worst_radius = std::numeric_limits<double>::quiet_NaN();
    double worst = 0.0;
    bool nonnegative = true;
    for (std::size_t i = 0; i < probe.samples; ++i) {
        Point x{0.0, 0.0}, y{0.0, 0.0};
        for (int a = 0; a < d; ++a) {
            x[a] = 4.0 * rng.uniform(1, 4 * i + a) - 2.0;
            y[a] = 4.0 * rng.uniform(1, 4 * i + 2 + a) - 2.0;
        }
        double kxy = k(x, y), kyx = k(y, x);
        if (!(kxy >= 0.0) || !(kyx >= 0.0)) nonnegative = false;
        double diff = (std::isinf(kxy) && std::isinf(kyx)) ? 0.0 : std::abs(kxy - kyx);
        if (diff > worst || (i == 0)) {
            worst = std::max(worst, diff);
            rep.worst_point = kind == Assumption::A1_symmetry ? y - x : x;
        }
    }
    rep.witness_constant = worst;
    rep.passed = nonnegative && worst == 0.0;
    rep.detail = nonnegative ? "max |K(x,y) - K(y,x)| over sampled pairs" : "negative kernel value found";
    return rep;
}

AssumptionReport check_tail_convolution(const Kernel& k, const ProbeConfig& probe)
{
    Directions nodes = sphere_nodes(k.dim(), probe.angular_nodes);
    TailClosure closure = probe_closure(probe);
    AssumptionReport rep;
    rep.kind = Assumption::A3_tail;
    double sup = -1.0;
    for (double r : probe.radii) {
        double mass = sphere_integral(k, nodes, [&](const Point& dir) { return k.radial_tail_numeric(r, dir, closure); });
        double w = std::pow(r, k.alpha()) * mass;
        if (w > sup) {
            sup = w;
            rep.worst_radius = r;
        }
    }
    rep.witness_constant = sup;
    rep.passed = std::isfinite(sup) && sup <= probe.tail_bound;
    rep.detail = "sup_r r^alpha * int_{|z|>r} K";
    return rep;
}

AssumptionReport check_coercivity(const Kernel& k, const ProbeConfig& probe)
{
    Directions nodes = sphere_nodes(k.dim(), probe.angular_nodes);
    quad::Options opt = probe_quad(probe);
    std::vector<Point> tests;
    if (k.dim() == 1) {
        tests = {Point{1.0, 0.0}, Point{-1.0, 0.0}};
    } else {
        for (int i = 0; i < probe.coercivity_directions; ++i) {
            double t = kTwoPi * i / probe.coercivity_directions;
            tests.push_back({std::cos(t), std::sin(t)});
        }
    }
    AssumptionReport rep;
    rep.kind = Assumption::A4_coercivity;
    double inf = std::numeric_limits<double>::infinity();
    for (double r : probe.radii) {
        // radial second moments per sphere node, reused for every test direction e
        std::vector<double> moment(nodes.dirs.size());
        if (k.is_radial()) {
            double m = k.radial_second_moment(r, Point{1.0, 0.0}, opt);
            std::fill(moment.begin(), moment.end(), m);
        } else {
            for (std::size_t i = 0; i < nodes.dirs.size(); ++i)
                moment[i] = k.radial_second_moment(r, nodes.dirs[i], opt);
        }
        for (const Point& e : tests) {
            double sum = 0.0;
            for (std::size_t i = 0; i < nodes.dirs.size(); ++i) {
                double proj = e[0] * nodes.dirs[i][0] + e[1] * nodes.dirs[i][1];
                sum += nodes.weights[i] * proj * proj * moment[i];
            }
            double w = std::pow(r, k.alpha() - 2.0) * sum;
            if (w < inf) {
                inf = w;
                rep.worst_radius = r;
                rep.worst_point = e;
            }
        }
    }
    rep.witness_constant = inf;
    rep.passed = inf >= probe.coercivity_bound;
    rep.detail = "inf_{r,e} r^{alpha-2} int_{B_r} |e.z|^2 K";
    return rep;
}

AssumptionReport check_levy_khintchine(const Kernel& k, const ProbeConfig& probe)
{
    Directions nodes = sphere_nodes(k.dim(), probe.angular_nodes);
    TailClosure closure = probe_closure(probe);
    quad::Options opt = probe_quad(probe);
    double value = sphere_integral(k, nodes, [&](const Point& dir) {
        return k.radial_second_moment(1.0, dir, opt) + k.radial_tail_numeric(1.0, dir, closure);
    });
    AssumptionReport rep;
    rep.kind = Assumption::A2_levy_khintchine;
    rep.witness_constant = value;
    rep.worst_radius = 1.0;
    rep.passed = std::isfinite(value);
    rep.detail = "int min(1,|z|^2) K";
    return rep;
}

/// \int_r^\infty K(x, x + s dir) s^{d-1} ds with the power-law closure beyond r_far.
double general_ray_tail(const Kernel& k, const Point& x, const Point& dir, double r, const TailClosure& c)
{
    double d = k.dim();
    double far = std::max(r, c.r_far);
    auto along = [&](double s) { return k(x, x + s * dir); };
    double near = 0.0;
    if (far > r) {
        near = quad::smooth(
            [&](double t) {
                double s = std::exp(t);
                return along(s) * std::pow(s, d);
            },
            std::log(r), std::log(far), c.quad);
    }
    return near + along(far) * std::pow(far, d) / k.alpha();
}

AssumptionReport check_tail_general(const Kernel& k, const ProbeConfig& probe)
{
    Directions nodes = sphere_nodes(k.dim(), probe.angular_nodes);
    TailClosure closure = probe_closure(probe);
    CounterRng rng(probe.seed);
    std::size_t points = std::min<std::size_t>(probe.balls, 8);
    AssumptionReport rep;
    rep.kind = Assumption::B2_tail;
    double sup = -1.0;
    for (std::size_t p = 0; p < points; ++p) {
        Point x{0.0, 0.0};
        for (int a = 0; a < k.dim(); ++a) x[a] = 2.0 * rng.uniform(7, 2 * p + a) - 1.0;
        for (double r : probe.radii) {
            double mass = 0.0;
            for (std::size_t i = 0; i < nodes.dirs.size(); ++i)
                mass += nodes.weights[i] * general_ray_tail(k, x, nodes.dirs[i], r, closure);
            double w = std::pow(r, k.alpha()) * mass;
            if (w > sup) {
                sup = w;
                rep.worst_radius = r;
                rep.worst_point = x;
            }
        }
    }
    rep.witness_constant = sup;
    rep.passed = std::isfinite(sup) && sup <= probe.tail_bound;
    rep.detail = "sup_{x,r} r^alpha * int_{|y-x|>r} K(x,y) dy";
    return rep;
}

AssumptionReport check_lower_density(const Kernel& k, const ProbeConfig& probe)
{
    CounterRng rng(probe.seed);
    const int d = k.dim();
    const double c2 = probe.density_constant;
    AssumptionReport rep;
    rep.kind = Assumption::B3_lower_density;
    double min_fraction = std::numeric_limits<double>::infinity();
    double min_lower = std::numeric_limits<double>::infinity();
    auto in_ball = [&](std::uint64_t stream, std::uint64_t counter, const Point& c, double rad) {
        // rejection from the bounding cube, counter-advanced so draws stay reproducible
        for (std::uint64_t attempt = 0;; ++attempt) {
            Point p{0.0, 0.0};
            for (int a = 0; a < d; ++a)
                p[a] = 2.0 * rng.uniform(stream, (counter * 64 + attempt) * 2 + a) - 1.0;
            if (norm(p, d) <= 1.0) return c + rad * p;
        }
    };
    for (std::size_t b = 0; b < probe.balls; ++b) {
        double rad = std::pow(10.0, -2.0 + 3.0 * rng.uniform(11, b));
        Point center{0.0, 0.0};
        for (int a = 0; a < d; ++a) center[a] = 2.0 * rng.uniform(12, 2 * b + a) - 1.0;
        Point x = in_ball(13, b, center, rad);
        std::size_t hits = 0, trials = 0;
        for (std::size_t s = 0; s < probe.samples; ++s) {
            Point y = in_ball(14, b * probe.samples + s, center, rad);
            if (y == x) continue;
            ++trials;
            double r = norm(y - x, d);
            if (k(x, y) >= c2 * std::pow(r, -d - k.alpha())) ++hits;
        }
        double fraction = trials ? static_cast<double>(hits) / trials : 0.0;
        double lower = wilson_lower_bound(hits, trials, probe.wilson_z);
        if (fraction < min_fraction) {
            min_fraction = fraction;
            rep.worst_radius = rad;
            rep.worst_point = x;
        }
        min_lower = std::min(min_lower, lower);
    }
    rep.witness_constant = min_fraction;
    rep.passed = min_lower >= probe.density_fraction;
    std::ostringstream msg;
    msg << "min fraction of y in B with K(x,y) >= C2|x-y|^{-d-alpha}; min Wilson lower bound " << min_lower;
    rep.detail = msg.str();
    return rep;
}

}  // namespace

std::string to_string(Assumption a)
{
    switch (a) {
    case Assumption::A1_symmetry: return "A1_symmetry";
    case Assumption::A2_levy_khintchine: return "A2_levy_khintchine";
    case Assumption::A3_tail: return "A3_tail";
    case Assumption::A4_coercivity: return "A4_coercivity";
    case Assumption::B1_symmetry: return "B1_symmetry";
    case Assumption::B2_tail: return "B2_tail";
    case Assumption::B3_lower_density: return "B3_lower_density";
    }
    return "unknown";
}

Assumption assumption_from_string(const std::string& s)
{
    for (auto a : {Assumption::A1_symmetry, Assumption::A2_levy_khintchine, Assumption::A3_tail,
                   Assumption::A4_coercivity, Assumption::B1_symmetry, Assumption::B2_tail,
                   Assumption::B3_lower_density}) {
        std::string name = to_string(a);
        if (s == name || s == name.substr(0, 2)) return a;
    }
    throw ConfigError("assumption", "unknown assumption '" + s + "'");
}

std::vector<double> default_radius_ladder()
{
    std::vector<double> radii;
    for (int k = 0;; ++k) {
        double r = 1e-3 * std::ldexp(1.0, k);
        radii.push_back(r);
        if (r >= 1e3) break;
    }
    return radii;
}

double wilson_lower_bound(std::size_t successes, std::size_t trials, double z)
{
    if (trials == 0) return 0.0;
    double n = static_cast<double>(trials);
    double p = successes / n;
    double z2 = z * z;
    double center = p + z2 / (2.0 * n);
    double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return (center - spread) / (1.0 + z2 / n);
}

AssumptionReport verify_assumption(const Kernel& k, Assumption kind, const ProbeConfig& probe)
{
    switch (kind) {
    case Assumption::A1_symmetry: require_convolution(k, kind); return check_symmetry(k, kind, probe);
    case Assumption::A2_levy_khintchine: require_convolution(k, kind); return check_levy_khintchine(k, probe);
    case Assumption::A3_tail: require_convolution(k, kind); return check_tail_convolution(k, probe);
    case Assumption::A4_coercivity: require_convolution(k, kind); return check_coercivity(k, probe);
    case Assumption::B1_symmetry: return check_symmetry(k, kind, probe);
    case Assumption::B2_tail: return check_tail_general(k, probe);
    case Assumption::B3_lower_density: return check_lower_density(k, probe);
    }
    throw Error("unknown assumption kind");
}

}  // namespace nhl
