#include "nhl/effective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "nhl/rng.hpp"

namespace nhl {

namespace {

constexpr double kRichardsonTol = 1e-8;

struct Rule1d {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Midpoint rule on [0,1) with q nodes on every piece between consecutive breakpoints.
Rule1d midpoint_rule(std::vector<double> breaks, int q)
{
    breaks.push_back(0.0);
    breaks.push_back(1.0);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    Rule1d r;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        double a = breaks[k], len = breaks[k + 1] - a;
        for (int i = 0; i < q; ++i) {
            r.nodes.push_back(a + (i + 0.5) * len / q);
            r.weights.push_back(len / q);
        }
    }
    return r;
}

std::vector<double> breakpoints(const std::optional<CellFunction>& f, int axis)
{
    if (f && f->kind() == CellFunction::Kind::TwoPhase && axis == 0) return {f->fraction()};
    return {};
}

// Tensor midpoint average of g over [0,1)^dim.
template <class G>
double tensor_average(G&& g, int dim, const std::vector<double>& breaks0, const std::vector<double>& breaks1, int q)
{
    Rule1d r0 = midpoint_rule(breaks0, q);
    if (dim == 1) {
        double s = 0.0;
        for (std::size_t i = 0; i < r0.nodes.size(); ++i) s += r0.weights[i] * g(Point{r0.nodes[i], 0.0});
        return s;
    }
    Rule1d r1 = midpoint_rule(breaks1, q);
    double s = 0.0;
    for (std::size_t i = 0; i < r0.nodes.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < r1.nodes.size(); ++j) row += r1.weights[j] * g(Point{r0.nodes[i], r1.nodes[j]});
        s += r0.weights[i] * row;
    }
    return s;
}

template <class G>
double checked_average(G&& g, int dim, const std::vector<double>& b0, const std::vector<double>& b1, int q,
                       double scale)
{
    double coarse = tensor_average(g, dim, b0, b1, q);
    double fine = tensor_average(g, dim, b0, b1, 2 * q);
    if (std::abs(fine - coarse) > kRichardsonTol * std::max(std::abs(fine), scale))
        throw QuadratureError("effective coefficient: midpoint refinement changed the cell average by " +
                              std::to_string(std::abs(fine - coarse)));
    return fine;
}

double mean_cos(int q)
{
    return checked_average([](const Point& t) { return std::cos(2.0 * std::numbers::pi * t[0]); }, 1, {}, {}, q,
                           1.0);
}

// Cell mean of the fast factor of a separable symmetric catalog entry.
double symmetric_fast_mean(const SymmetricCoefficient& s, int dim, int q)
{
    switch (s.kind()) {
    case SymmetricCoefficient::Kind::SeparableCosine:
    case SymmetricCoefficient::Kind::SlowSeparable: {
        double c = mean_cos(q);
        return s.base() + s.amplitude() * c * c;
    }
    case SymmetricCoefficient::Kind::SymmetrizedPair:
        return cell_average(*s.lambda(), dim, q) * cell_average(*s.mu(), dim, q);
    case SymmetricCoefficient::Kind::Custom: break;
    }
    throw Error("symmetric_fast_mean: custom maps have no separable mean");
}

void check_quadrature(const EffectiveQuadrature& quad)
{
    if (quad.q < 64) throw ConfigError("coeff.q_values", "cell quadrature needs at least 64 nodes per axis");
    if (quad.monte_carlo && quad.mc_samples < 1000)
        throw ConfigError("coeff.mc_samples", "Monte Carlo averages need at least 1000 samples");
}

struct Moments {
    double mean_a = 0.0, mean_b = 0.0, var_a = 0.0, var_b = 0.0, cov = 0.0;
};

template <class Sample>
Moments sample_moments(std::size_t n, Sample&& sample)
{
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto [x, y] = sample(k);
        a[k] = x;
        b[k] = y;
    }
    Moments m;
    for (std::size_t k = 0; k < n; ++k) {
        m.mean_a += a[k];
        m.mean_b += b[k];
    }
    m.mean_a /= n;
    m.mean_b /= n;
    for (std::size_t k = 0; k < n; ++k) {
        m.var_a += (a[k] - m.mean_a) * (a[k] - m.mean_a);
        m.var_b += (b[k] - m.mean_b) * (b[k] - m.mean_b);
        m.cov += (a[k] - m.mean_a) * (b[k] - m.mean_b);
    }
    m.var_a /= (n - 1);
    m.var_b /= (n - 1);
    m.cov /= (n - 1);
    return m;
}

void check_stderr(double se, const EffectiveQuadrature& quad)
{
    if (!(se <= quad.stderr_cap))
        throw Error("effective coefficient: Monte Carlo standard error " + std::to_string(se) +
                    " exceeds the configured cap");
}

EffectiveCoefficient product_effective(const CoefficientField& c, const EffectiveQuadrature& quad)
{
    EffectiveCoefficient e;
    e.kind = EffectiveCoefficient::Kind::ConstantScalar;
    const int dim = c.dim();

    if (c.is_random() && quad.monte_carlo) {
        // ratio estimator A^2 / B with a delta-method standard error
        Moments m = sample_moments(quad.mc_samples, [&](std::size_t k) {
            CoefficientField r = draw_realization(c, CounterRng(quad.seed).bits(0x6d63, k));
            Point x{0.0, 0.0};
            double mu = r.mu_at(x);
            return std::pair{mu, mu / r.lambda_at(x)};
        });
        double a = m.mean_a, b = m.mean_b;
        double ga = 2.0 * a / b, gb = -a * a / (b * b);
        double var = ga * ga * m.var_a + gb * gb * m.var_b + 2.0 * ga * gb * m.cov;
        e.value = a * a / b;
        e.mc_stderr = std::sqrt(std::max(var, 0.0) / quad.mc_samples);
        e.mu_mean = a;
        e.nu_mean = b;
        check_stderr(*e.mc_stderr, quad);
        return e;
    }

    const CellFunction& mu = *c.mu_template();
    if (c.checkerboard()) {
        const CheckerboardLaw& law = *c.checkerboard();
        double mu_mean = cell_average(mu, dim, quad.q);
        double inv_lambda = law.q / law.a + (1.0 - law.q) / law.b;
        e.mu_mean = mu_mean;
        e.nu_mean = mu_mean * inv_lambda;
        e.value = mu_mean * mu_mean / e.nu_mean;
        return e;
    }

    // periodic, or shifted periodic whose expectation is the cell average
    const CellFunction& lambda = *c.lambda_template();
    std::vector<double> b0 = breakpoints(c.lambda_template(), 0), b1;
    for (double t : breakpoints(c.mu_template(), 0)) b0.push_back(t);
    double scale = mu.max_value() / lambda.min_value();
    e.mu_mean = checked_average([&](const Point& xi) { return mu(xi); }, dim, b0, b1, quad.q, mu.max_value());
    e.nu_mean = checked_average([&](const Point& xi) { return mu(xi) / lambda(xi); }, dim, b0, b1, quad.q, scale);
    e.value = e.mu_mean * e.mu_mean / e.nu_mean;
    return e;
}

EffectiveCoefficient symmetric_effective(const CoefficientField& c, const EffectiveQuadrature& quad)
{
    const SymmetricCoefficient& s = *c.symmetric();
    const int dim = c.dim();
    EffectiveCoefficient e;
    e.kind = EffectiveCoefficient::Kind::TwoPointMap;

    if (s.separable() && !(c.is_random() && quad.monte_carlo)) {
        double fast = symmetric_fast_mean(s, dim, quad.q);
        e.value = fast;
        e.map = [s, fast](const Point& x, const Point& y) { return s.slow(x, y) * fast; };
        return e;
    }

    if (dim == 1 && !quad.monte_carlo) {
        // tensor midpoint rule over the (xi, eta) cell
        auto average = [s](const Point& x, const Point& y, int q) {
            double sum = 0.0;
            for (int i = 0; i < q; ++i)
                for (int j = 0; j < q; ++j)
                    sum += s(x, y, Point{(i + 0.5) / q, 0.0}, Point{(j + 0.5) / q, 0.0});
            return sum / (double(q) * q);
        };
        const Point origin{0.0, 0.0};
        double coarse = average(origin, origin, quad.q), fine = average(origin, origin, 2 * quad.q);
        if (std::abs(fine - coarse) > kRichardsonTol * std::max(std::abs(fine), s.max_value()))
            throw QuadratureError("effective coefficient: midpoint refinement changed the cell average by " +
                                  std::to_string(std::abs(fine - coarse)));
        const int q = 2 * quad.q;
        e.value = fine;
        e.map = [average, q](const Point& x, const Point& y) { return average(x, y, q); };
        return e;
    }

    // sampled fast variables, independent for the two arguments
    const std::size_t n = quad.mc_samples;
    std::vector<Point> xi(n), eta(n);
    CounterRng rng(quad.seed);
    for (std::size_t k = 0; k < n; ++k) {
        xi[k] = {rng.uniform(1, 2 * k), dim == 2 ? rng.uniform(1, 2 * k + 1) : 0.0};
        eta[k] = {rng.uniform(2, 2 * k), dim == 2 ? rng.uniform(2, 2 * k + 1) : 0.0};
    }
    auto estimate = [s, xi, eta](const Point& x, const Point& y) {
        double sum = 0.0;
        for (std::size_t k = 0; k < xi.size(); ++k) sum += s(x, y, xi[k], eta[k]);
        return sum / xi.size();
    };
    Point origin{0.0, 0.0};
    Moments m = sample_moments(n, [&](std::size_t k) {
        double v = s(origin, origin, xi[k], eta[k]);
        return std::pair{v, v};
    });
    e.value = m.mean_a;
    e.mc_stderr = std::sqrt(m.var_a / n);
    check_stderr(*e.mc_stderr, quad);
    e.map = estimate;
    return e;
}

}  // namespace

double cell_average(const CellFunction& f, int dim, int q)
{
    std::optional<CellFunction> opt = f;
    return checked_average([&](const Point& xi) { return f(xi); }, dim, breakpoints(opt, 0), {}, q, f.max_value());
}

EffectiveCoefficient effective_coefficient(const CoefficientField& c, const EffectiveQuadrature& quad)
{
    check_quadrature(quad);
    if (c.is_product()) return product_effective(c, quad);
    return symmetric_effective(c, quad);
}

}  // namespace nhl
