#include "nhl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nhl/quadrature.hpp"

namespace nhl {

Grid::Grid(int dim, double half_width, int n) : dim_(dim), L_(half_width), n_(n), h_(0.0)
{
    if (dim != 1 && dim != 2) throw ConfigError("grid.dim", "dimension must be 1 or 2");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw ConfigError("grid.box_halfwidth", "box half-width must be positive");
    if (n < 1) throw ConfigError("grid.n", "grid needs at least one cell per axis");
    h_ = 2.0 * L_ / n_;
}

Point Grid::lower(std::size_t cell) const
{
    auto [i, j] = index(cell);
    return {-L_ + i * h_, dim_ == 2 ? -L_ + j * h_ : 0.0};
}

Point Grid::center(std::size_t cell) const
{
    Point p = lower(cell);
    p[0] += 0.5 * h_;
    if (dim_ == 2) p[1] += 0.5 * h_;
    return p;
}

GridFunction::GridFunction(const Grid& g, Eigen::VectorXd v) : grid(g), values(std::move(v))
{
    if (static_cast<std::size_t>(values.size()) != g.size())
        throw DimensionError("grid function has " + std::to_string(values.size()) + " values, grid has " +
                             std::to_string(g.size()) + " cells");
}

FunctionSpec FunctionSpec::gaussian(Point center, double width, double amplitude)
{
    if (!(width > 0.0)) throw ConfigError("problem.f", "Gaussian width must be positive");
    FunctionSpec f;
    f.kind = Kind::GaussianBump;
    f.center = center;
    f.width = width;
    f.amplitude = amplitude;
    return f;
}

FunctionSpec FunctionSpec::cosine_bump(Point center, double radius, double amplitude)
{
    if (!(radius > 0.0)) throw ConfigError("problem.f", "cosine bump radius must be positive");
    FunctionSpec f;
    f.kind = Kind::CosineBump;
    f.center = center;
    f.width = radius;
    f.amplitude = amplitude;
    return f;
}

FunctionSpec FunctionSpec::indicator(Point lo, Point hi, double amplitude)
{
    FunctionSpec f;
    f.kind = Kind::Indicator;
    f.lo = lo;
    f.hi = hi;
    f.amplitude = amplitude;
    return f;
}

double FunctionSpec::operator()(const Point& x, int dim) const
{
    switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::GaussianBump: {
        double r = norm(x - center, dim);
        return amplitude * std::exp(-r * r / (2.0 * width * width));
    }
    case Kind::CosineBump: {
        double r = norm(x - center, dim);
        return r < width ? amplitude * 0.5 * (1.0 + std::cos(std::numbers::pi * r / width)) : 0.0;
    }
    case Kind::Indicator:
        for (int k = 0; k < dim; ++k)
            if (x[k] < lo[k] || x[k] > hi[k]) return 0.0;
        return amplitude;
    }
    return 0.0;
}

std::string to_string(FunctionSpec::Kind k)
{
    switch (k) {
    case FunctionSpec::Kind::Zero: return "zero";
    case FunctionSpec::Kind::GaussianBump: return "gaussian";
    case FunctionSpec::Kind::CosineBump: return "cosine_bump";
    case FunctionSpec::Kind::Indicator: return "indicator";
    }
    return "unknown";
}

FunctionSpec::Kind function_kind_from_string(const std::string& s)
{
    for (auto k : {FunctionSpec::Kind::Zero, FunctionSpec::Kind::GaussianBump, FunctionSpec::Kind::CosineBump,
                   FunctionSpec::Kind::Indicator})
        if (to_string(k) == s) return k;
    throw ConfigError("problem.f.type", "unknown function '" + s + "'");
}

GridFunction project(const Grid& g, const FunctionSpec& f)
{
    GridFunction u(g);
    if (f.kind == FunctionSpec::Kind::Zero) return u;
    const double h = g.h();
    for (std::size_t c = 0; c < g.size(); ++c) {
        Point lo = g.lower(c);
        double avg;
        if (f.kind == FunctionSpec::Kind::Indicator) {
            avg = f.amplitude;
            for (int a = 0; a < g.dim(); ++a)
                avg *= std::max(0.0, std::min(lo[a] + h, f.hi[a]) - std::max(lo[a], f.lo[a])) / h;
        } else if (g.dim() == 1) {
            avg = quad::gauss([&](double x) { return f(Point{x, 0.0}, 1); }, lo[0], lo[0] + h, 4) / h;
        } else {
            avg = quad::gauss(
                      [&](double x) {
                          return quad::gauss([&](double y) { return f(Point{x, y}, 2); }, lo[1], lo[1] + h, 4);
                      },
                      lo[0], lo[0] + h, 4) /
                  (h * h);
        }
        u.values[static_cast<Eigen::Index>(c)] = avg;
    }
    return u;
}

double mass_outside_box(const Grid& g, const FunctionSpec& f)
{
    const double L = g.half_width();
    const int d = g.dim();
    switch (f.kind) {
    case FunctionSpec::Kind::Zero: return 0.0;
    case FunctionSpec::Kind::Indicator:
    case FunctionSpec::Kind::CosineBump: {
        // compact support: compare the support box with [-L, L]^d
        bool inside = true;
        for (int k = 0; k < d; ++k) {
            double lo = f.kind == FunctionSpec::Kind::Indicator ? f.lo[k] : f.center[k] - f.width;
            double hi = f.kind == FunctionSpec::Kind::Indicator ? f.hi[k] : f.center[k] + f.width;
            inside = inside && lo >= -L && hi <= L;
        }
        if (inside) return 0.0;
        break;
    }
    case FunctionSpec::Kind::GaussianBump: {
        double inside = 1.0;
        for (int k = 0; k < d; ++k) {
            double s = f.width * std::sqrt(2.0);
            inside *= 0.5 * (std::erf((L - f.center[k]) / s) - std::erf((-L - f.center[k]) / s));
        }
        return 1.0 - inside;
    }
    }
    // generic: compare the projected mass on a fine grid with a padded one
    Grid fine(d, L, 256);
    Grid wide(d, 4.0 * L, 1024);
    double in = project(fine, f).values.cwiseAbs().sum() * fine.cell_volume();
    double all = project(wide, f).values.cwiseAbs().sum() * wide.cell_volume();
    return all > 0.0 ? std::max(0.0, 1.0 - in / all) : 0.0;
}

double inner_product(const GridFunction& u, const GridFunction& v)
{
    if (!(u.grid == v.grid)) throw DimensionError("inner product of functions on different grids");
    return u.grid.cell_volume() * u.values.dot(v.values);
}

double l2_norm(const GridFunction& u) { return std::sqrt(inner_product(u, u)); }

}  // namespace nhl
