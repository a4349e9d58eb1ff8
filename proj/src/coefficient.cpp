#include "nhl/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nhl/rng.hpp"

namespace nhl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRangeSlack = 1e-12;

double frac(double t) { return t - std::floor(t); }

void check_range(const std::string& key, double lo, double hi, double gamma)
{
    if (!(gamma >= 1.0)) throw ConfigError("coeff.gamma", "gamma must be >= 1");
    if (lo < (1.0 / gamma) * (1.0 - kRangeSlack) || hi > gamma * (1.0 + kRangeSlack)) {
        std::ostringstream msg;
        msg << "range [" << lo << ", " << hi << "] is outside [1/gamma, gamma] = [" << 1.0 / gamma << ", "
            << gamma << "]";
        throw ConfigError(key, msg.str());
    }
}

void check_dim(int dim)
{
    if (dim != 1 && dim != 2) throw ConfigError("grid.dim", "dimension must be 1 or 2");
}

void check_epsilon(double eps)
{
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("sweep.epsilons", "epsilon must be positive");
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// CellFunction

CellFunction CellFunction::constant(double c)
{
    if (!(c > 0.0)) throw ConfigError("coeff", "constant cell function must be positive");
    return CellFunction(Kind::Constant, c, c, 1.0, 0);
}

CellFunction CellFunction::two_phase(double a, double b, double fraction)
{
    if (!(a > 0.0 && b > 0.0)) throw ConfigError("coeff", "two-phase values must be positive");
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("coeff", "two-phase fraction must lie in (0,1)");
    return CellFunction(Kind::TwoPhase, a, b, fraction, 0);
}

CellFunction CellFunction::cosine(double a, double b, int axis)
{
    if (!(a > 0.0 && b > 0.0)) throw ConfigError("coeff", "cosine extremes must be positive");
    if (axis < 0 || axis > 1) throw ConfigError("coeff", "cosine axis must be 0 or 1");
    return CellFunction(Kind::Cosine, a, b, 0.0, axis);
}

double CellFunction::operator()(const Point& xi) const
{
    switch (kind_) {
    case Kind::Constant: return a_;
    case Kind::TwoPhase: return frac(xi[0]) < fraction_ ? a_ : b_;
    case Kind::Cosine: return 0.5 * (a_ + b_) + 0.5 * (a_ - b_) * std::cos(kTwoPi * xi[axis_]);
    }
    return a_;
}

double CellFunction::min_value() const { return std::min(a_, b_); }
double CellFunction::max_value() const { return std::max(a_, b_); }

// ---------------------------------------------------------------------------------------------
// SymmetricCoefficient

SymmetricCoefficient SymmetricCoefficient::separable_cosine(double base, double amplitude, int axis)
{
    if (!(base > std::abs(amplitude))) throw ConfigError("coeff.symmetric", "need base > |amplitude|");
    if (axis < 0 || axis > 1) throw ConfigError("coeff.symmetric", "axis must be 0 or 1");
    SymmetricCoefficient s;
    s.kind_ = Kind::SeparableCosine;
    s.base_ = base;
    s.amplitude_ = amplitude;
    s.axis_ = axis;
    return s;
}

SymmetricCoefficient SymmetricCoefficient::symmetrized_pair(CellFunction lambda, CellFunction mu)
{
    SymmetricCoefficient s;
    s.kind_ = Kind::SymmetrizedPair;
    s.lambda_ = lambda;
    s.mu_ = mu;
    return s;
}

SymmetricCoefficient SymmetricCoefficient::slow_separable(double base, double amplitude, double slow_amplitude)
{
    if (!(base > std::abs(amplitude))) throw ConfigError("coeff.symmetric", "need base > |amplitude|");
    if (!(std::abs(slow_amplitude) < 1.0)) throw ConfigError("coeff.symmetric", "need |slow_amplitude| < 1");
    SymmetricCoefficient s;
    s.kind_ = Kind::SlowSeparable;
    s.base_ = base;
    s.amplitude_ = amplitude;
    s.slow_amplitude_ = slow_amplitude;
    return s;
}

SymmetricCoefficient SymmetricCoefficient::custom(Map map, double lower, double upper)
{
    if (!map) throw ConfigError("coeff.symmetric", "custom map is empty");
    if (!(lower > 0.0 && upper >= lower)) throw ConfigError("coeff.symmetric", "invalid declared range");
    SymmetricCoefficient s;
    s.kind_ = Kind::Custom;
    s.custom_ = std::move(map);
    s.lower_ = lower;
    s.upper_ = upper;
    return s;
}

double SymmetricCoefficient::slow(const Point& x, const Point& y) const
{
    if (kind_ == Kind::SlowSeparable)
        return 1.0 + slow_amplitude_ * (std::cos(std::numbers::pi * x[0]) * std::cos(std::numbers::pi * y[0]));
    return 1.0;
}

double SymmetricCoefficient::fast(const Point& xi, const Point& eta) const
{
    switch (kind_) {
    case Kind::SeparableCosine:
    case Kind::SlowSeparable:
        return base_ + amplitude_ * (std::cos(kTwoPi * xi[axis_]) * std::cos(kTwoPi * eta[axis_]));
    case Kind::SymmetrizedPair:
        return 0.5 * ((*lambda_)(xi) * (*mu_)(eta) + (*lambda_)(eta) * (*mu_)(xi));
    case Kind::Custom: break;
    }
    throw Error("fast(): custom symmetric coefficients are not separable");
}

double SymmetricCoefficient::operator()(const Point& x, const Point& y, const Point& xi, const Point& eta) const
{
    if (kind_ == Kind::Custom) {
        // average the two argument orders so the swap symmetry holds bit for bit
        return 0.5 * (custom_(x, y, xi, eta) + custom_(y, x, eta, xi));
    }
    return slow(x, y) * fast(xi, eta);
}

double SymmetricCoefficient::min_value() const
{
    switch (kind_) {
    case Kind::SeparableCosine: return base_ - std::abs(amplitude_);
    case Kind::SlowSeparable: return (1.0 - std::abs(slow_amplitude_)) * (base_ - std::abs(amplitude_));
    case Kind::SymmetrizedPair: return lambda_->min_value() * mu_->min_value();
    case Kind::Custom: return lower_;
    }
    return lower_;
}

double SymmetricCoefficient::max_value() const
{
    switch (kind_) {
    case Kind::SeparableCosine: return base_ + std::abs(amplitude_);
    case Kind::SlowSeparable: return (1.0 + std::abs(slow_amplitude_)) * (base_ + std::abs(amplitude_));
    case Kind::SymmetrizedPair: return lambda_->max_value() * mu_->max_value();
    case Kind::Custom: return upper_;
    }
    return upper_;
}

// ---------------------------------------------------------------------------------------------
// CoefficientField

std::string to_string(Structure s)
{
    switch (s) {
    case Structure::PeriodicProduct: return "periodic_product";
    case Structure::PeriodicSymmetric: return "periodic_symmetric";
    case Structure::RandomProduct: return "random_product";
    case Structure::RandomSymmetric: return "random_symmetric";
    case Structure::RandomCheckerboardProduct: return "random_checkerboard_product";
    }
    return "unknown";
}

Structure structure_from_string(const std::string& s)
{
    for (auto v : {Structure::PeriodicProduct, Structure::PeriodicSymmetric, Structure::RandomProduct,
                   Structure::RandomSymmetric, Structure::RandomCheckerboardProduct})
        if (to_string(v) == s) return v;
    throw ConfigError("coeff.structure", "unknown structure '" + s + "'");
}

CoefficientField CoefficientField::periodic_product(int dim, CellFunction lambda, CellFunction mu, double gamma,
                                                    double epsilon)
{
    check_dim(dim);
    check_epsilon(epsilon);
    check_range("coeff.lambda", lambda.min_value(), lambda.max_value(), gamma);
    check_range("coeff.mu", mu.min_value(), mu.max_value(), gamma);
    CoefficientField c;
    c.structure_ = Structure::PeriodicProduct;
    c.dim_ = dim;
    c.gamma_ = gamma;
    c.epsilon_ = epsilon;
    c.lambda_ = lambda;
    c.mu_ = mu;
    return c;
}

CoefficientField CoefficientField::random_product(int dim, CellFunction lambda, CellFunction mu, double gamma,
                                                  double epsilon)
{
    CoefficientField c = periodic_product(dim, lambda, mu, gamma, epsilon);
    c.structure_ = Structure::RandomProduct;
    return c;
}

CoefficientField CoefficientField::periodic_symmetric(int dim, SymmetricCoefficient lambda, double gamma,
                                                      double epsilon)
{
    check_dim(dim);
    check_epsilon(epsilon);
    check_range("coeff.symmetric", lambda.min_value(), lambda.max_value(), gamma);
    CoefficientField c;
    c.structure_ = Structure::PeriodicSymmetric;
    c.dim_ = dim;
    c.gamma_ = gamma;
    c.epsilon_ = epsilon;
    c.symmetric_ = std::move(lambda);
    return c;
}

CoefficientField CoefficientField::random_symmetric(int dim, SymmetricCoefficient lambda, double gamma,
                                                    double epsilon)
{
    CoefficientField c = periodic_symmetric(dim, std::move(lambda), gamma, epsilon);
    c.structure_ = Structure::RandomSymmetric;
    return c;
}

CoefficientField CoefficientField::random_checkerboard_product(int dim, CheckerboardLaw lambda, CellFunction mu,
                                                               double gamma, double epsilon)
{
    check_dim(dim);
    check_epsilon(epsilon);
    if (!(lambda.a > 0.0 && lambda.b > 0.0)) throw ConfigError("coeff.lambda", "checkerboard values must be positive");
    if (!(lambda.q >= 0.0 && lambda.q <= 1.0)) throw ConfigError("coeff.lambda", "checkerboard probability must lie in [0,1]");
    check_range("coeff.lambda", std::min(lambda.a, lambda.b), std::max(lambda.a, lambda.b), gamma);
    check_range("coeff.mu", mu.min_value(), mu.max_value(), gamma);
    CoefficientField c;
    c.structure_ = Structure::RandomCheckerboardProduct;
    c.dim_ = dim;
    c.gamma_ = gamma;
    c.epsilon_ = epsilon;
    c.checkerboard_ = lambda;
    c.mu_ = mu;
    return c;
}

bool CoefficientField::is_random() const
{
    return structure_ == Structure::RandomProduct || structure_ == Structure::RandomSymmetric ||
           structure_ == Structure::RandomCheckerboardProduct;
}

bool CoefficientField::is_product() const
{
    return structure_ == Structure::PeriodicProduct || structure_ == Structure::RandomProduct ||
           structure_ == Structure::RandomCheckerboardProduct;
}

CoefficientField CoefficientField::with_epsilon(double epsilon) const
{
    check_epsilon(epsilon);
    CoefficientField c = *this;
    c.epsilon_ = epsilon;
    return c;
}

void CoefficientField::require_realization() const
{
    if (is_random() && !realization_)
        throw Error("random coefficient field evaluated before a realization was drawn");
}

Point CoefficientField::fast(const Point& x) const
{
    Point xi{x[0] / epsilon_, dim_ == 2 ? x[1] / epsilon_ : 0.0};
    return xi;
}

double CoefficientField::lambda_fast(const Point& xi, const Point& shift, std::uint64_t seed) const
{
    Point s = xi + shift;
    if (checkerboard_) {
        auto i = static_cast<std::int64_t>(std::floor(s[0]));
        auto j = dim_ == 2 ? static_cast<std::int64_t>(std::floor(s[1])) : 0;
        CounterRng rng(seed);
        return rng.uniform(0x636865636bULL, lattice_counter(i, j)) < checkerboard_->q ? checkerboard_->a
                                                                                       : checkerboard_->b;
    }
    if (!lambda_) throw Error("lambda is defined for product structures only");
    return (*lambda_)(s);
}

double CoefficientField::mu_fast(const Point& xi, const Point& shift) const
{
    if (!mu_) throw Error("mu is defined for product structures only");
    return (*mu_)(xi + shift);
}

Point CoefficientField::fast_point(const Point& x) const
{
    require_realization();
    return realization_ ? fast(x) + realization_->shift : fast(x);
}

double CoefficientField::lambda_at(const Point& x) const
{
    require_realization();
    Point shift = realization_ ? realization_->shift : Point{0.0, 0.0};
    std::uint64_t seed = realization_ ? realization_->seed : 0;
    return lambda_fast(fast(x), shift, seed);
}

double CoefficientField::mu_at(const Point& x) const
{
    require_realization();
    Point shift = realization_ ? realization_->shift : Point{0.0, 0.0};
    return mu_fast(fast(x), shift);
}

double CoefficientField::operator()(const Point& x, const Point& y) const
{
    if (is_product()) return lambda_at(x) * mu_at(y);
    require_realization();
    Point shift = realization_ ? realization_->shift : Point{0.0, 0.0};
    return (*symmetric_)(x, y, fast(x) + shift, fast(y) + shift);
}

double CoefficientField::nu(const Point& x) const
{
    if (!is_product()) throw Error("nu is defined for product structures only");
    return mu_at(x) / lambda_at(x);
}

CoefficientField draw_realization(const CoefficientField& c, std::uint64_t seed)
{
    if (!c.is_random())
        throw ConfigError("coeff.structure", "draw_realization called on a periodic structure");
    CounterRng rng(seed);
    Realization r;
    r.seed = seed;
    r.shift[0] = rng.uniform(0x7368696674ULL, 0);
    r.shift[1] = c.dim() == 2 ? rng.uniform(0x7368696674ULL, 1) : 0.0;
    CoefficientField out = c;
    out.realization_ = r;
    return out;
}

double eval_coeff(const CoefficientField& c, std::span<const double> x, std::span<const double> y)
{
    return c(to_point(x, c.dim()), to_point(y, c.dim()));
}

double eval_nu(const CoefficientField& c, std::span<const double> x) { return c.nu(to_point(x, c.dim())); }

}  // namespace nhl
