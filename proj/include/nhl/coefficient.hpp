#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "nhl/types.hpp"

namespace nhl {

/// A 1-periodic scalar function of the fast variable.
class CellFunction {
public:
    enum class Kind { Constant, TwoPhase, Cosine };

    static CellFunction constant(double c);
    /// `a` where frac(xi_1) < fraction, `b` elsewhere.
    static CellFunction two_phase(double a, double b, double fraction);
    /// (a+b)/2 + (a-b)/2 cos(2 pi xi_axis): equals a at xi = 0 and b at xi = 1/2. `axis` is 0-based.
    static CellFunction cosine(double a, double b, int axis = 0);

    double operator()(const Point& xi) const;

    Kind kind() const { return kind_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double fraction() const { return fraction_; }
    int axis() const { return axis_; }
    double min_value() const;
    double max_value() const;
    bool is_constant() const { return kind_ == Kind::Constant; }

private:
    CellFunction(Kind kind, double a, double b, double fraction, int axis)
        : kind_(kind), a_(a), b_(b), fraction_(fraction), axis_(axis)
    {
    }

    Kind kind_;
    double a_;
    double b_;
    double fraction_;
    int axis_;
};

/// Symmetric four-argument coefficient Lambda(x, y, xi, eta), 1-periodic in xi and eta.
///
/// Catalog entries factor as slow(x, y) * fast(xi, eta) so their cell average has a checkable
/// closed form; custom maps are accepted with declared bounds and averaged numerically.
class SymmetricCoefficient {
public:
    enum class Kind { SeparableCosine, SymmetrizedPair, SlowSeparable, Custom };
    using Map = std::function<double(const Point&, const Point&, const Point&, const Point&)>;

    /// base + amplitude cos(2 pi xi_axis) cos(2 pi eta_axis).
    static SymmetricCoefficient separable_cosine(double base, double amplitude, int axis = 0);
    /// (lambda(xi) mu(eta) + lambda(eta) mu(xi)) / 2.
    static SymmetricCoefficient symmetrized_pair(CellFunction lambda, CellFunction mu);
    /// (1 + slow_amplitude cos(pi x_1) cos(pi y_1)) (base + amplitude cos(2 pi xi_1) cos(2 pi eta_1)).
    static SymmetricCoefficient slow_separable(double base, double amplitude, double slow_amplitude);
    /// User map with declared range [lower, upper]; must satisfy
    /// map(x, y, xi, eta) = map(y, x, eta, xi) = map(x, y, eta, xi).
    static SymmetricCoefficient custom(Map map, double lower, double upper);

    double operator()(const Point& x, const Point& y, const Point& xi, const Point& eta) const;

    Kind kind() const { return kind_; }
    bool separable() const { return kind_ != Kind::Custom; }
    double slow(const Point& x, const Point& y) const;
    double fast(const Point& xi, const Point& eta) const;
    double min_value() const;
    double max_value() const;

    double base() const { return base_; }
    double amplitude() const { return amplitude_; }
    double slow_amplitude() const { return slow_amplitude_; }
    int axis() const { return axis_; }
    const std::optional<CellFunction>& lambda() const { return lambda_; }
    const std::optional<CellFunction>& mu() const { return mu_; }

private:
    SymmetricCoefficient() = default;

    Kind kind_ = Kind::SeparableCosine;
    double base_ = 1.0;
    double amplitude_ = 0.0;
    double slow_amplitude_ = 0.0;
    int axis_ = 0;
    std::optional<CellFunction> lambda_;
    std::optional<CellFunction> mu_;
    Map custom_;
    double lower_ = 0.0;
    double upper_ = 0.0;
};

/// Two-valued i.i.d. lattice law: each unit cell takes `a` with probability q, else `b`.
struct CheckerboardLaw {
    double a = 1.0;
    double b = 2.0;
    double q = 0.5;
};

enum class Structure {
    PeriodicProduct,
    PeriodicSymmetric,
    RandomProduct,
    RandomSymmetric,
    RandomCheckerboardProduct,
};

std::string to_string(Structure s);
Structure structure_from_string(const std::string& s);

/// Drawn randomness of a stationary field: the global shift U in [0,1)^d; checkerboard cell
/// values are derived lazily from (seed, cell index).
struct Realization {
    std::uint64_t seed = 0;
    Point shift{0.0, 0.0};
};

/// Oscillating coefficient Lambda^eps(x, y) in one of the product or symmetric structures.
///
/// Product structures evaluate lambda(x/eps) mu(y/eps); random ones shift the fast variable
/// by the realization's U (and, for the checkerboard, look up i.i.d. cell values). The bound
/// gamma is enforced when the field is built: out-of-range parameters are rejected.
class CoefficientField {
public:
    static CoefficientField periodic_product(int dim, CellFunction lambda, CellFunction mu, double gamma,
                                             double epsilon);
    static CoefficientField periodic_symmetric(int dim, SymmetricCoefficient lambda, double gamma,
                                               double epsilon);
    static CoefficientField random_product(int dim, CellFunction lambda, CellFunction mu, double gamma,
                                           double epsilon);
    static CoefficientField random_symmetric(int dim, SymmetricCoefficient lambda, double gamma,
                                             double epsilon);
    /// lambda is the shifted checkerboard, mu a periodic template under the same shift.
    static CoefficientField random_checkerboard_product(int dim, CheckerboardLaw lambda, CellFunction mu,
                                                        double gamma, double epsilon);

    Structure structure() const { return structure_; }
    bool is_random() const;
    bool is_product() const;
    int dim() const { return dim_; }
    double gamma() const { return gamma_; }
    double epsilon() const { return epsilon_; }
    const std::optional<Realization>& realization() const { return realization_; }

    /// Same structure at a different oscillation scale (realization kept).
    CoefficientField with_epsilon(double epsilon) const;

    /// lambda, mu (product) at the physical point x; requires a realization when random.
    double lambda_at(const Point& x) const;
    double mu_at(const Point& x) const;
    /// Lambda^eps(x, y).
    double operator()(const Point& x, const Point& y) const;
    /// nu^eps(x) = mu^eps(x) / lambda^eps(x); product structures only.
    double nu(const Point& x) const;

    /// Templates and laws, for effective-coefficient computations.
    const std::optional<CellFunction>& lambda_template() const { return lambda_; }
    const std::optional<CellFunction>& mu_template() const { return mu_; }
    const std::optional<SymmetricCoefficient>& symmetric() const { return symmetric_; }
    const std::optional<CheckerboardLaw>& checkerboard() const { return checkerboard_; }

    /// Template value at an explicit fast-variable point and shift (used for ensemble
    /// averages): lambda(xi + shift) with checkerboard cells keyed by `seed`.
    double lambda_fast(const Point& xi, const Point& shift, std::uint64_t seed) const;
    double mu_fast(const Point& xi, const Point& shift) const;
    /// Fast variable x/eps + U of the physical point x (U = 0 for periodic fields).
    Point fast_point(const Point& x) const;

    friend CoefficientField draw_realization(const CoefficientField& c, std::uint64_t seed);

private:
    CoefficientField() = default;
    void require_realization() const;
    Point fast(const Point& x) const;

    Structure structure_ = Structure::PeriodicProduct;
    int dim_ = 1;
    double gamma_ = 1.0;
    double epsilon_ = 1.0;
    std::optional<CellFunction> lambda_;
    std::optional<CellFunction> mu_;
    std::optional<SymmetricCoefficient> symmetric_;
    std::optional<CheckerboardLaw> checkerboard_;
    std::optional<Realization> realization_;
};

/// Draws the stationary realization keyed by `seed`. Throws ConfigError for periodic fields.
CoefficientField draw_realization(const CoefficientField& c, std::uint64_t seed);

/// Checked evaluation of Lambda^eps(x, y) on coordinate spans.
double eval_coeff(const CoefficientField& c, std::span<const double> x, std::span<const double> y);
/// Checked evaluation of nu^eps(x); throws Error for symmetric structures.
double eval_nu(const CoefficientField& c, std::span<const double> x);

}  // namespace nhl
