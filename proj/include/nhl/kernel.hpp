#pragma once

#include <functional>
#include <span>
#include <string>

#include "nhl/quadrature.hpp"
#include "nhl/types.hpp"

namespace nhl {

enum class KernelFamily { Convolution, General };

enum class KernelBuiltin { FractionalPower, BoundedPerturbedFractional, TemperedFractional, Custom };

std::string to_string(KernelBuiltin b);

/// Kernel value with an explicit diagonal flag. When `infinite` is set, `value` holds the
/// largest finite double.
struct KernelValue {
    double value = 0.0;
    bool infinite = false;
};

/// Controls the far-field closure of radial tail integrals: the tail beyond `r_far` is
/// closed analytically with the decay exponent d + alpha.
struct TailClosure {
    double r_far = 64.0;
    quad::Options quad{};
};

/// A nonnegative symmetric singular kernel K(x, y) of order alpha in dimension 1 or 2.
///
/// Convolution kernels are described by a profile K(z) with K(x, y) = K(x - y). General
/// kernels evaluate K(x, y) directly; the built-in general kernel is the bounded
/// perturbation a(x) a(y) |x - y|^{-d-alpha} with a(x) = upsilon^{sin(2 pi (x_1 + ... + x_d))}.
/// Kernels are immutable after construction.
class Kernel {
public:
    using Profile = std::function<double(const Point&)>;
    using TwoPoint = std::function<double(const Point&, const Point&)>;

    static Kernel fractional_power(int dim, double alpha);
    static Kernel perturbed_fractional(int dim, double alpha, double upsilon);
    /// K(z) = exp(-rate |z|) |z|^{-d-alpha}.
    static Kernel tempered(int dim, double alpha, double rate = 1.0);
    static Kernel custom_convolution(int dim, double alpha, Profile profile, bool radial = false);
    /// `exterior_modulation` may be empty; see exterior_modulation().
    static Kernel custom_general(int dim, double alpha, TwoPoint kernel,
                                 std::function<double(const Point&)> exterior_modulation = {});

    KernelFamily family() const { return family_; }
    KernelBuiltin builtin() const { return builtin_; }
    int dim() const { return dim_; }
    double alpha() const { return alpha_; }
    double upsilon() const { return upsilon_; }
    double tempering_rate() const { return rate_; }

    /// Checked evaluation on coordinate spans; throws DimensionError on a size mismatch.
    KernelValue eval(std::span<const double> x, std::span<const double> y) const;

    /// Unchecked evaluation; returns +inf on the diagonal.
    double operator()(const Point& x, const Point& y) const;

    /// K(z) for convolution kernels, z != 0.
    double profile(const Point& z) const;

    /// True when K(x, y) = m(x, y) |x - y|^{-d-alpha} with m bounded and smooth enough that
    /// cell integrals can be taken from the pure power kernel times a sampled modulation.
    bool is_power_type() const;

    /// m(x, y) = K(x, y) |x - y|^{d+alpha}. For FractionalPower this is exactly 1.
    double modulation(const Point& x, const Point& y) const;

    /// Modulation used for the interaction of x with the exterior of the computational box:
    /// a(x) <a> for the perturbed kernel, 1 for convolution kernels, the user callback (or the
    /// mean of m(x, x +- e_k) over the coordinate axes) for custom general kernels.
    double exterior_modulation(const Point& x) const;

    /// The multiplier a(x) of the perturbed kernel (1 otherwise).
    double multiplier(const Point& x) const;

    /// Radially symmetric profile, K(z) = k(|z|).
    bool is_radial() const { return radial_; }

    /// T(rho, dir) = \int_rho^\infty K(r dir) r^{d-1} dr for a convolution kernel and unit
    /// vector dir. Power kernels use the closed form rho^{-alpha}/alpha; others integrate
    /// to max(rho, r_far) in the log-radius variable and close the remainder with the
    /// power-law tail K(R dir) R^d / alpha.
    double radial_tail(double rho, const Point& dir, const TailClosure& closure) const;

    /// Same as radial_tail but never uses the closed form.
    double radial_tail_numeric(double rho, const Point& dir, const TailClosure& closure) const;

    /// \int_0^r K(s dir) s^{d+1} ds (second radial moment), by quadrature.
    double radial_second_moment(double r, const Point& dir, const quad::Options& opt) const;

private:
    Kernel() = default;

    KernelFamily family_ = KernelFamily::Convolution;
    KernelBuiltin builtin_ = KernelBuiltin::FractionalPower;
    int dim_ = 1;
    double alpha_ = 0.5;
    double upsilon_ = 1.0;
    double rate_ = 0.0;
    double mean_multiplier_ = 1.0;
    bool radial_ = true;
    Profile profile_;
    TwoPoint general_;
    std::function<double(const Point&)> exterior_;
};

/// Validates dim in {1,2} and alpha in (0, 2). Throws ConfigError.
void check_kernel_parameters(int dim, double alpha);

}  // namespace nhl
