#include "nhl/kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace nhl {

Point to_point(std::span<const double> coords, int dim)
{
    if (static_cast<int>(coords.size()) != dim)
        throw DimensionError("point has " + std::to_string(coords.size()) +
                             " coordinates, expected " + std::to_string(dim));
    Point p{0.0, 0.0};
    for (int k = 0; k < dim; ++k) p[k] = coords[k];
    return p;
}

std::string to_string(KernelBuiltin b)
{
    switch (b) {
    case KernelBuiltin::FractionalPower: return "fractional";
    case KernelBuiltin::BoundedPerturbedFractional: return "perturbed_fractional";
    case KernelBuiltin::TemperedFractional: return "tempered";
    case KernelBuiltin::Custom: return "custom";
    }
    return "unknown";
}

void check_kernel_parameters(int dim, double alpha)
{
    if (dim != 1 && dim != 2) throw ConfigError("grid.dim", "dimension must be 1 or 2");
    if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("kernel.alpha", "alpha must lie in (0, 2)");
}

Kernel Kernel::fractional_power(int dim, double alpha)
{
    check_kernel_parameters(dim, alpha);
    Kernel k;
    k.builtin_ = KernelBuiltin::FractionalPower;
    k.dim_ = dim;
    k.alpha_ = alpha;
    return k;
}

Kernel Kernel::perturbed_fractional(int dim, double alpha, double upsilon)
{
    check_kernel_parameters(dim, alpha);
    if (!(upsilon >= 1.0)) throw ConfigError("kernel.upsilon", "upsilon must be >= 1");
    Kernel k;
    k.family_ = KernelFamily::General;
    k.builtin_ = KernelBuiltin::BoundedPerturbedFractional;
    k.dim_ = dim;
    k.alpha_ = alpha;
    k.upsilon_ = upsilon;
    k.radial_ = false;
    // mean of upsilon^{sin(2 pi t)} over one period
    k.mean_multiplier_ = std::cyl_bessel_i(0.0, std::log(upsilon));
    return k;
}

Kernel Kernel::tempered(int dim, double alpha, double rate)
{
    check_kernel_parameters(dim, alpha);
    if (!(rate > 0.0)) throw ConfigError("kernel.rate", "tempering rate must be positive");
    Kernel k;
    k.builtin_ = KernelBuiltin::TemperedFractional;
    k.dim_ = dim;
    k.alpha_ = alpha;
    k.rate_ = rate;
    return k;
}

Kernel Kernel::custom_convolution(int dim, double alpha, Profile profile, bool radial)
{
    check_kernel_parameters(dim, alpha);
    if (!profile) throw ConfigError("kernel", "custom convolution kernel needs a profile");
    Kernel k;
    k.builtin_ = KernelBuiltin::Custom;
    k.dim_ = dim;
    k.alpha_ = alpha;
    k.radial_ = radial;
    k.profile_ = std::move(profile);
    return k;
}

Kernel Kernel::custom_general(int dim, double alpha, TwoPoint kernel,
                              std::function<double(const Point&)> exterior_modulation)
{
    check_kernel_parameters(dim, alpha);
    if (!kernel) throw ConfigError("kernel", "custom general kernel needs an evaluator");
    Kernel k;
    k.family_ = KernelFamily::General;
    k.builtin_ = KernelBuiltin::Custom;
    k.dim_ = dim;
    k.alpha_ = alpha;
    k.radial_ = false;
    k.general_ = std::move(kernel);
    k.exterior_ = std::move(exterior_modulation);
    return k;
}

KernelValue Kernel::eval(std::span<const double> x, std::span<const double> y) const
{
    Point px = to_point(x, dim_), py = to_point(y, dim_);
    double v = (*this)(px, py);
    if (std::isinf(v)) return {std::numeric_limits<double>::max(), true};
    return {v, false};
}

double Kernel::operator()(const Point& x, const Point& y) const
{
    if (family_ == KernelFamily::Convolution) {
        Point z = y - x;
        if (z[0] == 0.0 && z[1] == 0.0) return std::numeric_limits<double>::infinity();
        return profile(z);
    }
    if (x == y) return std::numeric_limits<double>::infinity();
    if (builtin_ == KernelBuiltin::BoundedPerturbedFractional) {
        double r = norm(y - x, dim_);
        // symmetric by construction: the product a(x) a(y) commutes exactly
        return multiplier(x) * multiplier(y) * std::pow(r, -dim_ - alpha_);
    }
    return general_(x, y);
}

double Kernel::profile(const Point& z) const
{
    double r = norm(z, dim_);
    switch (builtin_) {
    case KernelBuiltin::FractionalPower: return std::pow(r, -dim_ - alpha_);
    case KernelBuiltin::TemperedFractional: return std::exp(-rate_ * r) * std::pow(r, -dim_ - alpha_);
    case KernelBuiltin::Custom:
        if (family_ == KernelFamily::Convolution) {
            // symmetrize so that K(z) = K(-z) holds bit for bit
            Point mz{-z[0], -z[1]};
            return 0.5 * (profile_(z) + profile_(mz));
        }
        break;
    default: break;
    }
    throw Error("profile() requires a convolution kernel");
}

bool Kernel::is_power_type() const
{
    return builtin_ == KernelBuiltin::FractionalPower ||
           builtin_ == KernelBuiltin::BoundedPerturbedFractional ||
           (builtin_ == KernelBuiltin::Custom && family_ == KernelFamily::General);
}

double Kernel::multiplier(const Point& x) const
{
    if (builtin_ != KernelBuiltin::BoundedPerturbedFractional) return 1.0;
    double s = x[0] + (dim_ == 2 ? x[1] : 0.0);
    return std::pow(upsilon_, std::sin(2.0 * std::numbers::pi * s));
}

double Kernel::modulation(const Point& x, const Point& y) const
{
    switch (builtin_) {
    case KernelBuiltin::FractionalPower: return 1.0;
    case KernelBuiltin::BoundedPerturbedFractional: return multiplier(x) * multiplier(y);
    default: break;
    }
    double r = norm(y - x, dim_);
    return (*this)(x, y) * std::pow(r, dim_ + alpha_);
}

double Kernel::exterior_modulation(const Point& x) const
{
    switch (builtin_) {
    case KernelBuiltin::FractionalPower:
    case KernelBuiltin::TemperedFractional: return 1.0;
    case KernelBuiltin::BoundedPerturbedFractional: return multiplier(x) * mean_multiplier_;
    case KernelBuiltin::Custom:
        if (family_ == KernelFamily::Convolution) return 1.0;
        if (exterior_) return exterior_(x);
        {
            double sum = 0.0;
            for (int k = 0; k < dim_; ++k) {
                Point e{0.0, 0.0};
                e[k] = 1.0;
                sum += modulation(x, x + e) + modulation(x, x - e);
            }
            return sum / (2.0 * dim_);
        }
    }
    return 1.0;
}

double Kernel::radial_tail(double rho, const Point& dir, const TailClosure& closure) const
{
    if (builtin_ == KernelBuiltin::FractionalPower) return std::pow(rho, -alpha_) / alpha_;
    return radial_tail_numeric(rho, dir, closure);
}

double Kernel::radial_tail_numeric(double rho, const Point& dir, const TailClosure& closure) const
{
    if (family_ != KernelFamily::Convolution)
        throw Error("radial tails are defined for convolution kernels only");
    if (!(rho > 0.0)) throw Error("radial_tail: rho must be positive");
    double far = std::max(rho, closure.r_far);
    auto along = [&](double r) { return profile(r * dir); };
    double d = dim_;
    double near_part = 0.0;
    if (far > rho) {
        // r = e^t turns the power-law decay into a slowly varying integrand
        near_part = quad::smooth(
            [&](double t) {
                double r = std::exp(t);
                return along(r) * std::pow(r, d);
            },
            std::log(rho), std::log(far), closure.quad);
    }
    return near_part + along(far) * std::pow(far, d) / alpha_;
}

double Kernel::radial_second_moment(double r, const Point& dir, const quad::Options& opt) const
{
    if (family_ != KernelFamily::Convolution)
        throw Error("radial moments are defined for convolution kernels only");
    double d = dim_;
    return quad::endpoint_singular(
        [&](double s) {
            if (!(s > 0.0)) return 0.0;
            double v = profile(s * dir) * std::pow(s, d + 1.0);
            return std::isfinite(v) ? v : 0.0;
        },
        0.0, r, opt);
}

}  // namespace nhl
