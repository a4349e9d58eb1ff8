#pragma once

#include <functional>
#include <limits>

namespace nhl::quad {

struct Options {
    double rel_tol = 1e-10;
    unsigned max_depth = 30;
    /// Absolute floor below which an integral is treated as converged.
    double abs_floor = 1e-300;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (15 point) on a finite, smooth interval.
double smooth(const Integrand& f, double a, double b, const Options& opt);

/// Double-exponential rule on [a, b]; tolerates integrable endpoint singularities.
double endpoint_singular(const Integrand& f, double a, double b, const Options& opt);

/// Gauss-Legendre nodes and weights on [-1, 1] for n in {2, 4, 8, 16}.
struct GaussRule {
    const double* nodes;
    const double* weights;
    int size;
};
GaussRule gauss_legendre(int n);

/// Tensor Gauss-Legendre on [a, b] with n nodes.
template <class F>
double gauss(F&& f, double a, double b, int n)
{
    GaussRule rule = gauss_legendre(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a), sum = 0.0;
    for (int k = 0; k < rule.size; ++k) sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
    return half * sum;
}

}  // namespace nhl::quad
