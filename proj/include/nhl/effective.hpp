#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>

#include "nhl/coefficient.hpp"

namespace nhl {

struct EffectiveQuadrature {
    /// Midpoint nodes per axis (and per phase interval for two-phase templates); must be >= 64.
    int q = 64;
    /// Ensemble-average random structures by sampling instead of exact expectation.
    bool monte_carlo = false;
    std::size_t mc_samples = 10000;
    std::uint64_t seed = 1;
    /// Monte Carlo results whose standard error exceeds this cap are rejected.
    double stderr_cap = std::numeric_limits<double>::infinity();
};

/// Homogenized coefficient Lambda-bar.
struct EffectiveCoefficient {
    enum class Kind { ConstantScalar, TwoPointMap };

    Kind kind = Kind::ConstantScalar;
    /// The scalar for ConstantScalar; the fast-variable mean of the catalog entry for TwoPointMap.
    double value = 1.0;
    std::function<double(const Point&, const Point&)> map;
    std::optional<double> mc_stderr;
    /// <mu> and <mu/lambda> (or their expectations) for product structures; 1 for symmetric.
    double mu_mean = 1.0;
    double nu_mean = 1.0;

    double operator()(const Point& x, const Point& y) const { return map ? map(x, y) : value; }
};

/// Computes Lambda-bar for any structure. Throws QuadratureError when the refined midpoint
/// rule disagrees with the coarse one by more than 1e-8 relative, Error when a Monte Carlo
/// standard error exceeds the cap, ConfigError on invalid quadrature settings.
EffectiveCoefficient effective_coefficient(const CoefficientField& c, const EffectiveQuadrature& quad = {});

/// Cell average of a template by the refined midpoint rule used above.
double cell_average(const CellFunction& f, int dim, int q = 64);

}  // namespace nhl
