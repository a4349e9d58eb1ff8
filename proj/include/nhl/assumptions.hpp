#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nhl/kernel.hpp"

namespace nhl {

enum class Assumption {
    A1_symmetry,
    A2_levy_khintchine,
    A3_tail,
    A4_coercivity,
    B1_symmetry,
    B2_tail,
    B3_lower_density,
};

std::string to_string(Assumption a);
Assumption assumption_from_string(const std::string& s);

/// Geometric radius ladder 1e-3 * 2^k, k = 0, 1, ... up to the first radius >= 1e3.
std::vector<double> default_radius_ladder();

struct ProbeConfig {
    std::vector<double> radii = default_radius_ladder();
    /// Symmetry pairs for A1/B1, Monte Carlo points per (ball, x) for B3.
    std::size_t samples = 10000;
    /// Sampled balls for B3 and base points for B2.
    std::size_t balls = 64;
    double tolerance = 1e-9;
    std::uint64_t seed = 1;

    /// Upper bound C0 for A3/B2, lower bound c0 for A4, density fraction C1 and kernel
    /// constant C2 for B3. These are user thresholds; the reported witness is the measurement.
    double tail_bound = 1e3;
    double coercivity_bound = 1e-2;
    double density_fraction = 0.5;
    double density_constant = 1.0;

    /// Two-sided normal quantile for the Wilson interval in B3 (99%).
    double wilson_z = 2.5758293035489004;
    /// Angular trapezoid nodes for d = 2 integrals, and test directions e for A4.
    int angular_nodes = 256;
    int coercivity_directions = 64;
    TailClosure closure{};
};

struct AssumptionReport {
    Assumption kind = Assumption::A1_symmetry;
    bool passed = false;
    /// sup/inf constant, density fraction, or Levy-Khintchine integral depending on kind.
    double witness_constant = 0.0;
    /// Radius where the bound was tightest (NaN when not radius-based).
    double worst_radius = 0.0;
    /// Point (A1: offset z, B1: x, B2/B3: base point x) where the bound was tightest.
    Point worst_point{0.0, 0.0};
    std::string detail;
};

/// Numerically checks one structural kernel assumption. Throws Error when an A-kind is
/// requested for a general (non-convolution) kernel, QuadratureError when a radial
/// integral does not converge within its budget.
AssumptionReport verify_assumption(const Kernel& k, Assumption kind, const ProbeConfig& probe);

/// Two-sided Wilson score interval lower bound for `successes` out of `trials`.
double wilson_lower_bound(std::size_t successes, std::size_t trials, double z);

}  // namespace nhl
