#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nhl/assembly.hpp"
#include "nhl/solvers.hpp"

namespace nhl {

/// Template on the unit cell: type in {constant, two_phase, cosine, checkerboard}.
struct CellSpec {
    std::string type = "constant";
    std::vector<double> params{1.0};
    bool operator==(const CellSpec&) const = default;
};

struct KernelSpec {
    std::string type = "fractional";
    double alpha = 0.5;
    double upsilon = 2.0;
    double rate = 1.0;
    bool operator==(const KernelSpec&) const = default;
};

struct CoeffSpec {
    Structure structure = Structure::PeriodicProduct;
    CellSpec lambda;
    CellSpec mu;
    /// Symmetric catalog entry: separable_cosine, symmetrized_pair or slow_separable.
    CellSpec symmetric{"separable_cosine", {2.0, 1.0}};
    double gamma = 2.0;
    /// Midpoint resolutions for the effective coefficient; the largest one is used.
    std::vector<int> q_values{64};
    std::uint64_t seed = 1;
    /// "exact" (cell quadrature / closed-form expectation) or "monte_carlo".
    std::string effective_method = "exact";
    std::size_t mc_samples = 10000;
    double stderr_cap = std::numeric_limits<double>::infinity();
    bool operator==(const CoeffSpec&) const = default;
};

struct RhsSpec {
    std::string type = "gaussian";
    std::vector<double> center{0.0};
    double width = 0.15;
    double amplitude = 1.0;
    std::vector<double> lo{0.0};
    std::vector<double> hi{1.0};
    bool operator==(const RhsSpec&) const = default;
};

enum class SweepMode { Linear, Nonlinear };

struct ExperimentConfig {
    int dim = 1;
    double box_halfwidth = 1.0;
    int n = 256;
    KernelSpec kernel;
    CoeffSpec coeff;
    double m = 1.0;
    RhsSpec f;
    std::vector<double> epsilons{0.25};
    std::vector<std::uint64_t> seeds;
    SweepMode mode = SweepMode::Linear;
    PhiSpec phi{2.0, 0.5};
    double nonlinear_tol = 1e-9;
    int nonlinear_max_iter = 20000;
    double solver_tol = 1e-8;
    int solver_max_iter = 10000;
    bool reproducible = true;
    int threads = 0;
    TailPolicy tail;
    int coeff_subsamples = 0;
    std::string output;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

Kernel make_kernel(const ExperimentConfig& cfg);
CoefficientField make_field(const ExperimentConfig& cfg, double epsilon);
FunctionSpec make_rhs(const ExperimentConfig& cfg);
EffectiveQuadrature make_effective_quadrature(const ExperimentConfig& cfg);

struct SweepRecord {
    double epsilon = 0.0;
    std::optional<std::uint64_t> seed;
    /// L2 error (linear) or L^p error (nonlinear) against the homogenized solution.
    double l2_error = 0.0;
    /// Gagliardo seminorm of the error, W^{alpha/p, p} analogue in nonlinear mode.
    double seminorm_error = 0.0;
    /// F(u) = u.Au + m u.Mu - 2 b.u (linear) or 2 J(u) (nonlinear); equal at p = 2, c = 1/2.
    double energy_eps = 0.0;
    double energy_hom = 0.0;
    std::vector<double> weak_gaps;
    int iterations = 0;
    double runtime_ms = 0.0;

    /// ||u||_{L2, nu}, ||f||_{L2, nu} / m, ||u||_{L2} and [u]_{H^{alpha/2}}.
    double u_nu_norm = 0.0;
    double f_nu_bound = 0.0;
    double u_l2 = 0.0;
    double u_seminorm = 0.0;
    bool converged = true;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    bool complete = true;
    std::string error;
    /// Homogenized solution shared by every record.
    Eigen::VectorXd u_hom;
    EffectiveCoefficient effective;
    std::vector<std::string> notes;
};

struct SweepOptions {
    /// Called after each record; useful for progress output.
    std::function<void(const SweepRecord&)> on_record;
};

/// Runs the epsilon (and seed) sweep: one homogenized solve, then one assembly and solve per
/// (epsilon, seed). Solver failures stop the sweep and return the records so far with
/// complete = false.
SweepResult run_sweep(const ExperimentConfig& cfg, const SweepOptions& opt = {});

/// |energy_eps - energy_hom| per record, in record order.
std::vector<std::pair<double, double>> energy_gap(const std::vector<SweepRecord>& records);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Root-mean-square residual of the log-log fit.
    double residual = 0.0;
};

/// Least squares of log(error) on log(epsilon). Throws Error on fewer than two points or a
/// nonpositive error.
RateFit fit_rate(const std::vector<double>& epsilons, const std::vector<double>& errors);
RateFit fit_rate(const std::vector<SweepRecord>& records);

struct EnsembleStat {
    double epsilon = 0.0;
    double mean = 0.0;
    /// Unbiased sample standard deviation; NaN when count < 2.
    double stddev = 0.0;
    std::size_t count = 0;
    bool stddev_defined = false;
};

/// Groups records by epsilon (first-appearance order) and summarizes l2_error.
std::vector<EnsembleStat> ensemble_summary(const std::vector<SweepRecord>& records);

inline constexpr const char* kCsvHeader =
    "epsilon,seed,l2_error,seminorm_error,energy_eps,energy_hom,weak_gap_1,weak_gap_2,weak_gap_3,iterations,"
    "runtime_ms";

/// Writes the CSV (header, one row per record, `# INCOMPLETE` when the sweep aborted).
/// Runtime is written as 0 when `reproducible` is set.
void write_csv(std::ostream& out, const SweepResult& result, bool reproducible);
void write_csv(const std::string& path, const SweepResult& result, bool reproducible);

/// The three fixed test functions used for weak-convergence gaps.
std::vector<FunctionSpec> weak_test_functions(const Grid& g);

}  // namespace nhl
