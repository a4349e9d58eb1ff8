#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "nhl/assembly.hpp"

namespace nhl {

struct SolverOptions {
    /// Worker threads for matrix-vector products; 0 = default_thread_count().
    int threads = 0;
    /// Sequential reductions, so iterates are bit-identical for any thread count.
    bool reproducible = true;
};

struct LinearSolveReport {
    Eigen::VectorXd solution;
    int iterations = 0;
    /// ||(A + mM) u - b|| / ||b|| recomputed from the final iterate (0 when b = 0).
    double relative_residual = 0.0;
    double wall_ms = 0.0;
    bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients for (A + mM) u = b from the zero vector.
/// tol must lie in (0, 1e-6]. On non-convergence the report carries converged = false.
LinearSolveReport solve_linear(const AssembledSystem& sys, double tol = 1e-8, int max_iter = 10000,
                               const SolverOptions& opt = {});

/// Phi(t) = c |t|^p.
struct PhiSpec {
    double p = 2.0;
    double c = 0.5;

    void validate() const;
    double phi(double t) const;
    double dphi(double t) const;
    double ddphi(double t) const;
    /// Phi(a + s) - Phi(a) without cancellation when |s| << |a|.
    double increment(double a, double s) const;
    /// Growth constant max(c, 1/c) * max(p, 1).
    double upsilon2() const;
};

/// Discrete J(u) = 1/2 sum_{i != j} w_ij Phi(u_j - u_i) + sum_i e_i Phi(u_i)
///               + (m/p) sum_i M_i |u_i|^p - b.u, with w_ij = -A_ij and e_i the exterior weights.
double functional_value(const AssembledSystem& sys, const PhiSpec& phi, const Eigen::VectorXd& u,
                        const SolverOptions& opt = {});

/// Gradient of functional_value.
Eigen::VectorXd functional_gradient(const AssembledSystem& sys, const PhiSpec& phi, const Eigen::VectorXd& u,
                                    const SolverOptions& opt = {});

/// J(u + t d) - J(u), evaluated term by term so that it stays accurate for tiny steps.
double functional_increment(const AssembledSystem& sys, const PhiSpec& phi, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& d, double t, const SolverOptions& opt = {});

struct NonlinearSolveReport {
    Eigen::VectorXd solution;
    int iterations = 0;
    double gradient_norm = 0.0;
    double objective = 0.0;
    /// Objective after every accepted step, starting with the initial value.
    std::vector<double> objective_history;
    long backtracks = 0;
    double min_step = 1.0;
    bool converged = false;
    std::string failure;
};

/// Preconditioned descent with Armijo backtracking (initial step 1, factor 1/2, sufficient
/// decrease 1e-4) until ||grad J|| <= tol * ||b|| (tol * 1 when b = 0). Directions are
/// Jacobi-scaled gradients with Polak-Ribiere+ conjugation and restart on loss of descent.
NonlinearSolveReport minimize_functional(const AssembledSystem& sys, const PhiSpec& phi,
                                         const Eigen::VectorXd& start, double tol = 1e-9, int max_iter = 20000,
                                         const SolverOptions& opt = {});

}  // namespace nhl
