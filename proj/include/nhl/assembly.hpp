#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "nhl/coefficient.hpp"
#include "nhl/effective.hpp"
#include "nhl/grid.hpp"
#include "nhl/kernel.hpp"

namespace nhl {

/// Quadrature controls for cell integrals: `r_far` closes radial tails, `max_depth` caps
/// adaptive refinement, `tolerance` is the relative accuracy target.
struct TailPolicy {
    double r_far = 64.0;
    unsigned max_depth = 30;
    double tolerance = 1e-10;

    /// Throws ConfigError unless tolerance lies in (0, 1e-4], r_far > 0 and max_depth >= 1.
    void validate() const;
    quad::Options options() const;
};

/// Cell-pair factor sum_t coef_t left_t[i] right_t[j], or a generic callback.
struct PairFactor {
    struct Term {
        double coef = 1.0;
        Eigen::VectorXd left;
        Eigen::VectorXd right;
    };
    std::vector<Term> terms;
    std::function<double(std::size_t, std::size_t)> generic;

    double operator()(std::size_t i, std::size_t j) const
    {
        if (generic) return generic(i, j);
        double s = 0.0;
        for (const Term& t : terms) s += t.coef * t.left[static_cast<Eigen::Index>(i)] * t.right[static_cast<Eigen::Index>(j)];
        return s;
    }

    static PairFactor constant(double c, std::size_t n);
};

/// Discrete coefficient weights: pair weights W_ij for the form, exterior weights for the
/// interaction with the complement of the box, and the mass/right-hand-side weight nu.
struct CellWeights {
    PairFactor pair;
    Eigen::VectorXd exterior;
    Eigen::VectorXd nu;
    /// True for product structures (mass and load weighted by nu).
    bool weighted_mass = false;

    /// Lambda = 1.
    static CellWeights unit(const Grid& g);
    /// Subcell-midpoint averages of the oscillating field (`subsamples` per axis, 0 = default).
    static CellWeights from_field(const Grid& g, const CoefficientField& c, int subsamples = 0);
    /// Weights of the homogenized problem: pair <mu>^2 and nu = <mu/lambda> for product
    /// structures, the averaged map Lambda-bar(x, y) and nu = 1 for symmetric ones.
    static CellWeights homogenized(const Grid& g, const CoefficientField& c, const EffectiveCoefficient& e,
                                   int subsamples = 0);
};

/// Default coefficient subsamples per axis: 4 in 1D, 2 in 2D.
int default_subsamples(int dim);

/// Base cell-pair integrals of a kernel on a grid, reusable across coefficients.
///
/// Convolution kernels are tabulated by cell offset; power-type general kernels use the
/// table of |z|^{-d-alpha} times the modulation averaged over subcell pairs.
class KernelTable {
public:
    KernelTable(const Grid& g, const Kernel& k, const TailPolicy& tail, int threads = 0, int subsamples = 0);

    const Grid& grid() const { return grid_; }
    const Kernel& kernel() const { return kernel_; }

    /// \iint_{C_0 x C_k} K for the base (unmodulated) kernel at cell offset k.
    double offset_integral(int k0, int k1 = 0) const;
    /// I_ij = \iint_{C_i x C_j} K, i != j.
    double pair_integral(std::size_t i, std::size_t j) const;
    /// e_i = \int_{C_i} \int_{R^d \ box} K.
    double exterior_integral(std::size_t i) const { return exterior_[static_cast<Eigen::Index>(i)]; }

private:
    void build_offsets(const TailPolicy& tail, int threads);
    void build_exterior(const TailPolicy& tail, int threads);
    std::size_t slot(int k0, int k1) const;

    Grid grid_;
    Kernel kernel_;
    Kernel base_;
    int reach_ = 0;
    int band_ = 0;
    std::vector<double> offsets_;
    Eigen::VectorXd exterior_;
    PairFactor modulation_;
    Eigen::VectorXd exterior_modulation_;
};

struct AssemblyOptions {
    /// Worker threads; 0 = default_thread_count().
    int threads = 0;
    /// Coefficient subsamples per axis; 0 = default_subsamples(dim).
    int subsamples = 0;
};

/// Symmetric form matrix A, diagonal weighted mass M, and load b of one problem instance.
struct AssembledSystem {
    Grid grid;
    Eigen::MatrixXd A;
    Eigen::VectorXd M;
    Eigen::VectorXd b;
    Eigen::VectorXd nu;
    /// Exterior interaction e_i (weighted), so that A_ii = sum_{j != i} |A_ij| + e_i.
    Eigen::VectorXd exterior;
    double m = 1.0;
    bool weighted_mass = false;

    explicit AssembledSystem(const Grid& g) : grid(g) {}
};

AssembledSystem assemble_system(const KernelTable& table, const CellWeights& w, double m, const GridFunction& f,
                                const AssemblyOptions& opt = {});

AssembledSystem assemble_system(const Grid& g, const Kernel& k, const CoefficientField& c, double m,
                                const GridFunction& f, const TailPolicy& tail, const AssemblyOptions& opt = {});

/// Full Gagliardo seminorm squared, \iint (u(x)-u(y))^2 |x-y|^{-d-alpha} over both orderings.
double gagliardo_seminorm_sq(const Grid& g, const GridFunction& u, double alpha, const TailPolicy& tail);

/// Same, reusing an assembled unit-coefficient fractional system.
double gagliardo_seminorm_sq(const AssembledSystem& unit, const Eigen::VectorXd& u);

/// Writes A row-major as plain text, one row per line.
void write_matrix(const std::string& path, const Eigen::MatrixXd& A);

/// Validates that assembly supports the kernel order: piecewise constants need alpha < 1.
void check_assembly_order(double alpha);

}  // namespace nhl
