#pragma once

#include <Eigen/Dense>
#include <string>

#include "nhl/types.hpp"

namespace nhl {

/// Uniform partition of the box [-L, L]^d into n^d cells of side h = 2L/n.
/// Cells are numbered with the first axis fastest: index = i0 + n * i1.
class Grid {
public:
    Grid(int dim, double half_width, int n);

    int dim() const { return dim_; }
    double half_width() const { return L_; }
    int n() const { return n_; }
    double h() const { return h_; }
    double cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }
    std::size_t size() const { return dim_ == 1 ? std::size_t(n_) : std::size_t(n_) * n_; }

    /// Multi-index of a cell (second entry 0 in 1D).
    std::array<int, 2> index(std::size_t cell) const
    {
        return {static_cast<int>(cell % n_), dim_ == 2 ? static_cast<int>(cell / n_) : 0};
    }
    Point lower(std::size_t cell) const;
    Point center(std::size_t cell) const;

    bool operator==(const Grid& o) const { return dim_ == o.dim_ && L_ == o.L_ && n_ == o.n_; }

private:
    int dim_;
    double L_;
    int n_;
    double h_;
};

/// Piecewise-constant function on a grid, extended by zero outside the box.
struct GridFunction {
    Grid grid;
    Eigen::VectorXd values;

    explicit GridFunction(const Grid& g) : grid(g), values(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size())))
    {
    }
    GridFunction(const Grid& g, Eigen::VectorXd v);
};

/// Closed catalog of right-hand sides and test functions.
struct FunctionSpec {
    enum class Kind { Zero, GaussianBump, CosineBump, Indicator };

    Kind kind = Kind::Zero;
    Point center{0.0, 0.0};
    /// Standard deviation of the Gaussian, radius of the cosine bump.
    double width = 0.25;
    double amplitude = 1.0;
    /// Indicator box [lo, hi] (per axis).
    Point lo{0.0, 0.0};
    Point hi{0.0, 0.0};

    static FunctionSpec zero() { return {}; }
    /// amplitude * exp(-|x - c|^2 / (2 w^2)).
    static FunctionSpec gaussian(Point center, double width, double amplitude = 1.0);
    /// amplitude * (1 + cos(pi |x - c| / r)) / 2 for |x - c| < r, zero elsewhere.
    static FunctionSpec cosine_bump(Point center, double radius, double amplitude = 1.0);
    static FunctionSpec indicator(Point lo, Point hi, double amplitude = 1.0);

    double operator()(const Point& x, int dim) const;
};

std::string to_string(FunctionSpec::Kind k);
FunctionSpec::Kind function_kind_from_string(const std::string& s);

/// Cell averages by the 4-point (1D) or 4x4-point (2D) Gauss rule on each cell.
GridFunction project(const Grid& g, const FunctionSpec& f);

/// Fraction of the function's L1 mass that lies outside the box (0 when compactly supported
/// inside). Used to warn about mass dropped by the zero extension.
double mass_outside_box(const Grid& g, const FunctionSpec& f);

/// L2 inner product and norm of piecewise-constant functions.
double inner_product(const GridFunction& u, const GridFunction& v);
double l2_norm(const GridFunction& u);

}  // namespace nhl
