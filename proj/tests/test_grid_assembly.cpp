#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nhl/assembly.hpp"
#include "nhl/grid.hpp"
#include "oracles.hpp"

using namespace nhl;

namespace {

AssembledSystem unit_system(const Grid& g, const Kernel& k, const TailPolicy& tail = {})
{
    KernelTable table(g, k, tail);
    return assemble_system(table, CellWeights::unit(g), 1.0, GridFunction(g));
}

// (1/alpha) \int_0^{2 pi} rho(theta)^{-alpha} d theta for x inside [-1, 1]^2, rho = distance to the
// boundary along theta; each side contributes d^{-alpha} \int cos(phi)^alpha d phi over its angular span.
double square_exterior_at(double alpha, double x0, double x1)
{
    const double d[4] = {1.0 - x0, 1.0 - x1, 1.0 + x0, 1.0 + x1};
    double s = 0.0;
    for (int side = 0; side < 4; ++side) {
        double dn = d[side], left = d[(side + 3) % 4], right = d[(side + 1) % 4];
        double lo = -std::atan2(left, dn), hi = std::atan2(right, dn);
        s += std::pow(dn, -alpha) *
             oracle::composite([&](double phi) { return std::pow(std::cos(phi), alpha); }, lo, hi, 12);
    }
    return s / alpha;
}

}  // namespace

TEST_SUITE("grid")
{
    TEST_CASE("grid geometry")
    {
        Grid g(1, 1.0, 4);
        CHECK(g.h() == 0.5);
        CHECK(g.size() == 4);
        CHECK(g.lower(0)[0] == -1.0);
        CHECK(g.lower(1)[0] == -0.5);
        CHECK(g.lower(2)[0] == 0.0);
        CHECK(g.lower(3)[0] == 0.5);
        CHECK(g.center(3)[0] == 0.75);

        Grid g2(2, 1.0, 2);
        CHECK(g2.size() == 4);
        CHECK(g2.cell_volume() == 1.0);
        CHECK(g2.index(3) == std::array<int, 2>{1, 1});
        CHECK(g2.lower(1)[0] == 0.0);
        CHECK(g2.lower(1)[1] == -1.0);

        CHECK_THROWS_AS(Grid(1, 1.0, 0), ConfigError);
        CHECK_THROWS_AS(Grid(3, 1.0, 4), ConfigError);
        CHECK_THROWS_AS(Grid(1, 0.0, 4), ConfigError);
    }

    TEST_CASE("projection examples")
    {
        Grid g(1, 1.0, 4);
        CHECK(project(g, FunctionSpec::zero()).values.isZero());
        auto ind = project(g, FunctionSpec::indicator(Point{0.0, 0.0}, Point{1.0, 0.0}));
        CHECK(ind.values[0] == 0.0);
        CHECK(ind.values[1] == 0.0);
        CHECK(ind.values[2] == 1.0);
        CHECK(ind.values[3] == 1.0);

        Grid g2(2, 1.0, 2);
        auto ind2 = project(g2, FunctionSpec::indicator(Point{0.0, 0.0}, Point{1.0, 1.0}));
        CHECK(ind2.values.sum() == 1.0);
        CHECK(ind2.values[3] == 1.0);
        auto half = project(g, FunctionSpec::indicator(Point{0.25, 0.0}, Point{2.0, 0.0}, 2.0));
        CHECK(half.values[2] == 1.0);
        CHECK(half.values[3] == 2.0);
    }

    TEST_CASE("Gaussian projection preserves the integral")
    {
        Grid g(1, 1.0, 64);
        auto spec = FunctionSpec::gaussian(Point{0.1, 0.0}, 0.15, 2.0);
        double discrete = project(g, spec).values.sum() * g.h();
        double exact = oracle::composite(
            [](double x) { return 2.0 * std::exp(-(x - 0.1) * (x - 0.1) / (2 * 0.15 * 0.15)); }, -1.0, 1.0, 200);
        CHECK(std::abs(discrete - exact) <= 1e-6 * exact);

        Grid g2(2, 1.0, 32);
        auto spec2 = FunctionSpec::gaussian(Point{0.1, -0.2}, 0.2);
        double d2 = project(g2, spec2).values.sum() * g2.cell_volume();
        double e2 = oracle::rect2(
            [](double x, double y) { return std::exp(-((x - 0.1) * (x - 0.1) + (y + 0.2) * (y + 0.2)) / 0.08); }, -1,
            1, -1, 1, 40);
        CHECK(std::abs(d2 - e2) <= 1e-6 * e2);
    }

    TEST_CASE("mass outside the box")
    {
        Grid g(1, 1.0, 8);
        CHECK(mass_outside_box(g, FunctionSpec::indicator(Point{-0.5, 0}, Point{0.5, 0})) == 0.0);
        CHECK(mass_outside_box(g, FunctionSpec::cosine_bump(Point{0, 0}, 0.5)) == 0.0);
        double tail = mass_outside_box(g, FunctionSpec::gaussian(Point{0, 0}, 1.0));
        CHECK(tail == doctest::Approx(std::erfc(1.0 / std::sqrt(2.0))).epsilon(1e-6));
    }

    TEST_CASE("inner products")
    {
        Grid g(1, 1.0, 4);
        GridFunction u(g, Eigen::Vector4d(1, 2, 3, 4)), v(g, Eigen::Vector4d(1, 0, 0, 1));
        CHECK(inner_product(u, v) == doctest::Approx(2.5));
        CHECK(l2_norm(v) == doctest::Approx(1.0));
        CHECK_THROWS_AS(inner_product(u, GridFunction(Grid(1, 1.0, 8))), DimensionError);
    }
}

TEST_SUITE("assembly")
{
    TEST_CASE("single cell is the pure exterior term 8 sqrt 2")
    {
        Grid g(1, 1.0, 1);
        auto sys = unit_system(g, Kernel::fractional_power(1, 0.5));
        double oracle_value = oracle::interval_exterior(0.5, -1.0, 1.0, -1.0, 1.0);
        CHECK(std::abs(oracle_value - 8.0 * std::sqrt(2.0)) <= 1e-9 * oracle_value);
        CHECK(std::abs(sys.A(0, 0) - oracle_value) <= 1e-6 * oracle_value);
    }

    TEST_CASE("adjacent entry -4 h^(1/2) (2 - sqrt 2)")
    {
        Grid g(1, 0.5, 2);
        auto sys = unit_system(g, Kernel::fractional_power(1, 0.5));
        double h = 0.5;
        double oracle_value = -oracle::interval_pair(0.5, -0.5, 0.0, 0.0, 0.5);
        CHECK(std::abs(oracle_value + 4.0 * std::sqrt(h) * (2.0 - std::sqrt(2.0))) <= 1e-9);
        CHECK(std::abs(sys.A(0, 1) - oracle_value) <= 1e-6 * std::abs(oracle_value));
        CHECK(sys.A(0, 1) == sys.A(1, 0));
    }

    TEST_CASE("separated entries and exteriors match brute force")
    {
        Grid g(1, 1.0, 8);
        const double alpha = 0.7;
        auto sys = unit_system(g, Kernel::fractional_power(1, alpha));
        for (int j : {2, 3, 7}) {
            double a0 = g.lower(0)[0], b0 = g.lower(j)[0];
            double o = oracle::interval_pair(alpha, a0, a0 + g.h(), b0, b0 + g.h());
            CHECK(std::abs(-sys.A(0, j) - o) <= 1e-8 * o);
        }
        for (int i : {0, 3}) {
            double a = g.lower(i)[0];
            double e = oracle::interval_exterior(alpha, a, a + g.h(), -1.0, 1.0);
            CHECK(std::abs(sys.exterior[i] - e) <= 1e-8 * e);
        }
    }

    TEST_CASE("tempered kernel entries match brute force")
    {
        Grid g(1, 1.0, 4);
        const double alpha = 0.5, rate = 1.5;
        auto sys = unit_system(g, Kernel::tempered(1, alpha, rate));
        auto k = [&](double r) { return std::exp(-rate * r) * std::pow(r, -1.0 - alpha); };
        // adjacent pair in gap variables, singular at u + v = 0
        auto inner = [&](double u) { return oracle::graded_left([&](double v) { return k(u + v); }, 0.0, 0.5, 70); };
        double adj = oracle::graded_left(inner, 0.0, 0.5, 70);
        CHECK(std::abs(-sys.A(0, 1) - adj) <= 1e-7 * adj);
        auto far = [&](double x) { return oracle::composite([&](double y) { return k(y - x); }, 0.5, 1.0, 8); };
        double sep = oracle::composite(far, -1.0, -0.5, 8);
        CHECK(std::abs(-sys.A(0, 3) - sep) <= 1e-7 * sep);
    }

    TEST_CASE("2D single-cell exterior matches the angular integral")
    {
        const double alpha = 0.5;
        Grid g(2, 1.0, 1);
        auto sys = unit_system(g, Kernel::fractional_power(2, alpha));
        // quadrant [0,1]^2 by symmetry, graded toward the two outer edges in t = 1 - x, s = 1 - y
        auto row = [&](double t) {
            return oracle::graded_left([&](double s) { return square_exterior_at(alpha, 1.0 - t, 1.0 - s); }, 0.0, 1.0,
                                       48, 2);
        };
        double oracle_value = 4.0 * oracle::graded_left(row, 0.0, 1.0, 48, 2);
        CHECK(std::abs(sys.A(0, 0) - oracle_value) <= 1e-5 * oracle_value);
    }

    TEST_CASE("row sums are consistent with the exterior term")
    {
        for (int dim : {1, 2}) {
            const double alpha = 0.6;
            Kernel k = Kernel::fractional_power(dim, alpha);
            auto big = unit_system(Grid(dim, 1.5, 3), k);
            auto one = unit_system(Grid(dim, 0.5, 1), k);
            std::size_t centre = dim == 1 ? 1 : 4;
            CHECK(std::abs(big.A(centre, centre) - one.A(0, 0)) <= 1e-7 * one.A(0, 0));
        }
    }

    TEST_CASE("symmetry, M-matrix structure and SPD over seeded fields")
    {
        Grid g(1, 1.0, 16);
        Kernel k = Kernel::fractional_power(1, 0.5);
        KernelTable table(g, k, TailPolicy{});
        auto law = CheckerboardLaw{0.5, 2.0, 0.4};
        auto field = CoefficientField::random_checkerboard_product(1, law, CellFunction::cosine(1, 1.5), 2, 0.125);
        auto f = project(g, FunctionSpec::gaussian(Point{0, 0}, 0.2));
        oracle::Lcg rng(77);
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            auto r = draw_realization(field, seed);
            auto sys = assemble_system(table, CellWeights::from_field(g, r), 1.0, f);
            REQUIRE((sys.A - sys.A.transpose()).cwiseAbs().maxCoeff() == 0.0);
            for (Eigen::Index i = 0; i < sys.A.rows(); ++i) {
                double off = 0.0;
                for (Eigen::Index j = 0; j < sys.A.cols(); ++j)
                    if (j != i) {
                        REQUIRE(sys.A(i, j) <= 0.0);
                        off += -sys.A(i, j);
                    }
                REQUIRE(sys.A(i, i) >= off);
                REQUIRE(sys.M[i] > 0.0);
            }
            Eigen::VectorXd x(g.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);
            Eigen::MatrixXd K = sys.A;
            K.diagonal() += sys.m * sys.M;
            CHECK(x.dot(K * x) > 0.0);
        }
    }

    TEST_CASE("symmetric structures assemble an exactly symmetric matrix")
    {
        Grid g(1, 1.0, 16);
        auto c = CoefficientField::periodic_symmetric(1, SymmetricCoefficient::slow_separable(2, 0.5, 0.1), 3, 0.25);
        auto sys = assemble_system(g, Kernel::fractional_power(1, 0.4), c, 1.0, GridFunction(g), TailPolicy{});
        CHECK((sys.A - sys.A.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(sys.M.isConstant(g.h()));
    }

    TEST_CASE("weighted mass and load for product structures")
    {
        Grid g(1, 1.0, 8);
        auto c = CoefficientField::periodic_product(1, CellFunction::constant(2), CellFunction::constant(3), 3, 0.25);
        auto f = project(g, FunctionSpec::gaussian(Point{0, 0}, 0.3));
        auto sys = assemble_system(g, Kernel::fractional_power(1, 0.5), c, 2.0, f, TailPolicy{});
        auto unit = unit_system(g, Kernel::fractional_power(1, 0.5));
        CHECK((sys.A - 9.0 * unit.A).cwiseAbs().maxCoeff() <= 1e-12 * unit.A.cwiseAbs().maxCoeff());
        CHECK(sys.M.isApproxToConstant(1.5 * g.h(), 1e-15));
        CHECK((sys.b - 1.5 * g.h() * f.values).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK(sys.weighted_mass);
    }

    TEST_CASE("halving the tolerance moves entries by less than ten tolerances")
    {
        Grid g(1, 1.0, 16);
        for (const Kernel& k : {Kernel::fractional_power(1, 0.5), Kernel::tempered(1, 0.5, 2.0),
                                Kernel::perturbed_fractional(1, 0.3, 1.5)}) {
            for (double tol : {1e-6, 1e-8}) {
                TailPolicy a, b;
                a.tolerance = tol;
                b.tolerance = tol / 2;
                auto A = unit_system(g, k, a).A, B = unit_system(g, k, b).A;
                for (Eigen::Index i = 0; i < A.rows(); ++i)
                    for (Eigen::Index j = 0; j < A.cols(); ++j)
                        CHECK(std::abs(A(i, j) - B(i, j)) <= 10.0 * tol * std::abs(B(i, j)));
            }
        }
    }

    TEST_CASE("norm equivalence with the unit form")
    {
        Grid g(1, 1.0, 32);
        Kernel k = Kernel::fractional_power(1, 0.5);
        KernelTable table(g, k, TailPolicy{});
        GridFunction zero(g);
        auto unit = assemble_system(table, CellWeights::unit(g), 1.0, zero);
        auto sym = assemble_system(
            table,
            CellWeights::from_field(g, CoefficientField::periodic_symmetric(
                                           1, SymmetricCoefficient::separable_cosine(1.7, 1.2), 3, 0.125)),
            1.0, zero);
        auto prod = assemble_system(
            table,
            CellWeights::from_field(g, CoefficientField::periodic_product(1, CellFunction::two_phase(0.5, 2, 0.5),
                                                                          CellFunction::cosine(0.6, 1.8), 2, 0.125)),
            1.0, zero);
        oracle::Lcg rng(4);
        for (int t = 0; t < 100; ++t) {
            Eigen::VectorXd u(g.size());
            for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.uniform(-1, 1);
            double q1 = u.dot(unit.A * u), qs = u.dot(sym.A * u), qp = u.dot(prod.A * u);
            CHECK(qs >= q1 / 3.0 * (1 - 1e-12));
            CHECK(qs <= q1 * 3.0 * (1 + 1e-12));
            CHECK(qp >= q1 / 4.0 * (1 - 1e-12));
            CHECK(qp <= q1 * 4.0 * (1 + 1e-12));
        }
    }

    TEST_CASE("Gagliardo seminorm")
    {
        Grid g(1, 2.0, 64);
        TailPolicy tail;
        CHECK(gagliardo_seminorm_sq(g, GridFunction(g), 0.5, tail) == 0.0);
        auto u = project(g, FunctionSpec::gaussian(Point{0.2, 0}, 0.3));
        double s1 = gagliardo_seminorm_sq(g, u, 0.5, tail);
        GridFunction u3(g, 3.0 * u.values);
        CHECK(gagliardo_seminorm_sq(g, u3, 0.5, tail) == doctest::Approx(9.0 * s1).epsilon(1e-12));
        CHECK(s1 > 0.0);

        // aligned indicator of [0, 1]: 2 \int_0^1 \int_{R \ [0,1]} |x - y|^{-3/2} = 16
        double oracle_value = 2.0 * oracle::interval_exterior(0.5, 0.0, 1.0, 0.0, 1.0);
        CHECK(std::abs(oracle_value - 16.0) <= 1e-8);
        auto ind = project(g, FunctionSpec::indicator(Point{0, 0}, Point{1, 0}));
        CHECK(std::abs(gagliardo_seminorm_sq(g, ind, 0.5, tail) - 16.0) <= 0.03 * 16.0);

        auto unit = unit_system(g, Kernel::fractional_power(1, 0.5));
        CHECK(gagliardo_seminorm_sq(unit, ind.values) == doctest::Approx(gagliardo_seminorm_sq(g, ind, 0.5, tail)));
    }

    TEST_CASE("input validation")
    {
        Grid g(1, 1.0, 8);
        CHECK_THROWS_AS(check_assembly_order(1.2), ConfigError);
        CHECK_NOTHROW(check_assembly_order(0.9));
        auto c2 = CoefficientField::periodic_product(2, CellFunction::constant(1), CellFunction::constant(1), 1, 0.25);
        CHECK_THROWS_AS(assemble_system(g, Kernel::fractional_power(1, 0.5), c2, 1.0, GridFunction(g), TailPolicy{}),
                        DimensionError);
        auto c1 = CoefficientField::periodic_product(1, CellFunction::constant(1), CellFunction::constant(1), 1, 0.25);
        CHECK_THROWS_AS(assemble_system(g, Kernel::fractional_power(1, 0.5), c1, 0.0, GridFunction(g), TailPolicy{}),
                        ConfigError);
        CHECK_THROWS_AS(assemble_system(g, Kernel::fractional_power(1, 0.5), c1, 1.0, GridFunction(Grid(1, 1.0, 4)),
                                        TailPolicy{}),
                        DimensionError);
        TailPolicy bad;
        bad.tolerance = 1e-3;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
}
