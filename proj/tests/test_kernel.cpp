#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "nhl/assumptions.hpp"
#include "nhl/kernel.hpp"
#include "nhl/quadrature.hpp"
#include "nhl/rng.hpp"
#include "oracles.hpp"

using namespace nhl;

TEST_SUITE("quadrature")
{
    TEST_CASE("smooth rule integrates polynomials and exponentials")
    {
        quad::Options opt;
        CHECK(quad::smooth([](double x) { return x * x; }, 0.0, 3.0, opt) == doctest::Approx(9.0).epsilon(1e-13));
        CHECK(quad::smooth([](double x) { return std::exp(x); }, -1.0, 2.0, opt) ==
              doctest::Approx(std::exp(2.0) - std::exp(-1.0)).epsilon(1e-12));
    }

    TEST_CASE("endpoint-singular rule handles inverse square roots")
    {
        quad::Options opt;
        double v = quad::endpoint_singular([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, opt);
        CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
        double w = quad::endpoint_singular([](double x) { return std::pow(x * (1.0 - x), -0.25); }, 0.0, 1.0, opt);
        double oracle = 2.0 * oracle::graded_left([](double x) { return std::pow(x * (1.0 - x), -0.25); }, 0.0, 0.5);
        CHECK(w == doctest::Approx(oracle).epsilon(1e-9));
    }

    TEST_CASE("Gauss-Legendre rules are exact to degree 2n-1")
    {
        for (int n : {2, 4, 8, 16}) {
            int deg = 2 * n - 1;
            double v = quad::gauss([&](double x) { return std::pow(x, deg - 1) + std::pow(x, deg); }, 0.0, 1.0, n);
            CHECK(v == doctest::Approx(1.0 / deg + 1.0 / (deg + 1)).epsilon(1e-13));
        }
        CHECK_THROWS(quad::gauss_legendre(3));
    }
}

TEST_SUITE("kernel")
{
    TEST_CASE("fractional power evaluation")
    {
        Kernel k = Kernel::fractional_power(1, 0.5);
        CHECK(k(Point{0.0, 0.0}, Point{2.0, 0.0}) == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-15));
        CHECK(k(Point{0.0, 0.0}, Point{2.0, 0.0}) == doctest::Approx(0.353553).epsilon(1e-6));
        Kernel k2 = Kernel::fractional_power(2, 0.5);
        CHECK(k2(Point{0.0, 0.0}, Point{3.0, 4.0}) == doctest::Approx(std::pow(5.0, -2.5)).epsilon(1e-15));
    }

    TEST_CASE("tempered evaluation")
    {
        Kernel k = Kernel::tempered(1, 0.5, 1.0);
        CHECK(k(Point{0.0, 0.0}, Point{1.0, 0.0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
        CHECK(k(Point{0.0, 0.0}, Point{1.0, 0.0}) == doctest::Approx(0.367879).epsilon(1e-6));
    }

    TEST_CASE("diagonal returns the infinity sentinel")
    {
        std::vector<Kernel> ks{Kernel::fractional_power(1, 0.5), Kernel::tempered(1, 0.7),
                               Kernel::perturbed_fractional(1, 0.5, 2.0)};
        for (const auto& k : ks) {
            double x[1] = {0.3};
            KernelValue v = k.eval(x, x);
            CHECK(v.infinite);
            CHECK(v.value == std::numeric_limits<double>::max());
        }
    }

    TEST_CASE("dimension mismatch is rejected")
    {
        Kernel k = Kernel::fractional_power(2, 0.5);
        double x[1] = {0.0}, y[2] = {1.0, 0.0};
        CHECK_THROWS_AS(k.eval(x, y), DimensionError);
    }

    TEST_CASE("order and dimension are validated")
    {
        CHECK_THROWS_AS(Kernel::fractional_power(1, 2.5), ConfigError);
        CHECK_THROWS_AS(Kernel::fractional_power(3, 0.5), ConfigError);
        CHECK_THROWS_AS(Kernel::fractional_power(1, 0.0), ConfigError);
        CHECK_THROWS_AS(Kernel::perturbed_fractional(1, 0.5, 0.5), ConfigError);
    }

    TEST_CASE("built-ins are exactly symmetric and nonnegative on seeded pairs")
    {
        oracle::Lcg rng(7);
        for (int d : {1, 2}) {
            std::vector<Kernel> ks{Kernel::fractional_power(d, 0.5), Kernel::tempered(d, 0.5),
                                   Kernel::perturbed_fractional(d, 0.5, 3.0)};
            for (const auto& k : ks) {
                for (int s = 0; s < 10000; ++s) {
                    Point x{rng.uniform(-3, 3), d == 2 ? rng.uniform(-3, 3) : 0.0};
                    Point y{rng.uniform(-3, 3), d == 2 ? rng.uniform(-3, 3) : 0.0};
                    double a = k(x, y), b = k(y, x);
                    REQUIRE(a == b);
                    REQUIRE(a >= 0.0);
                }
            }
        }
    }

    TEST_CASE("perturbed kernel lies between the power bounds")
    {
        const double ups = 3.0;
        oracle::Lcg rng(11);
        for (int d : {1, 2}) {
            Kernel k = Kernel::perturbed_fractional(d, 0.6, ups);
            for (int s = 0; s < 5000; ++s) {
                Point x{rng.uniform(-2, 2), d == 2 ? rng.uniform(-2, 2) : 0.0};
                Point y{rng.uniform(-2, 2), d == 2 ? rng.uniform(-2, 2) : 0.0};
                double base = std::pow(norm(x - y, d), -d - 0.6);
                double v = k(x, y);
                REQUIRE(v <= ups * ups * base * (1 + 1e-14));
                REQUIRE(v >= base / (ups * ups) * (1 - 1e-14));
            }
        }
    }

    TEST_CASE("radial tail matches closed form and an independent quadrature")
    {
        TailClosure c;
        Kernel k = Kernel::fractional_power(1, 0.5);
        for (double r : {1e-3, 0.1, 1.0, 7.0, 300.0}) {
            double closed = std::pow(r, -0.5) / 0.5;
            CHECK(k.radial_tail(r, Point{1.0, 0.0}, c) == doctest::Approx(closed).epsilon(1e-14));
            CHECK(k.radial_tail_numeric(r, Point{1.0, 0.0}, c) == doctest::Approx(closed).epsilon(1e-8));
        }
        Kernel t = Kernel::tempered(1, 0.5, 1.0);
        for (double r : {0.01, 0.5, 3.0}) {
            double o = oracle::to_infinity([](double z) { return std::exp(-z) * std::pow(z, -1.5); }, r);
            CHECK(t.radial_tail(r, Point{1.0, 0.0}, c) == doctest::Approx(o).epsilon(1e-8));
        }
    }
}

TEST_SUITE("assumptions")
{
    TEST_CASE("fractional power witnesses")
    {
        Kernel k = Kernel::fractional_power(1, 0.5);
        ProbeConfig probe;
        // A3: r^{1/2} * 2 \int_r^\infty z^{-3/2} dz
        double a3_oracle = std::sqrt(2.0) * 2.0 * oracle::to_infinity([](double z) { return std::pow(z, -1.5); }, 2.0);
        AssumptionReport a3 = verify_assumption(k, Assumption::A3_tail, probe);
        CHECK(a3.passed);
        CHECK(a3.witness_constant == doctest::Approx(a3_oracle).epsilon(1e-6));
        CHECK(a3.witness_constant == doctest::Approx(4.0).epsilon(1e-6));

        // radius independence: every rung gives the same value
        double lo = 1e300, hi = 0.0;
        for (double r : default_radius_ladder()) {
            ProbeConfig one;
            one.radii = {r};
            double w = verify_assumption(k, Assumption::A3_tail, one).witness_constant;
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
        CHECK((hi - lo) / hi <= 1e-6);

        // A4: r^{-3/2} * 2 \int_0^r z^{1/2} dz
        double a4_oracle = 2.0 * oracle::composite([](double z) { return std::sqrt(z); }, 0.0, 1.0, 64);
        AssumptionReport a4 = verify_assumption(k, Assumption::A4_coercivity, probe);
        CHECK(a4.passed);
        CHECK(a4.witness_constant == doctest::Approx(a4_oracle).epsilon(1e-5));
        CHECK(a4.witness_constant == doctest::Approx(4.0 / 3.0).epsilon(1e-6));

        // A2: 2 \int_0^1 z^{1/2} dz + 2 \int_1^\infty z^{-3/2} dz
        double a2_oracle = a4_oracle + 2.0 * oracle::to_infinity([](double z) { return std::pow(z, -1.5); }, 1.0);
        AssumptionReport a2 = verify_assumption(k, Assumption::A2_levy_khintchine, probe);
        CHECK(a2.passed);
        CHECK(a2.witness_constant == doctest::Approx(a2_oracle).epsilon(1e-5));
        CHECK(a2.witness_constant == doctest::Approx(16.0 / 3.0).epsilon(1e-6));

        AssumptionReport a1 = verify_assumption(k, Assumption::A1_symmetry, probe);
        CHECK(a1.passed);
        CHECK(a1.witness_constant == 0.0);
    }

    TEST_CASE("two-dimensional fractional power tail")
    {
        Kernel k = Kernel::fractional_power(2, 0.5);
        ProbeConfig probe;
        probe.radii = {0.01, 1.0, 100.0};
        // 2 pi r^{1/2} \int_r^\infty s^{-3/2} ds = 4 pi
        AssumptionReport a3 = verify_assumption(k, Assumption::A3_tail, probe);
        CHECK(a3.witness_constant == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-6));
        // pi r^{-3/2} \int_0^r s^{1/2} ds = 2 pi / 3
        AssumptionReport a4 = verify_assumption(k, Assumption::A4_coercivity, probe);
        CHECK(a4.witness_constant == doctest::Approx(2.0 * std::numbers::pi / 3.0).epsilon(1e-6));
    }

    TEST_CASE("tempered kernel is a negative control for coercivity")
    {
        Kernel k = Kernel::tempered(1, 0.5, 1.0);
        ProbeConfig probe;
        probe.radii = {100.0};
        double oracle_value =
            std::pow(100.0, -1.5) * 2.0 *
            oracle::graded_left([](double z) { return std::sqrt(z) * std::exp(-z); }, 0.0, 100.0, 60, 8);
        AssumptionReport a4 = verify_assumption(k, Assumption::A4_coercivity, probe);
        CHECK_FALSE(a4.passed);
        CHECK(a4.witness_constant < 1e-2);
        CHECK(a4.witness_constant == doctest::Approx(oracle_value).epsilon(1e-6));
        CHECK(a4.witness_constant == doctest::Approx(std::sqrt(std::numbers::pi) * 1e-3).epsilon(1e-6));

        ProbeConfig full;
        CHECK(verify_assumption(k, Assumption::A1_symmetry, full).passed);
        CHECK(verify_assumption(k, Assumption::A2_levy_khintchine, full).passed);
        CHECK(verify_assumption(k, Assumption::A3_tail, full).passed);
    }

    TEST_CASE("lower density holds with equality for the pure power kernel")
    {
        Kernel k = Kernel::fractional_power(1, 0.5);
        ProbeConfig probe;
        probe.samples = 1000;
        probe.balls = 16;
        AssumptionReport b3 = verify_assumption(k, Assumption::B3_lower_density, probe);
        CHECK(b3.passed);
        CHECK(b3.witness_constant == 1.0);
    }

    TEST_CASE("general kernels use the B-kinds")
    {
        Kernel k = Kernel::perturbed_fractional(1, 0.5, 2.0);
        ProbeConfig probe;
        probe.samples = 1000;
        probe.balls = 16;
        CHECK_THROWS_AS(verify_assumption(k, Assumption::A3_tail, probe), Error);
        CHECK(verify_assumption(k, Assumption::B1_symmetry, probe).passed);
        AssumptionReport b2 = verify_assumption(k, Assumption::B2_tail, probe);
        CHECK(b2.passed);
        // multipliers bounded by upsilon^2 around the power tail constant 4
        CHECK(b2.witness_constant <= 4.0 * 4.0 * (1 + 1e-6));
        CHECK(b2.witness_constant >= 4.0 / 4.0 * (1 - 1e-6));
        probe.density_constant = 0.25;
        CHECK(verify_assumption(k, Assumption::B3_lower_density, probe).passed);
    }

    TEST_CASE("radius ladder spans the required range")
    {
        auto r = default_radius_ladder();
        CHECK(r.front() == 1e-3);
        CHECK(r.back() >= 1e3);
        CHECK(r[r.size() - 2] < 1e3);
    }

    TEST_CASE("Wilson bound")
    {
        CHECK(wilson_lower_bound(0, 0, 2.0) == 0.0);
        CHECK(wilson_lower_bound(100, 100, 2.5758293035489004) < 1.0);
        CHECK(wilson_lower_bound(100, 100, 2.5758293035489004) > 0.9);
        // p = 1/2, n = 100, z = 1.96: 0.4038...
        CHECK(wilson_lower_bound(50, 100, 1.96) == doctest::Approx(0.403831).epsilon(1e-5));
    }

    TEST_CASE("assumption names round-trip")
    {
        for (auto a : {Assumption::A1_symmetry, Assumption::A2_levy_khintchine, Assumption::A3_tail,
                       Assumption::A4_coercivity, Assumption::B1_symmetry, Assumption::B2_tail,
                       Assumption::B3_lower_density})
            CHECK(assumption_from_string(to_string(a)) == a);
        CHECK_THROWS_AS(assumption_from_string("Z9"), ConfigError);
    }
}

TEST_SUITE("rng")
{
    TEST_CASE("counter generator is a pure function of key and counter")
    {
        CounterRng a(5), b(5), c(6);
        for (std::uint64_t i = 0; i < 100; ++i) {
            CHECK(a.uniform(1, i) == b.uniform(1, i));
            CHECK(a.uniform(1, i) >= 0.0);
            CHECK(a.uniform(1, i) < 1.0);
        }
        CHECK(a.uniform(1, 0) != c.uniform(1, 0));
        CHECK(a.uniform(1, 0) != a.uniform(2, 0));
        CHECK(lattice_counter(1) != lattice_counter(-1));
        CHECK(lattice_counter(1, 2) != lattice_counter(2, 1));
    }

    TEST_CASE("uniform draws have the right mean")
    {
        CounterRng a(9);
        double s = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) s += a.uniform(3, static_cast<std::uint64_t>(i));
        // stderr of the mean is 1/sqrt(12 n) ~ 9e-4
        CHECK(std::abs(s / n - 0.5) < 4e-3);
    }
}
