#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "nhl/coefficient.hpp"
#include "nhl/effective.hpp"
#include "oracles.hpp"

using namespace nhl;

namespace {

const Point kOrigin{0.0, 0.0};

double two_phase_ref(double xi, double a, double b, double theta)
{
    double f = xi - std::floor(xi);
    return f < theta ? a : b;
}

// two-sample Kolmogorov-Smirnov statistic
double ks_statistic(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

std::vector<CoefficientField> product_catalog(double eps)
{
    return {
        CoefficientField::periodic_product(1, CellFunction::constant(1), CellFunction::constant(1), 1, eps),
        CoefficientField::periodic_product(1, CellFunction::constant(2), CellFunction::constant(3), 3, eps),
        CoefficientField::periodic_product(1, CellFunction::two_phase(1, 2, 0.5), CellFunction::constant(1), 2, eps),
        CoefficientField::periodic_product(1, CellFunction::two_phase(0.5, 2, 0.3), CellFunction::cosine(1, 2), 2,
                                           eps),
        CoefficientField::periodic_product(1, CellFunction::cosine(1, 4), CellFunction::two_phase(1, 3, 0.7), 4, eps),
        CoefficientField::periodic_product(2, CellFunction::cosine(1, 3, 1), CellFunction::cosine(2, 1, 0), 3, eps),
    };
}

}  // namespace

TEST_SUITE("coefficient")
{
    TEST_CASE("cell functions are periodic and within their range")
    {
        oracle::Lcg rng(3);
        std::vector<CellFunction> cells{CellFunction::constant(1.5), CellFunction::two_phase(1, 2, 0.3),
                                        CellFunction::cosine(0.5, 2, 0), CellFunction::cosine(1, 3, 1)};
        for (const auto& c : cells) {
            for (int s = 0; s < 1000; ++s) {
                Point xi{rng.uniform(-3, 3), rng.uniform(-3, 3)};
                Point shifted{xi[0] + std::floor(rng.uniform(-5, 5)), xi[1] + std::floor(rng.uniform(-5, 5))};
                CHECK(c(xi) == doctest::Approx(c(shifted)).epsilon(1e-12));
                CHECK(c(xi) >= c.min_value() - 1e-15);
                CHECK(c(xi) <= c.max_value() + 1e-15);
            }
        }
        CHECK(CellFunction::cosine(1, 3)(Point{0.0, 0.0}) == doctest::Approx(1.0));
        CHECK(CellFunction::cosine(1, 3)(Point{0.5, 0.0}) == doctest::Approx(3.0));
    }

    TEST_CASE("point evaluation examples")
    {
        auto ones = CoefficientField::periodic_product(1, CellFunction::constant(1), CellFunction::constant(1), 1, 0.25);
        CHECK(ones(Point{0.3, 0}, Point{-0.7, 0}) == 1.0);
        CHECK(ones.nu(Point{0.3, 0}) == 1.0);

        auto tp = CoefficientField::periodic_product(1, CellFunction::two_phase(1, 2, 0.5), CellFunction::constant(1),
                                                     2, 0.25);
        CHECK(tp.lambda_at(Point{0.05, 0}) == 1.0);
        CHECK(tp(Point{0.05, 0}, Point{0.9, 0}) == 1.0);
        CHECK(tp.nu(Point{0.2, 0}) == 0.5);

        auto c23 = CoefficientField::periodic_product(1, CellFunction::constant(2), CellFunction::constant(3), 3, 1);
        CHECK(c23.nu(Point{0.1, 0}) == 1.5);
        CHECK(c23(Point{0.1, 0}, Point{0.4, 0}) == 6.0);

        auto sym = CoefficientField::periodic_symmetric(1, SymmetricCoefficient::separable_cosine(2, 1), 3, 1.0);
        CHECK(sym(kOrigin, kOrigin) == doctest::Approx(3.0).epsilon(1e-15));
        CHECK_THROWS_AS(sym.nu(kOrigin), Error);
        double xs[1] = {0.0};
        CHECK_THROWS_AS(eval_nu(sym, xs), Error);
        double bad[2] = {0.0, 0.0};
        CHECK_THROWS_AS(eval_coeff(sym, bad, xs), DimensionError);
    }

    TEST_CASE("product fields match an independent two-phase lookup")
    {
        const double eps = 0.125;
        auto tp = CoefficientField::periodic_product(1, CellFunction::two_phase(1, 2, 0.5),
                                                     CellFunction::two_phase(3, 1, 0.25), 3, eps);
        oracle::Lcg rng(5);
        for (int s = 0; s < 1000; ++s) {
            double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
            double expect = two_phase_ref(x / eps, 1, 2, 0.5) * two_phase_ref(y / eps, 3, 1, 0.25);
            CHECK(tp(Point{x, 0}, Point{y, 0}) == expect);
        }
    }

    TEST_CASE("gamma bound is enforced at construction")
    {
        CHECK_THROWS_AS(CoefficientField::periodic_product(1, CellFunction::two_phase(1, 3, 0.5),
                                                           CellFunction::constant(1), 2, 0.25),
                        ConfigError);
        CHECK_THROWS_AS(CoefficientField::periodic_symmetric(1, SymmetricCoefficient::separable_cosine(2, 1), 2, 0.25),
                        ConfigError);
        CHECK_THROWS_AS(CoefficientField::periodic_product(1, CellFunction::constant(1), CellFunction::constant(1),
                                                           0.5, 0.25),
                        ConfigError);
        CHECK_NOTHROW(CoefficientField::periodic_symmetric(1, SymmetricCoefficient::separable_cosine(2, 1), 3, 0.25));
    }

    TEST_CASE("evaluated values lie in the structure's range")
    {
        oracle::Lcg rng(8);
        for (const auto& c : product_catalog(0.1)) {
            double g2 = c.gamma() * c.gamma();
            for (int s = 0; s < 500; ++s) {
                Point x{rng.uniform(-1, 1), rng.uniform(-1, 1)}, y{rng.uniform(-1, 1), rng.uniform(-1, 1)};
                if (c.dim() == 1) x[1] = y[1] = 0.0;
                double v = c(x, y);
                CHECK(v >= 1.0 / g2 - 1e-14);
                CHECK(v <= g2 + 1e-14);
                CHECK(c.nu(x) >= 1.0 / g2 - 1e-14);
                CHECK(c.nu(x) <= g2 + 1e-14);
            }
        }
    }

    TEST_CASE("symmetric structures are exactly symmetric")
    {
        std::vector<SymmetricCoefficient> cat{
            SymmetricCoefficient::separable_cosine(2, 1),
            SymmetricCoefficient::symmetrized_pair(CellFunction::two_phase(1, 2, 0.4), CellFunction::cosine(1, 1.5)),
            SymmetricCoefficient::slow_separable(2, 0.5, 0.1),
            SymmetricCoefficient::custom(
                [](const Point& x, const Point& y, const Point& xi, const Point& eta) {
                    return 2.0 + 0.5 * std::cos(2 * std::numbers::pi * xi[0]) * std::cos(2 * std::numbers::pi * eta[0]) +
                           0.1 * (x[0] + y[0]);
                },
                1.0, 3.0)};
        oracle::Lcg rng(12);
        for (const auto& s : cat) {
            auto per = CoefficientField::periodic_symmetric(1, s, 3, 0.125);
            auto rnd = draw_realization(CoefficientField::random_symmetric(1, s, 3, 0.125), 4);
            for (int k = 0; k < 1000; ++k) {
                Point x{rng.uniform(-1, 1), 0}, y{rng.uniform(-1, 1), 0};
                REQUIRE(per(x, y) == per(y, x));
                REQUIRE(rnd(x, y) == rnd(y, x));
                CHECK(per(x, y) >= 1.0 / 3 - 1e-14);
                CHECK(per(x, y) <= 3 + 1e-14);
            }
        }
    }

    TEST_CASE("random fields need a realization and periodic fields reject one")
    {
        auto r = CoefficientField::random_product(1, CellFunction::two_phase(1, 2, 0.5), CellFunction::constant(1), 2,
                                                  0.25);
        CHECK(r.is_random());
        CHECK_THROWS_AS(r(kOrigin, kOrigin), Error);
        auto p = CoefficientField::periodic_product(1, CellFunction::constant(1), CellFunction::constant(1), 1, 0.25);
        CHECK_THROWS_AS(draw_realization(p, 1), ConfigError);
    }

    TEST_CASE("same seed gives an identical field")
    {
        auto law = CheckerboardLaw{1.0, 3.0, 0.5};
        auto c = CoefficientField::random_checkerboard_product(1, law, CellFunction::constant(1), 3, 0.1);
        auto a = draw_realization(c, 42), b = draw_realization(c, 42), other = draw_realization(c, 43);
        oracle::Lcg rng(1);
        int differ = 0;
        for (int s = 0; s < 1000; ++s) {
            Point x{rng.uniform(-5, 5), 0}, y{rng.uniform(-5, 5), 0};
            REQUIRE(a(x, y) == b(x, y));
            double v = a.lambda_at(x);
            REQUIRE((v == 1.0 || v == 3.0));
            if (a(x, y) != other(x, y)) ++differ;
        }
        CHECK(differ > 100);
    }

    TEST_CASE("checkerboard ensemble mean")
    {
        auto c = CoefficientField::random_checkerboard_product(1, CheckerboardLaw{1.0, 3.0, 0.5},
                                                               CellFunction::constant(1), 3, 1.0);
        const int n = 10000;
        double s = 0.0, s2 = 0.0;
        for (int seed = 1; seed <= n; ++seed) {
            double v = draw_realization(c, static_cast<std::uint64_t>(seed)).lambda_at(kOrigin);
            s += v;
            s2 += v * v;
        }
        double mean = s / n, sd = std::sqrt((s2 - n * mean * mean) / (n - 1));
        CHECK(std::abs(mean - 2.0) <= 3.0 * sd / std::sqrt(double(n)));
    }

    TEST_CASE("shifted fields are stationary in law")
    {
        auto tp = CoefficientField::random_product(1, CellFunction::two_phase(1, 2, 0.3), CellFunction::constant(1), 2,
                                                   0.2);
        auto cb = CoefficientField::random_checkerboard_product(1, CheckerboardLaw{1.0, 2.0, 0.5},
                                                                CellFunction::constant(1), 2, 0.2);
        const int n = 10000;
        // 1% critical value of the two-sample statistic for equal sizes n
        const double critical = 1.628 * std::sqrt(2.0 / n);
        for (const auto* field : {&tp, &cb}) {
            std::vector<std::vector<double>> samples(5);
            const double probes[5] = {0.0, 0.13, -0.41, 0.77, 3.3};
            for (int seed = 1; seed <= n; ++seed) {
                auto f = draw_realization(*field, static_cast<std::uint64_t>(seed));
                for (int k = 0; k < 5; ++k) samples[k].push_back(f.lambda_at(Point{probes[k], 0}));
            }
            for (int k = 1; k < 5; ++k) CHECK(ks_statistic(samples[0], samples[k]) < critical);
        }
    }

    TEST_CASE("spatial averages of a checkerboard approach the expectation")
    {
        auto c = CoefficientField::random_checkerboard_product(1, CheckerboardLaw{1.0, 2.0, 0.5},
                                                               CellFunction::constant(1), 2, 1.0);
        for (std::uint64_t seed : {1, 2, 3, 4}) {
            auto f = draw_realization(c, seed);
            auto average = [&](int cells) {
                double s = 0.0;
                for (int k = 0; k < cells; ++k) s += f.lambda_at(Point{k + 0.5, 0});
                return s / cells;
            };
            CHECK(std::abs(average(1000) - 1.5) / 1.5 < 0.02);
        }
    }

    TEST_CASE("structure names round-trip")
    {
        for (auto s : {Structure::PeriodicProduct, Structure::PeriodicSymmetric, Structure::RandomProduct,
                       Structure::RandomSymmetric, Structure::RandomCheckerboardProduct})
            CHECK(structure_from_string(to_string(s)) == s);
        CHECK_THROWS_AS(structure_from_string("lamellar"), ConfigError);
    }

    TEST_CASE("with_epsilon keeps the realization")
    {
        auto c = draw_realization(CoefficientField::random_product(1, CellFunction::two_phase(1, 2, 0.5),
                                                                   CellFunction::constant(1), 2, 0.25),
                                  9);
        auto d = c.with_epsilon(0.125);
        CHECK(d.epsilon() == 0.125);
        REQUIRE(d.realization().has_value());
        CHECK(d.realization()->shift == c.realization()->shift);
    }
}

TEST_SUITE("effective")
{
    TEST_CASE("catalog values")
    {
        auto e1 = effective_coefficient(
            CoefficientField::periodic_product(1, CellFunction::constant(1), CellFunction::constant(1), 1, 0.25));
        CHECK(e1.value == 1.0);
        CHECK(e1.kind == EffectiveCoefficient::Kind::ConstantScalar);

        auto e6 = effective_coefficient(
            CoefficientField::periodic_product(1, CellFunction::constant(2), CellFunction::constant(3), 3, 0.25));
        CHECK(std::abs(e6.value - 6.0) <= 1e-10);

        // oracle: fine midpoint rule on an independent two-phase lookup
        const int q = 1 << 20;
        double inv = 0.0;
        for (int k = 0; k < q; ++k) inv += 1.0 / two_phase_ref((k + 0.5) / q, 1, 2, 0.5);
        inv /= q;
        auto tp = effective_coefficient(CoefficientField::periodic_product(1, CellFunction::two_phase(1, 2, 0.5),
                                                                           CellFunction::constant(1), 2, 0.25));
        CHECK(std::abs(tp.value - 1.0 / inv) <= 1e-8);
        CHECK(std::abs(tp.value - 4.0 / 3.0) <= 1e-8);
        CHECK(tp.nu_mean == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(tp.mu_mean == doctest::Approx(1.0).epsilon(1e-12));

        auto cb = effective_coefficient(CoefficientField::random_checkerboard_product(
            1, CheckerboardLaw{1.0, 2.0, 0.5}, CellFunction::constant(1), 2, 0.25));
        CHECK(std::abs(cb.value - 4.0 / 3.0) <= 1e-10);
        CHECK_FALSE(cb.mc_stderr.has_value());

        auto sym = effective_coefficient(
            CoefficientField::periodic_symmetric(1, SymmetricCoefficient::separable_cosine(2, 1), 3, 0.25));
        CHECK(sym.kind == EffectiveCoefficient::Kind::TwoPointMap);
        oracle::Lcg rng(2);
        for (int s = 0; s < 100; ++s) {
            Point x{rng.uniform(-1, 1), 0}, y{rng.uniform(-1, 1), 0};
            CHECK(std::abs(sym(x, y) - 2.0) <= 1e-8);
        }
    }

    TEST_CASE("cosine harmonic mean has the closed form sqrt(ab)")
    {
        auto e = effective_coefficient(
            CoefficientField::periodic_product(1, CellFunction::cosine(1, 4), CellFunction::constant(1), 4, 0.25));
        CHECK(e.value == doctest::Approx(2.0).epsilon(1e-10));
        auto e2 = effective_coefficient(
            CoefficientField::periodic_product(2, CellFunction::cosine(1, 4, 1), CellFunction::constant(1), 4, 0.25));
        CHECK(e2.value == doctest::Approx(2.0).epsilon(1e-10));
    }

    TEST_CASE("random shifts of a periodic template keep the periodic value")
    {
        EffectiveQuadrature fine;
        fine.q = 4096;
        auto per = effective_coefficient(CoefficientField::periodic_product(
            1, CellFunction::two_phase(1, 2, 0.3), CellFunction::cosine(1, 2), 2, 0.25), fine);
        auto rnd = effective_coefficient(CoefficientField::random_product(1, CellFunction::two_phase(1, 2, 0.3),
                                                                          CellFunction::cosine(1, 2), 2, 0.25), fine);
        CHECK(rnd.value == doctest::Approx(per.value).epsilon(1e-10));
    }

    TEST_CASE("checkerboard expectation with a non-constant mu")
    {
        // E[mu] = <mu>, E[mu / lambda] = <mu> (q / a + (1 - q) / b) under the independent shift
        auto e = effective_coefficient(CoefficientField::random_checkerboard_product(
            1, CheckerboardLaw{1.0, 2.0, 0.25}, CellFunction::cosine(1, 2), 2, 0.25));
        double mu = 1.5, inv = 0.25 / 1.0 + 0.75 / 2.0;
        CHECK(e.value == doctest::Approx(mu * mu / (mu * inv)).epsilon(1e-10));
    }

    TEST_CASE("symmetric catalog averages")
    {
        auto pair = effective_coefficient(CoefficientField::periodic_symmetric(
            1, SymmetricCoefficient::symmetrized_pair(CellFunction::two_phase(1, 2, 0.4), CellFunction::cosine(1, 1.5)),
            3, 0.25));
        CHECK(pair(kOrigin, kOrigin) == doctest::Approx(1.6 * 1.25).epsilon(1e-10));

        auto slow = effective_coefficient(
            CoefficientField::periodic_symmetric(1, SymmetricCoefficient::slow_separable(2, 0.5, 0.1), 3, 0.25));
        for (double x : {-0.7, 0.0, 0.4})
            for (double y : {-0.2, 0.9}) {
                double expect = (1 + 0.1 * std::cos(std::numbers::pi * x) * std::cos(std::numbers::pi * y)) * 2.0;
                CHECK(slow(Point{x, 0}, Point{y, 0}) == doctest::Approx(expect).epsilon(1e-10));
            }

        auto rs = effective_coefficient(
            CoefficientField::random_symmetric(1, SymmetricCoefficient::separable_cosine(2, 1), 3, 0.25));
        CHECK(rs(kOrigin, kOrigin) == doctest::Approx(2.0).epsilon(1e-10));

        // custom map: Lambda = 2 + 0.5 cos(2 pi xi) cos(2 pi eta) + 0.25 cos(2 pi xi) + 0.25 cos(2 pi eta) -> mean 2
        auto custom = SymmetricCoefficient::custom(
            [](const Point&, const Point&, const Point& xi, const Point& eta) {
                double a = std::cos(2 * std::numbers::pi * xi[0]), b = std::cos(2 * std::numbers::pi * eta[0]);
                return 2.0 + 0.5 * a * b + 0.25 * (a + b);
            },
            1.0, 3.0);
        auto ce = effective_coefficient(CoefficientField::periodic_symmetric(1, custom, 3, 0.25));
        CHECK(ce(kOrigin, kOrigin) == doctest::Approx(2.0).epsilon(1e-8));
    }

    TEST_CASE("a cosine factor split by a phase boundary needs a finer cell rule")
    {
        auto c = CoefficientField::periodic_product(1, CellFunction::two_phase(1, 2, 0.3), CellFunction::cosine(1, 2), 2,
                                                    0.25);
        CHECK_THROWS_AS(effective_coefficient(c), QuadratureError);
        EffectiveQuadrature fine;
        fine.q = 4096;
        CHECK_NOTHROW(effective_coefficient(c, fine));
    }

    TEST_CASE("harmonic, Cauchy-Schwarz and range bounds over the catalog")
    {
        for (const auto& c : product_catalog(0.25)) {
            EffectiveQuadrature quad;
            if (c.dim() == 1) quad.q = 4096;
            auto e = effective_coefficient(c, quad);
            int d = c.dim();
            const auto& lam = *c.lambda_template();
            const auto& mu = *c.mu_template();
            // <mu lambda> by an independent fine midpoint rule
            const int q = 512;
            double ml = 0.0, lmean = 0.0;
            for (int i = 0; i < q; ++i)
                for (int j = 0; j < (d == 2 ? q : 1); ++j) {
                    Point xi{(i + 0.5) / q, d == 2 ? (j + 0.5) / q : 0.0};
                    ml += mu(xi) * lam(xi);
                    lmean += lam(xi);
                }
            double cells = d == 2 ? double(q) * q : q;
            ml /= cells;
            lmean /= cells;
            CHECK(e.value <= ml * (1 + 1e-6));
            if (mu.is_constant() && mu.a() == 1.0) {
                CHECK(e.value <= lmean * (1 + 1e-6));
                if (lam.is_constant()) CHECK(e.value == doctest::Approx(lmean));
                else CHECK(e.value < lmean);
            }
            double g4 = std::pow(c.gamma(), 4);
            CHECK(e.value >= 1.0 / g4);
            CHECK(e.value <= g4);
        }
    }

    TEST_CASE("Monte Carlo path reports a standard error and honours the cap")
    {
        auto c = CoefficientField::random_checkerboard_product(1, CheckerboardLaw{1.0, 2.0, 0.5},
                                                               CellFunction::constant(1), 2, 0.25);
        EffectiveQuadrature q;
        q.monte_carlo = true;
        q.mc_samples = 20000;
        auto e = effective_coefficient(c, q);
        REQUIRE(e.mc_stderr.has_value());
        CHECK(*e.mc_stderr > 0.0);
        CHECK(std::abs(e.value - 4.0 / 3.0) <= 4.0 * *e.mc_stderr);
        q.stderr_cap = 1e-9;
        CHECK_THROWS_AS(effective_coefficient(c, q), Error);
        q.mc_samples = 10;
        CHECK_THROWS_AS(effective_coefficient(c, q), ConfigError);
        EffectiveQuadrature coarse;
        coarse.q = 16;
        CHECK_THROWS_AS(effective_coefficient(c, coarse), ConfigError);
    }
}
