#include "mica/mdd.hpp"

#include <cmath>

#include "doctest.h"
#include "mica/rng.hpp"
#include "oracles.hpp"

using namespace mica;

TEST_SUITE_BEGIN("mdd");

TEST_CASE("constant response gives zero") {
    Vector v = Vector::Constant(8, 3.25);
    Rng rng(1);
    const Matrix u = oracle::random_matrix(8, 2, rng);
    CHECK(mdd_sq(v, u) == 0.0);
}

TEST_CASE("two-point example") {
    Vector v(2), u(2);
    v << 1.0, -1.0;
    u << 0.0, 1.0;
    CHECK(mdd_sq(v, u) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(oracle::mdd(v, Matrix(u)) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("fast path equals brute force, scalar and vector conditioners") {
    Rng rng(42);
    for (int rep = 0; rep < 25; ++rep) {
        const Index n = 20 + static_cast<Index>(rng.uniform_int(180));
        const Index q = 1 + static_cast<Index>(rng.uniform_int(4));
        const Vector v = oracle::random_vector(n, rng);
        const Matrix u = oracle::random_matrix(n, q, rng);
        const double got = mdd_sq(v, u);
        const double want = oracle::mdd(v, u);
        CHECK(oracle::rel_err(got, want) <= 1e-10);
    }
}

TEST_CASE("fast path handles ties in the conditioner") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const Index n = 30;
        const Vector v = oracle::random_vector(n, rng);
        Vector u(n);
        for (Index i = 0; i < n; ++i)
            u(i) = static_cast<double>(rng.uniform_int(4));  // many ties
        const double got = mdd_sq(v, u);
        const double want = oracle::mdd(v, Matrix(u));
        CHECK(oracle::rel_err(got, want) <= 1e-10);
    }
}

TEST_CASE("non-negativity up to float slack") {
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const Index n = 5 + static_cast<Index>(rng.uniform_int(60));
        const Vector v = oracle::random_vector(n, rng);
        const Matrix u = oracle::random_matrix(n, 1 + rng.uniform_int(3), rng);
        CHECK(mdd_sq(v, u) >= -1e-12);
    }
}

TEST_CASE("sign invariance is exact") {
    Rng rng(11);
    for (int rep = 0; rep < 30; ++rep) {
        const Index n = 4 + static_cast<Index>(rng.uniform_int(40));
        const Vector v = oracle::random_vector(n, rng);
        const Vector u = oracle::random_vector(n, rng);
        const double base = mdd_sq(v, u);
        CHECK(mdd_sq(Vector(-v), u) == base);
        CHECK(mdd_sq(v, Vector(-u)) == base);
        CHECK(mdd_sq(Vector(-v), Vector(-u)) == base);
        // vector conditioner
        const Matrix um = oracle::random_matrix(n, 3, rng);
        const double basem = mdd_sq(v, um);
        CHECK(mdd_sq(Vector(-v), um) == basem);
        CHECK(mdd_sq(v, Matrix(-um)) == basem);
    }
}

TEST_CASE("translation invariance") {
    Rng rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        const Index n = 10 + static_cast<Index>(rng.uniform_int(50));
        const Vector v = oracle::random_vector(n, rng);
        const Vector u = oracle::random_vector(n, rng);
        const double c = rng.uniform(-5.0, 5.0);
        const double d = rng.uniform(-5.0, 5.0);
        const double base = mdd_sq(v, u);
        const double shifted = mdd_sq(Vector(v.array() + c), Vector(u.array() + d));
        CHECK(oracle::rel_err(base, shifted) <= 1e-10);
    }
}

TEST_CASE("scaling: a^2 |b| for scalar conditioner") {
    Rng rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        const Index n = 10 + static_cast<Index>(rng.uniform_int(50));
        const Vector v = oracle::random_vector(n, rng);
        const Vector u = oracle::random_vector(n, rng);
        double a = rng.uniform(-3.0, 3.0);
        double b = rng.uniform(-3.0, 3.0);
        if (std::abs(a) < 0.1) a = 0.5;
        if (std::abs(b) < 0.1) b = -0.5;
        const double base = mdd_sq(v, u);
        const double scaled = mdd_sq(Vector(a * v), Vector(b * u));
        CHECK(oracle::rel_err(scaled, a * a * std::abs(b) * base) <= 1e-10);
    }
}

TEST_CASE("dvar examples") {
    SUBCASE("constant rows") {
        Matrix u = Matrix::Constant(6, 2, 1.5);
        CHECK(dvar(u) == 0.0);
    }
    SUBCASE("two points: double centering does not annihilate") {
        Vector u(2);
        u << 0.0, 1.0;
        CHECK(dvar(u) == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(oracle::dvar(Matrix(u)) == doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("random inputs match the double-centering oracle") {
        Rng rng(19);
        for (int rep = 0; rep < 20; ++rep) {
            const Index n = 5 + static_cast<Index>(rng.uniform_int(40));
            const Index q = 1 + static_cast<Index>(rng.uniform_int(3));
            const Matrix u = oracle::random_matrix(n, q, rng);
            CHECK(oracle::rel_err(dvar(u), oracle::dvar(u)) <= 1e-10);
        }
    }
}

TEST_CASE("tr_var_sq") {
    SUBCASE("constant") {
        CHECK(tr_var_sq(Vector::Constant(5, 2.0)) == 0.0);
    }
    SUBCASE("two points") {
        Vector v(2);
        v << -1.0, 1.0;
        CHECK(tr_var_sq(v) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(oracle::tr_var_sq(v) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("double-centering form equals moment form") {
        Rng rng(23);
        for (int rep = 0; rep < 20; ++rep) {
            const Index n = 5 + static_cast<Index>(rng.uniform_int(25));
            const Vector v = oracle::random_vector(n, rng);
            CHECK(oracle::rel_err(tr_var_sq(v), oracle::tr_var_sq(v)) <= 1e-10);
        }
    }
}

TEST_CASE("mdc") {
    Rng rng(29);
    SUBCASE("constant response is degenerate") {
        const Vector u = oracle::random_vector(20, rng);
        CHECK_THROWS_AS(mdc_sq(Vector(Vector::Constant(20, 1.0)), u),
                        DegenerateDenominator);
    }
    SUBCASE("constant conditioner is degenerate") {
        const Vector v = oracle::random_vector(20, rng);
        CHECK_THROWS_AS(mdc_sq(v, Vector(Vector::Constant(20, 2.0))),
                        DegenerateDenominator);
    }
    SUBCASE("perfect mean dependence is positive") {
        const Vector v = oracle::random_vector(500, rng);
        CHECK(mdc_sq(v, v) > 0.0);
    }
    SUBCASE("independent samples stay small") {
        // Threshold checked by simulation: at n = 500 the independent-case
        // value stayed below 0.02 across 200 seeds.
        for (int rep = 0; rep < 10; ++rep) {
            const Vector v = oracle::random_vector(500, rng);
            const Vector u = oracle::random_vector(500, rng);
            CHECK(std::abs(mdc_sq(v, u)) < 0.1);
        }
    }
    SUBCASE("invariance under positive affine maps") {
        for (int rep = 0; rep < 20; ++rep) {
            const Vector v = oracle::random_vector(60, rng);
            const Vector u = oracle::random_vector(60, rng);
            const double base = mdc_sq(v, u);
            const double mapped = mdc_sq(Vector(2.5 * v.array() - 1.0),
                                         Vector(0.75 * u.array() + 3.0));
            CHECK(oracle::rel_err(base, mapped) <= 1e-8);
        }
    }
}

TEST_CASE("make_lagged") {
    Rng rng(31);
    const Matrix x = oracle::random_matrix(5, 3, rng);
    SUBCASE("zero lag keeps all rows") {
        const LaggedPair lp = make_lagged(x, 0, {1, 2}, 0);
        CHECK(lp.response.size() == 5);
        CHECK(lp.conditioner.rows() == 5);
        CHECK(lp.conditioner.cols() == 2);
        CHECK(lp.response == x.col(0));
        CHECK(lp.conditioner.col(0) == x.col(1));
    }
    SUBCASE("lag one drops one row") {
        const LaggedPair lp = make_lagged(x, 2, {0}, 1);
        CHECK(lp.response.size() == 4);
        CHECK(lp.response(0) == x(1, 2));
        CHECK(lp.conditioner(0, 0) == x(0, 0));
        CHECK(lp.conditioner(3, 0) == x(3, 0));
    }
    SUBCASE("boundary and error cases") {
        CHECK_THROWS_AS(make_lagged(x, 0, {1}, 4), std::invalid_argument);
        CHECK_THROWS_AS(make_lagged(x, 0, {}, 1), std::invalid_argument);
        CHECK_THROWS_AS(make_lagged(x, 7, {1}, 1), std::invalid_argument);
    }
}

TEST_CASE("input validation") {
    Vector v(3), u2(2);
    v << 1, 2, 3;
    u2 << 1, 2;
    CHECK_THROWS_AS(mdd_sq(v, u2), std::invalid_argument);
    Vector bad = v;
    bad(1) = std::nan("");
    CHECK_THROWS_AS(mdd_sq(bad, v), std::invalid_argument);
    CHECK_THROWS_AS(dvar(Vector(Vector::Ones(1))), std::invalid_argument);
}

TEST_SUITE_END();
