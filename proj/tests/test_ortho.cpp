#include "mica/ortho.hpp"

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mica/rng.hpp"
#include "oracles.hpp"

using namespace mica;

namespace {

OrthoMatrix random_signed_permutation(Index p, Rng& rng) {
    std::vector<Index> perm(static_cast<std::size_t>(p));
    std::iota(perm.begin(), perm.end(), 0);
    for (Index k = p - 1; k > 0; --k) {
        const auto r = static_cast<Index>(rng.uniform_int(k + 1));
        std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(r)]);
    }
    Matrix m = Matrix::Zero(p, p);
    for (Index i = 0; i < p; ++i)
        m(perm[static_cast<std::size_t>(i)], i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return OrthoMatrix::from(std::move(m));
}

}  // namespace

TEST_SUITE_BEGIN("ortho");

TEST_CASE("givens_compose basics") {
    SUBCASE("zero angles give the identity") {
        const OrthoMatrix q = givens_compose(Vector::Zero(6));  // p = 4
        CHECK(q.dim() == 4);
        CHECK((q.mat() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("p=2 quarter turn") {
        Vector theta(1);
        theta << std::numbers::pi / 2;
        const OrthoMatrix q = givens_compose(theta);
        CHECK(q.mat()(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(q.mat()(0, 1) == doctest::Approx(1.0));
        CHECK(q.mat()(1, 0) == doctest::Approx(-1.0));
        CHECK(q.mat()(1, 1) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("random angles produce orthogonal matrices") {
        Rng rng(5);
        for (int rep = 0; rep < 10; ++rep) {
            Vector theta(15);  // p = 6
            for (Index i = 0; i < 15; ++i) theta(i) = rng.uniform(0.0, std::numbers::pi);
            const OrthoMatrix q = givens_compose(theta);
            CHECK(detail::ortho_error(q.mat()) <= 1e-12);
        }
    }
    SUBCASE("wrong angle count") {
        CHECK_THROWS_AS(givens_compose(Vector::Zero(4)), std::invalid_argument);
    }
}

TEST_CASE("haar_random") {
    SUBCASE("p=1 gives a sign") {
        const OrthoMatrix q = haar_random(1, 7u);
        CHECK(std::abs(std::abs(q.mat()(0, 0)) - 1.0) <= 1e-15);
    }
    SUBCASE("fixed seed is reproducible") {
        const OrthoMatrix a = haar_random(5, 123u);
        const OrthoMatrix b = haar_random(5, 123u);
        CHECK((a.mat() - b.mat()).cwiseAbs().maxCoeff() == 0.0);
        const OrthoMatrix c = haar_random(5, 124u);
        CHECK((a.mat() - c.mat()).cwiseAbs().maxCoeff() > 0.0);
    }
    SUBCASE("orthogonality") {
        for (std::uint64_t s = 0; s < 20; ++s)
            CHECK(detail::ortho_error(haar_random(8, s).mat()) <= 1e-12);
    }
    SUBCASE("entry mean is near zero") {
        // var(Q_ij) = 1/p; with 2000 draws of a 10x10 matrix the pooled mean
        // has standard error below sqrt(0.1 / 200000) ~ 7e-4 ignoring the
        // within-draw dependence; 5 standard errors gives a comfortable band.
        Rng rng(99);
        double acc = 0.0;
        const int draws = 2000;
        for (int k = 0; k < draws; ++k) acc += haar_random(10, rng).mat().sum();
        const double mean = acc / (draws * 100.0);
        CHECK(std::abs(mean) < 5 * std::sqrt(0.1 / (draws * 100.0)));
    }
}

TEST_CASE("cayley_step") {
    Rng rng(21);
    const OrthoMatrix q = haar_random(4, 17u);
    SUBCASE("zero gradient keeps the point") {
        const OrthoMatrix out = cayley_step(q, Matrix::Zero(4, 4), 0.5);
        CHECK((out.mat() - q.mat()).cwiseAbs().maxCoeff() <= 1e-14);
    }
    SUBCASE("any step stays orthogonal") {
        for (int rep = 0; rep < 10; ++rep) {
            const Matrix g = oracle::random_matrix(4, 4, rng);
            const OrthoMatrix out = cayley_step(q, g, 0.37);
            CHECK(detail::ortho_error(out.mat()) <= 1e-10);
        }
    }
    SUBCASE("first-order behavior as tau -> 0") {
        const Matrix g = oracle::random_matrix(4, 4, rng);
        const Matrix w = g * q.mat().transpose() - q.mat() * g.transpose();
        const double wq = (w * q.mat()).norm();
        for (double tau : {1e-3, 1e-4, 1e-5}) {
            const OrthoMatrix out = cayley_step(q, g, tau);
            const double move = (out.mat() - q.mat()).norm();
            CHECK(move == doctest::Approx(tau * wq).epsilon(1e-2));
        }
    }
    SUBCASE("invalid tau") {
        CHECK_THROWS_AS(cayley_step(q, Matrix::Zero(4, 4), 0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("align_columns") {
    Rng rng(33);
    SUBCASE("identical matrices") {
        const OrthoMatrix b = haar_random(5, 3u);
        const Alignment a = align_columns(b, b);
        for (Index i = 0; i < 5; ++i) {
            CHECK(a.permutation[static_cast<std::size_t>(i)] == i);
            CHECK(a.signs[static_cast<std::size_t>(i)] == 1);
        }
        CHECK(a.score == doctest::Approx(5.0).epsilon(1e-12));
    }
    SUBCASE("signed permutation is recovered exactly") {
        const OrthoMatrix b = haar_random(4, 9u);
        Matrix c = b.mat();
        c.col(0).swap(c.col(1));
        c.col(0) *= -1.0;
        const Alignment a = align_columns(b, OrthoMatrix::from(c));
        CHECK(a.permutation[0] == 1);
        CHECK(a.permutation[1] == 0);
        CHECK(a.signs[1] == -1);
        CHECK(a.score == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("p=2 rotation by pi/3 picks the cross match") {
        const double t = std::numbers::pi / 3;
        Matrix b = Matrix::Identity(2, 2);
        Matrix c(2, 2);
        c << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
        const Alignment a =
            align_columns(OrthoMatrix::from(b), OrthoMatrix::from(c));
        CHECK(a.score == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    }
    SUBCASE("matches exhaustive search for p <= 5") {
        for (int rep = 0; rep < 30; ++rep) {
            const Index p = 2 + static_cast<Index>(rng.uniform_int(4));
            const OrthoMatrix b = haar_random(p, rng);
            const OrthoMatrix c = haar_random(p, rng);
            const Alignment a = align_columns(b, c);
            const double brute = oracle::best_alignment_score(b.mat(), c.mat());
            CHECK(a.score == doctest::Approx(brute).epsilon(1e-12));
        }
    }
}

TEST_CASE("d_distance_scaled") {
    Rng rng(37);
    SUBCASE("zero cases and symmetry") {
        const OrthoMatrix b = haar_random(5, 41u);
        CHECK(d_distance_scaled(b, b) <= 1e-15);
        const OrthoMatrix c = haar_random(5, 42u);
        CHECK(d_distance_scaled(b, c) ==
              doctest::Approx(d_distance_scaled(c, b)).epsilon(1e-12));
    }
    SUBCASE("pi/3 rotation in the plane") {
        const double t = std::numbers::pi / 3;
        Matrix c(2, 2);
        c << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
        const double d2 = d_distance_scaled(OrthoMatrix::from(Matrix::Identity(2, 2)),
                                            OrthoMatrix::from(c));
        CHECK(d2 == doctest::Approx(1.0 - std::sqrt(3.0) / 2.0).epsilon(1e-12));
    }
    SUBCASE("signed permutations are at distance zero") {
        for (int rep = 0; rep < 100; ++rep) {
            const Index p = 2 + static_cast<Index>(rng.uniform_int(6));
            const OrthoMatrix b = haar_random(p, rng);
            const OrthoMatrix perm = random_signed_permutation(p, rng);
            const OrthoMatrix c = OrthoMatrix::from(b.mat() * perm.mat());
            CHECK(d_distance_scaled(b, c) <= 1e-12);
        }
    }
}

TEST_CASE("dtilde_distance_scaled") {
    Rng rng(43);
    auto blocks_of = [](const Matrix& q, const std::vector<int>& sizes) {
        std::vector<SemiOrthoBlock> out;
        Index at = 0;
        for (int s : sizes) {
            out.push_back(SemiOrthoBlock::from(q.middleCols(at, s)));
            at += s;
        }
        return out;
    };
    SUBCASE("identical blocks") {
        const OrthoMatrix q = haar_random(6, 51u);
        const auto b = blocks_of(q.mat(), {3, 2, 1});
        CHECK(dtilde_distance_scaled(b, b) <= 1e-14);
    }
    SUBCASE("within-block rotations do not matter") {
        for (int rep = 0; rep < 20; ++rep) {
            const OrthoMatrix q = haar_random(6, rng);
            const auto b = blocks_of(q.mat(), {3, 2, 1});
            Matrix rotated = q.mat();
            rotated.middleCols(0, 3) =
                rotated.middleCols(0, 3) * haar_random(3, rng).mat();
            rotated.middleCols(3, 2) =
                rotated.middleCols(3, 2) * haar_random(2, rng).mat();
            const auto c = blocks_of(rotated, {3, 2, 1});
            CHECK(dtilde_distance_scaled(b, c) <= 1e-10);
        }
    }
    SUBCASE("axes versus axes rotated by pi/4") {
        Matrix b = Matrix::Identity(2, 2);
        const double t = std::numbers::pi / 4;
        Matrix c(2, 2);
        c << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
        const auto bb = blocks_of(b, {1, 1});
        const auto cb = blocks_of(c, {1, 1});
        CHECK(dtilde_distance_scaled(bb, cb) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("block permutations are matched") {
        const OrthoMatrix q = haar_random(6, 77u);
        const auto b = blocks_of(q.mat(), {2, 2, 2});
        Matrix swapped(6, 6);
        swapped << q.mat().middleCols(4, 2), q.mat().middleCols(0, 2),
            q.mat().middleCols(2, 2);
        const auto c = blocks_of(swapped, {2, 2, 2});
        CHECK(dtilde_distance_scaled(b, c) <= 1e-12);
    }
    SUBCASE("size multiset mismatch throws") {
        const OrthoMatrix q = haar_random(6, 78u);
        CHECK_THROWS_AS(dtilde_distance_scaled(blocks_of(q.mat(), {3, 2, 1}),
                                               blocks_of(q.mat(), {2, 2, 2})),
                        std::invalid_argument);
    }
}

TEST_CASE("OrthoMatrix invariant repair and rejection") {
    Rng rng(53);
    const OrthoMatrix q = haar_random(5, 61u);
    SUBCASE("small drift is repaired") {
        Matrix drifted = q.mat() + 1e-7 * oracle::random_matrix(5, 5, rng);
        const OrthoMatrix fixed = OrthoMatrix::from(drifted);
        CHECK(detail::ortho_error(fixed.mat()) <= 1e-8);
        CHECK((fixed.mat() - q.mat()).cwiseAbs().maxCoeff() < 1e-5);
    }
    SUBCASE("gross violation is rejected") {
        Matrix bad = q.mat();
        bad(0, 0) += 0.01;
        CHECK_THROWS_AS(OrthoMatrix::from(bad), std::invalid_argument);
    }
}

TEST_SUITE_END();
