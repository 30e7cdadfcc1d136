#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "diraclab/boundary.hpp"
#include "diraclab/endpoint.hpp"
#include "diraclab/potential.hpp"
#include "diraclab/problem.hpp"
#include "support/generators.hpp"

using namespace diraclab;

TEST_CASE("minors of the periodic boundary matrix") {
    const Minors m = compute_minors(BoundaryMatrix::periodic());
    CHECK(m.a12 == cplx{1.0, 0.0});
    CHECK(m.a34 == cplx{1.0, 0.0});
    CHECK(m.a14 == cplx{-1.0, 0.0});
    CHECK(m.a23 == cplx{1.0, 0.0});
    CHECK(m.a13 == cplx{0.0, 0.0});
    CHECK(m.a24 == cplx{0.0, 0.0});
}

TEST_CASE("minors of the separated degenerate pair") {
    const Minors m = compute_minors(BoundaryMatrix::separated_degenerate());
    CHECK(m.a14 == cplx{1.0, 0.0});
    for (cplx v : {m.a12, m.a13, m.a23, m.a24, m.a34}) CHECK(v == cplx{0.0, 0.0});
}

TEST_CASE("proportional rows are rejected") {
    const auto bc = BoundaryMatrix::from_rows({1.0, 0.0, 0.0, 0.0}, {2.0, 0.0, 0.0, 0.0});
    CHECK_THROWS_AS(compute_minors(bc), AllMinorsZero);
}

TEST_CASE("antisymmetric accessor") {
    auto g = test::rng(42);
    const Minors m = compute_minors(test::random_boundary(g));
    for (int j = 1; j <= 4; ++j)
        for (int k = 1; k <= 4; ++k) CHECK(m.at(j, k) == -m.at(k, j));
}

TEST_CASE("Pluecker identity holds for random boundary matrices") {
    auto g = test::rng(7);
    for (int i = 0; i < 300; ++i) {
        const Minors m = compute_minors(test::random_boundary(g));
        const double scale = m.max_abs();
        CHECK(std::abs(m.plucker()) <= 1e-12 * scale * scale);
    }
}

TEST_CASE("classification of the stock examples") {
    CHECK(classify_bc(compute_minors(BoundaryMatrix::periodic())).tag == BcClass::regular);
    const auto sep = classify_bc(compute_minors(BoundaryMatrix::separated_degenerate()));
    CHECK(sep.tag == BcClass::degenerate_a14);
    CHECK_FALSE(sep.notes.empty());

    // Only A12 nonzero: fails both anchor tests.
    const auto bc = BoundaryMatrix::from_rows({1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0});
    CHECK(classify_bc(compute_minors(bc)).tag == BcClass::other_nonregular);

    // A32 anchor: y1(pi) = y2(0) = 0.
    const auto a32 = BoundaryMatrix::from_rows({0.0, 0.0, 1.0, 0.0}, {0.0, 1.0, 0.0, 0.0});
    CHECK(classify_bc(compute_minors(a32)).tag == BcClass::degenerate_a32);
}

TEST_CASE("classification is invariant under invertible row mixing") {
    auto g = test::rng(99);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const BoundaryMatrix bc = test::random_boundary(g);
        cplx t11{d(g), d(g)}, t12{d(g), d(g)}, t21{d(g), d(g)}, t22{d(g), d(g)};
        if (std::abs(t11 * t22 - t12 * t21) < 0.05) continue;
        BoundaryMatrix mixed;
        for (int j = 0; j < 4; ++j) {
            mixed.a[0][j] = t11 * bc.a[0][j] + t12 * bc.a[1][j];
            mixed.a[1][j] = t21 * bc.a[0][j] + t22 * bc.a[1][j];
        }
        CHECK(classify_bc(compute_minors(bc)).tag == classify_bc(compute_minors(mixed)).tag);
    }
}

TEST_CASE("mixing scales all minors by the mixing determinant") {
    auto g = test::rng(1009);
    const BoundaryMatrix bc = test::random_boundary(g);
    const cplx t11{1.0, 0.5}, t12{0.0, -2.0}, t21{0.3, 0.0}, t22{-1.0, 1.0};
    const cplx det = t11 * t22 - t12 * t21;
    BoundaryMatrix mixed;
    for (int j = 0; j < 4; ++j) {
        mixed.a[0][j] = t11 * bc.a[0][j] + t12 * bc.a[1][j];
        mixed.a[1][j] = t21 * bc.a[0][j] + t22 * bc.a[1][j];
    }
    const Minors m0 = compute_minors(bc), m1 = compute_minors(mixed);
    for (int j = 1; j <= 4; ++j)
        for (int k = j + 1; k <= 4; ++k)
            CHECK(std::abs(m1.at(j, k) - det * m0.at(j, k)) < 1e-12 * std::abs(det) * m0.max_abs());
}

TEST_CASE("builtin endpoint data matches the antiderivative") {
    const auto c = potentials::constant({2.0, -1.0});
    REQUIRE(c.left);
    CHECK(c.left->rho == 1.0);
    CHECK(c.left->nu == cplx{2.0, -1.0});

    const auto pw = potentials::power({1.0, 0.0}, -0.5);
    REQUIRE(pw.left);
    CHECK(pw.left->rho == Catch::Approx(0.5));
    CHECK(pw.left->nu.real() == Catch::Approx(2.0));
    CHECK(pw.fn.singular_left);
    CHECK_FALSE(pw.fn.singular_right);

    // p(x) = x(pi - x): vanishes at both ends to first order.
    const auto poly = potentials::polynomial({{0.0, 0.0}, {kPi, 0.0}, {-1.0, 0.0}});
    REQUIRE(poly.left);
    CHECK(poly.left->rho == Catch::Approx(2.0));
    CHECK(poly.left->nu.real() == Catch::Approx(kPi / 2.0));
    REQUIRE(poly.right);
    CHECK(poly.right->rho == Catch::Approx(2.0));
    CHECK(poly.right->nu.real() == Catch::Approx(kPi / 2.0));
}

TEST_CASE("potential spec rejects bad endpoint records") {
    auto bad_rho = potentials::constant({1.0, 0.0});
    bad_rho.left->rho = -1.0;
    CHECK_THROWS_AS(PotentialSpec(bad_rho, potentials::zero()), DomainError);

    auto bad_nu = potentials::constant({1.0, 0.0});
    bad_nu.right->nu = {0.0, 0.0};
    CHECK_THROWS_AS(PotentialSpec(potentials::zero(), bad_nu), DomainError);
}

TEST_CASE("completeness criterion on the stock cases") {
    // Separated degenerate pair with P = Q = 1: both window conditions hold.
    SpectralProblem good{PotentialSpec(potentials::constant({1.0, 0.0}),
                                       potentials::constant({1.0, 0.0})),
                         BoundaryMatrix::separated_degenerate()};
    const auto rep = check_completeness_criterion(good);
    CHECK(rep.applicable);
    CHECK(rep.branch == BcClass::degenerate_a14);
    CHECK(rep.missing.empty());

    // Same boundary with P = 0: the P window clause fails.
    SpectralProblem zero_p{PotentialSpec(potentials::zero(), potentials::constant({1.0, 0.0})),
                           BoundaryMatrix::separated_degenerate()};
    const auto rep0 = check_completeness_criterion(zero_p);
    CHECK_FALSE(rep0.applicable);
    REQUIRE_FALSE(rep0.missing.empty());
    CHECK(rep0.missing.front().find("P left") != std::string::npos);

    // Regular periodic conditions never qualify.
    SpectralProblem reg{PotentialSpec(potentials::constant({1.0, 0.0}),
                                      potentials::constant({1.0, 0.0})),
                        BoundaryMatrix::periodic()};
    const auto repr = check_completeness_criterion(reg);
    CHECK_FALSE(repr.applicable);
    REQUIRE_FALSE(repr.missing.empty());
    CHECK(repr.missing.front().find("minor pattern") != std::string::npos);
}
