#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "diraclab/scaled_complex.hpp"

using namespace diraclab;

TEST_CASE("scaled complex round trip and arithmetic") {
    std::mt19937_64 g(1234);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        const cplx a{d(g), d(g)}, b{d(g), d(g)};
        const ScaledComplex sa = ScaledComplex::from(a), sb = ScaledComplex::from(b);
        CHECK(std::abs(sa.to_complex() - a) <= 1e-14 * std::abs(a));
        CHECK(std::abs((sa * sb).to_complex() - a * b) <= 1e-13 * std::abs(a * b));
        CHECK(std::abs((sa + sb).to_complex() - (a + b)) <= 1e-13 * (std::abs(a) + std::abs(b)));
        CHECK(std::abs((sa - sb).to_complex() - (a - b)) <= 1e-13 * (std::abs(a) + std::abs(b)));
        if (b != cplx{0.0, 0.0})
            CHECK(std::abs((sa / sb).to_complex() - a / b) <= 1e-13 * std::abs(a / b));
    }
}

TEST_CASE("zero sentinel behaves as absorbing element") {
    const ScaledComplex z = ScaledComplex::zero();
    const ScaledComplex a = ScaledComplex::from({2.0, -1.0});
    CHECK(z.is_zero());
    CHECK((z * a).is_zero());
    CHECK_FALSE((z + a).is_zero());
    CHECK(std::abs((z + a).to_complex() - cplx{2.0, -1.0}) < 1e-15);
    CHECK((a - a).is_zero());
}

TEST_CASE("values far beyond double range stay consistent") {
    // (e^{400})^2 / e^{800} = 1, never representable in plain doubles.
    const ScaledComplex big(400.0, 1.0);
    const ScaledComplex prod = big * big;
    CHECK(prod.logmag == Catch::Approx(800.0));
    const ScaledComplex one = prod.times_exp(-800.0);
    CHECK(std::abs(one.to_complex() - std::polar(1.0, 2.0)) < 1e-14);

    // Addition picks the dominant branch when the gap is astronomic.
    const ScaledComplex tiny(-500.0, 0.3);
    const ScaledComplex sum = big + tiny;
    CHECK(sum.logmag == Catch::Approx(400.0));
    CHECK(sum.phase == Catch::Approx(1.0));
}

TEST_CASE("phase stays on the principal branch") {
    std::mt19937_64 g(77);
    std::uniform_real_distribution<double> d(-40.0, 40.0);
    for (int i = 0; i < 200; ++i) {
        const ScaledComplex s(0.0, d(g));
        CHECK(s.phase <= kPi);
        CHECK(s.phase > -kPi);
    }
}
