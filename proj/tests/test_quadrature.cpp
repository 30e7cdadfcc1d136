#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "diraclab/quadrature.hpp"

using namespace diraclab;

TEST_CASE("adaptive simpson on smooth integrands") {
    auto f = [](double x) { return cplx{std::sin(x), std::cos(2.0 * x)}; };
    const cplx got = integrate_adaptive(f, 0.0, kPi, 1e-13);
    CHECK(std::abs(got.real() - 2.0) < 1e-11);
    CHECK(std::abs(got.imag() - 0.0) < 1e-11);

    auto osc = [](double x) { return cplx{std::cos(37.0 * x), 0.0}; };
    const cplx o = integrate_adaptive(osc, 0.0, kPi, 1e-12);
    CHECK(std::abs(o.real() - std::sin(37.0 * kPi) / 37.0) < 1e-10);
}

TEST_CASE("graded quadrature absorbs integrable endpoint singularities") {
    auto sqrt_sing = [](double x) { return cplx{1.0 / std::sqrt(x), 0.0}; };
    const cplx got = integrate_graded_left(sqrt_sing, 0.0, 1.0, 1e-12);
    CHECK(std::abs(got.real() - 2.0) < 1e-9);

    auto shifted = [](double x) { return cplx{1.0 / std::sqrt(kPi - x), 0.0}; };
    const cplx right = integrate_graded_right(shifted, 0.0, kPi, 1e-12);
    CHECK(std::abs(right.real() - 2.0 * std::sqrt(kPi)) < 1e-9);

    auto strong = [](double x) { return cplx{std::pow(x, -0.8), 0.0}; };
    const cplx s = integrate_graded_left(strong, 0.0, 1.0, 1e-12);
    CHECK(std::abs(s.real() - 5.0) < 1e-6);
}

TEST_CASE("graded quadrature is exact enough on smooth integrands too") {
    auto f = [](double x) { return cplx{x * x, -x}; };
    const cplx got = integrate_graded_left(f, 0.0, 2.0, 1e-13);
    CHECK(std::abs(got - cplx{8.0 / 3.0, -2.0}) < 1e-10);

    const cplx whole = integrate_endpoint_tolerant(f, 0.0, 2.0, 1e-13);
    CHECK(std::abs(whole - cplx{8.0 / 3.0, -2.0}) < 1e-10);
}

TEST_CASE("zero integrand short-circuits") {
    auto f = [](double) { return cplx{0.0, 0.0}; };
    CHECK(integrate_graded_left(f, 0.0, 1.0, 1e-12) == cplx{0.0, 0.0});
}
