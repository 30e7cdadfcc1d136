#pragma once

// Test-only oracles, independent of the library's evaluation paths.

#include <Eigen/Core>
#include <cmath>
#include <complex>

namespace diraclab::test {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

/// Matrix exponential by scaling and squaring with a plain Taylor core;
/// plenty for 2x2 arguments of moderate norm.
inline Mat2 expm_scaling_squaring(const Mat2& a) {
    const double norm = a.cwiseAbs().maxCoeff();
    int s = 0;
    double scaled = norm;
    while (scaled > 0.5) {
        scaled *= 0.5;
        ++s;
    }
    const Mat2 b = a / std::ldexp(1.0, s);
    Mat2 term = Mat2::Identity();
    Mat2 sum = Mat2::Identity();
    for (int k = 1; k <= 24; ++k) {
        term = (term * b / static_cast<double>(k)).eval();
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-20) break;
    }
    for (int k = 0; k < s; ++k) sum = (sum * sum).eval();
    return sum;
}

/// x' = M(lambda) x for the constant-potential system, used to exponentiate.
inline Mat2 constant_system_matrix(cplx p0, cplx q0, cplx lambda) {
    Mat2 m;
    m << cplx(0.0, 1.0) * lambda, cplx(0.0, -1.0) * p0, cplx(0.0, 1.0) * q0,
        cplx(0.0, -1.0) * lambda;
    return m;
}

/// Grid maximum of x^rho e^{-lambda x} over [0, pi].
inline double brute_force_peak(double rho, double lambda, int n_points = 100000) {
    double best = 0.0;
    const double pi = 3.14159265358979323846;
    for (int i = 0; i <= n_points; ++i) {
        const double x = pi * i / n_points;
        best = std::max(best, std::pow(x, rho) * std::exp(-lambda * x));
    }
    return best;
}

}  // namespace diraclab::test
