#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "diraclab/errors.hpp"
#include "diraclab/ode.hpp"
#include "diraclab/problem.hpp"
#include "diraclab/quadrature.hpp"
#include "diraclab/scaled_complex.hpp"

namespace diraclab {

using Mat2 = Eigen::Matrix2cd;

/// 2x2 matrix with overflow-safe entries.
struct Mat2Scaled {
    ScaledComplex e11, e12, e21, e22;

    static Mat2Scaled identity() {
        return {ScaledComplex::one(), ScaledComplex::zero(), ScaledComplex::zero(),
                ScaledComplex::one()};
    }

    static Mat2Scaled from(const Mat2& m) {
        return {ScaledComplex::from(m(0, 0)), ScaledComplex::from(m(0, 1)),
                ScaledComplex::from(m(1, 0)), ScaledComplex::from(m(1, 1))};
    }

    ScaledComplex entry(int i, int j) const {
        if (i == 0) return j == 0 ? e11 : e12;
        return j == 0 ? e21 : e22;
    }

    ScaledComplex det() const { return e11 * e22 - e12 * e21; }

    double max_logmag() const {
        double m = e11.logmag;
        for (const ScaledComplex* s : {&e12, &e21, &e22}) m = std::max(m, s->logmag);
        return m;
    }

    /// Plain matrix; refuses to overflow silently.
    Mat2 to_matrix() const {
        if (max_logmag() > 700.0)
            throw OverflowGuard("matrix entry exceeds double range; use scaled access");
        Mat2 m;
        m << e11.to_complex(), e12.to_complex(), e21.to_complex(), e22.to_complex();
        return m;
    }

    /// diag(d1, d2) * M.
    Mat2Scaled row_scaled(const ScaledComplex& d1, const ScaledComplex& d2) const {
        return {d1 * e11, d1 * e12, d2 * e21, d2 * e22};
    }

    friend Mat2Scaled operator*(const Mat2Scaled& a, const Mat2Scaled& b) {
        return {a.e11 * b.e11 + a.e12 * b.e21, a.e11 * b.e12 + a.e12 * b.e22,
                a.e21 * b.e11 + a.e22 * b.e21, a.e21 * b.e12 + a.e22 * b.e22};
    }

    friend Mat2Scaled operator+(const Mat2Scaled& a, const Mat2Scaled& b) {
        return {a.e11 + b.e11, a.e12 + b.e12, a.e21 + b.e21, a.e22 + b.e22};
    }
};

/// Samples of the fundamental matrix E(x, lambda), E(0) = I, on a uniform
/// grid over [0, pi], optionally with the lambda-derivative.
struct FundamentalMatrix {
    cplx lambda;
    std::vector<double> grid;
    std::vector<Mat2Scaled> E;
    std::vector<Mat2Scaled> dE;  // empty unless requested

    const Mat2Scaled& at_pi() const { return E.back(); }
    bool has_derivative() const { return !dE.empty(); }
};

struct PropagateOptions {
    OdeTolerances ode{};
    bool allow_scaled = true;   // refuse large |Im lambda| when false
    double log_budget = 300.0;  // plain-mode guard threshold on |Im lambda|*pi
    double singular_cut = 1e-12;
};

namespace detail {

// K(x) of the locally substituted system, phases relative to x_ref.
struct LocalKernel {
    const Potential* P;
    const Potential* Q;
    cplx lambda;
    double x_ref;

    Mat2 operator()(double x, const Mat2& z) const {
        const cplx w = std::exp(cplx(0.0, -2.0) * lambda * (x - x_ref));
        const cplx k12 = cplx(0.0, -1.0) * (*P)(x) * w;
        const cplx k21 = cplx(0.0, 1.0) * (*Q)(x) / w;
        Mat2 out;
        out(0, 0) = k12 * z(1, 0);
        out(0, 1) = k12 * z(1, 1);
        out(1, 0) = k21 * z(0, 0);
        out(1, 1) = k21 * z(0, 1);
        return out;
    }
};

// State [Z | dZ/dlambda] for derivative co-integration.
struct LocalKernelWithDerivative {
    LocalKernel base;

    Eigen::Matrix<cplx, 2, 4> operator()(double x, const Eigen::Matrix<cplx, 2, 4>& s) const {
        const double t = x - base.x_ref;
        const cplx w = std::exp(cplx(0.0, -2.0) * base.lambda * t);
        const cplx k12 = cplx(0.0, -1.0) * (*base.P)(x) * w;
        const cplx k21 = cplx(0.0, 1.0) * (*base.Q)(x) / w;
        const cplx dk12 = cplx(0.0, -2.0 * t) * k12;
        const cplx dk21 = cplx(0.0, 2.0 * t) * k21;
        Eigen::Matrix<cplx, 2, 4> out;
        // Z' = K Z
        out(0, 0) = k12 * s(1, 0);
        out(0, 1) = k12 * s(1, 1);
        out(1, 0) = k21 * s(0, 0);
        out(1, 1) = k21 * s(0, 1);
        // dZ' = K dZ + (dK/dlambda) Z
        out(0, 2) = k12 * s(1, 2) + dk12 * s(1, 0);
        out(0, 3) = k12 * s(1, 3) + dk12 * s(1, 1);
        out(1, 2) = k21 * s(0, 2) + dk21 * s(0, 0);
        out(1, 3) = k21 * s(0, 3) + dk21 * s(0, 1);
        return out;
    }
};

// Second Picard iterate across a tiny endpoint cell [a, b]; used where the
// potential is not evaluable at the endpoint itself.
inline Mat2 picard_transition(const Potential& P, const Potential& Q, cplx lambda, double a,
                              double b, bool singular_at_left) {
    auto kp = [&](double t) { return P(t) * std::exp(cplx(0.0, -2.0) * lambda * (t - a)); };
    auto kq = [&](double t) { return Q(t) * std::exp(cplx(0.0, 2.0) * lambda * (t - a)); };
    cplx ip, iq;
    if (singular_at_left) {
        ip = integrate_graded_left(kp, a, b, 1e-14);
        iq = integrate_graded_left(kq, a, b, 1e-14);
    } else {
        ip = integrate_graded_right(kp, a, b, 1e-14);
        iq = integrate_graded_right(kq, a, b, 1e-14);
    }
    Mat2 omega;
    omega << cplx{0.0, 0.0}, cplx(0.0, -1.0) * ip, cplx(0.0, 1.0) * iq, cplx{0.0, 0.0};
    return Mat2::Identity() + omega + 0.5 * (omega * omega).eval();
}

inline ScaledComplex phase_factor(cplx lambda, double t) {
    // e^{i lambda t} without evaluating the exponential.
    return ScaledComplex(-lambda.imag() * t, lambda.real() * t);
}

}  // namespace detail

/// Fundamental matrix by oscillation-removed propagation: on each segment the
/// substitution z = diag(e^{-i lambda (x-s)}, e^{i lambda (x-s)}) y bounds the
/// kernel by |P| + |Q| independently of Re lambda, and segment transitions are
/// accumulated in scaled arithmetic, so any |Im lambda| is representable.
inline FundamentalMatrix propagate(const SpectralProblem& problem, cplx lambda,
                                   int grid_resolution, bool want_derivative,
                                   const PropagateOptions& opts = {}) {
    if (grid_resolution < 16) throw DomainError("propagate needs grid_resolution >= 16");
    const double b = lambda.imag();
    if (!opts.allow_scaled && std::abs(b) * kPi > opts.log_budget)
        throw OverflowGuard("|Im lambda|*pi exceeds the log-scale budget in plain mode");

    const Potential& P = problem.potential.P();
    const Potential& Q = problem.potential.Q();
    const int n = grid_resolution;

    FundamentalMatrix out;
    out.lambda = lambda;
    out.grid.resize(n + 1);
    for (int k = 0; k <= n; ++k) out.grid[k] = kPi * k / n;
    out.E.reserve(n + 1);
    out.E.push_back(Mat2Scaled::identity());
    if (want_derivative) {
        out.dE.reserve(n + 1);
        out.dE.push_back(Mat2Scaled{});  // dE(0) = 0
    }

    const double delta = opts.singular_cut;
    const bool sing_l = problem.potential.any_singular_left();
    const bool sing_r = problem.potential.any_singular_right();

    Mat2Scaled E_acc = Mat2Scaled::identity();
    Mat2Scaled dE_acc{};  // zero

    // Keep |2 Im lambda| * segment <= 50 so local kernels stay in range.
    const double max_seg = 50.0 / std::max(1.0, 2.0 * std::abs(b));

    for (int cell = 0; cell < n; ++cell) {
        double x0 = out.grid[cell];
        double x1 = out.grid[cell + 1];
        if (sing_l && cell == 0) {
            const Mat2 t = detail::picard_transition(P, Q, lambda, 0.0, delta, true);
            // E(delta), and dE(delta) ~ 0 at this window size
            E_acc = Mat2Scaled::from(t).row_scaled(detail::phase_factor(lambda, delta),
                                                   detail::phase_factor(-lambda, delta));
            x0 = delta;
        }
        const bool last_cell = cell == n - 1;
        const double rk_end = (sing_r && last_cell) ? x1 - delta : x1;

        const int n_seg = std::max(1, static_cast<int>(std::ceil((rk_end - x0) / max_seg)));
        for (int s = 0; s < n_seg; ++s) {
            const double a = x0 + (rk_end - x0) * s / n_seg;
            const double c = x0 + (rk_end - x0) * (s + 1) / n_seg;
            const double len = c - a;
            const ScaledComplex d1 = detail::phase_factor(lambda, len);
            const ScaledComplex d2 = detail::phase_factor(-lambda, len);
            if (!want_derivative) {
                Mat2 z = Mat2::Identity();
                detail::LocalKernel rhs{&P, &Q, lambda, a};
                dopri5_integrate(z, a, c, rhs, opts.ode);
                E_acc = Mat2Scaled::from(z).row_scaled(d1, d2) * E_acc;
            } else {
                Eigen::Matrix<cplx, 2, 4> state = Eigen::Matrix<cplx, 2, 4>::Zero();
                state(0, 0) = 1.0;
                state(1, 1) = 1.0;
                detail::LocalKernelWithDerivative rhs{{&P, &Q, lambda, a}};
                dopri5_integrate(state, a, c, rhs, opts.ode);
                const Mat2 z = state.leftCols<2>();
                const Mat2 dz = state.rightCols<2>();
                Mat2 w = dz;
                w.row(0) += cplx(0.0, len) * z.row(0);
                w.row(1) += cplx(0.0, -len) * z.row(1);
                const Mat2Scaled zs = Mat2Scaled::from(z).row_scaled(d1, d2);
                dE_acc = Mat2Scaled::from(w).row_scaled(d1, d2) * E_acc + zs * dE_acc;
                E_acc = zs * E_acc;
            }
        }
        if (sing_r && last_cell) {
            const Mat2 t = detail::picard_transition(P, Q, lambda, rk_end, x1, false);
            const Mat2Scaled ts = Mat2Scaled::from(t).row_scaled(
                detail::phase_factor(lambda, delta), detail::phase_factor(-lambda, delta));
            E_acc = ts * E_acc;
            if (want_derivative) dE_acc = ts * dE_acc;
        }
        out.E.push_back(E_acc);
        if (want_derivative) out.dE.push_back(dE_acc);
    }
    return out;
}

/// Closed form of E(x, lambda) for constant potentials: with
/// w^2 = lambda^2 - P0 Q0, E = C I + S M where C = cos(x w), S = sin(x w)/w,
/// both even in w so no branch choice enters; S -> x as w -> 0.
inline Mat2 constant_E(cplx P0, cplx Q0, cplx lambda, double x) {
    const cplx w2 = lambda * lambda - P0 * Q0;
    const cplx z2 = w2 * x * x;  // (x w)^2
    cplx C, S;
    if (std::abs(z2) < 1e-3) {
        // Even Taylor series in xw; converges fast at this size.
        cplx c{1.0, 0.0}, s{1.0, 0.0}, term{1.0, 0.0};
        for (int k = 1; k <= 8; ++k) {
            term *= -z2 / static_cast<double>(2 * k * (2 * k - 1));
            c += term;
            s += term * static_cast<double>(2 * k) / static_cast<double>(2 * k + 1);
        }
        C = c;
        S = x * s;
    } else {
        const cplx w = std::sqrt(w2);
        C = std::cos(x * w);
        S = std::sin(x * w) / w;
    }
    Mat2 e;
    e(0, 0) = C + cplx(0.0, 1.0) * lambda * S;
    e(0, 1) = cplx(0.0, -1.0) * P0 * S;
    e(1, 0) = cplx(0.0, 1.0) * Q0 * S;
    e(1, 1) = C - cplx(0.0, 1.0) * lambda * S;
    return e;
}

/// Deviation table for the large-lambda profile of the diagonal entries along
/// a fixed ray: d11 = |e^{-i lambda pi} e11(pi) - 1|, d22 the mirror image,
/// plus the e^{-pi |Im lambda|}-normalized magnitudes (the bounded diagnostic
/// away from the real axis).
struct AsymptoticProfile {
    double ray_angle;
    std::vector<double> radii;
    std::vector<double> d11, d22;
    std::vector<double> scaled11, scaled22;
};

inline AsymptoticProfile asymptotic_profile(const SpectralProblem& problem, double ray_angle,
                                            std::span<const double> radii,
                                            const PropagateOptions& opts = {}) {
    for (std::size_t i = 0; i + 1 < radii.size(); ++i)
        if (!(radii[i] < radii[i + 1])) throw DomainError("radii must increase");
    AsymptoticProfile prof;
    prof.ray_angle = ray_angle;
    for (double r : radii) {
        const cplx lambda = std::polar(r, ray_angle);
        const FundamentalMatrix fm = propagate(problem, lambda, 16, false, opts);
        const ScaledComplex e11 = fm.at_pi().e11;
        const ScaledComplex e22 = fm.at_pi().e22;
        const ScaledComplex one = ScaledComplex::one();
        const ScaledComplex p11 = detail::phase_factor(-lambda, kPi) * e11;
        const ScaledComplex p22 = detail::phase_factor(lambda, kPi) * e22;
        prof.radii.push_back(r);
        prof.d11.push_back((p11 - one).abs());
        prof.d22.push_back((p22 - one).abs());
        const double damp = kPi * std::abs(lambda.imag());
        prof.scaled11.push_back(std::exp(e11.logmag - damp));
        prof.scaled22.push_back(std::exp(e22.logmag - damp));
    }
    return prof;
}

}  // namespace diraclab
