#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "diraclab/endpoint.hpp"
#include "diraclab/errors.hpp"
#include "diraclab/fundamental.hpp"
#include "diraclab/problem.hpp"
#include "diraclab/scaled_complex.hpp"
#include "diraclab/series.hpp"

namespace diraclab {

/// Characteristic determinant of the unperturbed problem:
/// Delta0 = A12 + A34 - A23 e^{i pi lambda} + A14 e^{-i pi lambda}.
inline ScaledComplex delta0_scaled(const Minors& m, cplx lambda) {
    const ScaledComplex up(-lambda.imag() * kPi, lambda.real() * kPi);    // e^{+i pi lambda}
    const ScaledComplex down(lambda.imag() * kPi, -lambda.real() * kPi);  // e^{-i pi lambda}
    return ScaledComplex::from(m.a12 + m.a34) - ScaledComplex::from(m.a23) * up +
           ScaledComplex::from(m.a14) * down;
}

inline cplx delta0(const Minors& m, cplx lambda) {
    const cplx i{0.0, 1.0};
    return m.a12 + m.a34 - m.a23 * std::exp(i * kPi * lambda) + m.a14 * std::exp(-i * kPi * lambda);
}

enum class DeltaMethod { ode, series };

struct DeltaOptions {
    DeltaMethod method = DeltaMethod::ode;
    bool allow_ode_for_offdiag = true;  // series path may borrow e12/e21 from the ode
    int ode_resolution = 16;
    int series_resolution = 256;
    double series_tol = 1e-12;
    PropagateOptions prop{};
    SeriesOptions series{};
};

namespace detail {

inline ScaledComplex assemble_delta(const Minors& m, const ScaledComplex& e11,
                                    const ScaledComplex& e22, const ScaledComplex& e12,
                                    const ScaledComplex& e21) {
    return ScaledComplex::from(m.a12 + m.a34) + ScaledComplex::from(m.a32()) * e11 +
           ScaledComplex::from(m.a14) * e22 + ScaledComplex::from(m.a13) * e12 +
           ScaledComplex::from(m.a42()) * e21;
}

}  // namespace detail

/// Delta(lambda) = A12 + A34 + A32 e11(pi) + A14 e22(pi) + A13 e12(pi)
/// + A42 e21(pi), with the entries taken from the ODE propagator or from the
/// iterated-integral series (diagonal entries only; the off-diagonal ones
/// always come from the ode).
inline ScaledComplex delta_scaled(const SpectralProblem& problem, cplx lambda,
                                  const DeltaOptions& opts = {}) {
    const Minors m = problem.minors();
    if (opts.method == DeltaMethod::ode) {
        const FundamentalMatrix fm = propagate(problem, lambda, opts.ode_resolution, false, opts.prop);
        const Mat2Scaled& e = fm.at_pi();
        return detail::assemble_delta(m, e.e11, e.e22, e.e12, e.e21);
    }
    const IteratedIntegralTable table =
        build_tables(problem, lambda, opts.series_resolution, opts.series_tol, opts.series);
    const ScaledComplex e11 = e11_series(table);
    const ScaledComplex e22 = e22_series(table);
    ScaledComplex e12 = ScaledComplex::zero();
    ScaledComplex e21 = ScaledComplex::zero();
    const double scale = m.max_abs();
    const bool needs_offdiag =
        std::abs(m.a13) > 1e-15 * scale || std::abs(m.a42()) > 1e-15 * scale;
    if (needs_offdiag) {
        if (!opts.allow_ode_for_offdiag)
            throw MethodUnavailable(
                "series method covers the diagonal entries only and the ode fallback is disabled");
        const FundamentalMatrix fm = propagate(problem, lambda, opts.ode_resolution, false, opts.prop);
        e12 = fm.at_pi().e12;
        e21 = fm.at_pi().e21;
    }
    return detail::assemble_delta(m, e11, e22, e12, e21);
}

struct DeltaDerivative {
    ScaledComplex value;
    ScaledComplex derivative;
};

/// Delta and d(Delta)/d(lambda) from the co-integrated derivative of the
/// fundamental matrix; avoids finite differences at e^{pi |Im lambda|} scales.
inline DeltaDerivative delta_with_derivative(const SpectralProblem& problem, cplx lambda,
                                             const DeltaOptions& opts = {}) {
    const Minors m = problem.minors();
    const FundamentalMatrix fm = propagate(problem, lambda, opts.ode_resolution, true, opts.prop);
    const Mat2Scaled& e = fm.at_pi();
    const Mat2Scaled& de = fm.dE.back();
    DeltaDerivative out;
    out.value = detail::assemble_delta(m, e.e11, e.e22, e.e12, e.e21);
    out.derivative = ScaledComplex::from(m.a32()) * de.e11 + ScaledComplex::from(m.a14) * de.e22 +
                     ScaledComplex::from(m.a13) * de.e12 + ScaledComplex::from(m.a42()) * de.e21;
    return out;
}

/// Plain-arithmetic determinant; a genuinely separate evaluation path used to
/// cross-check the scaled form where nothing overflows.
inline cplx delta(const SpectralProblem& problem, cplx lambda, const DeltaOptions& opts = {}) {
    const Minors m = problem.minors();
    const FundamentalMatrix fm = propagate(problem, lambda, opts.ode_resolution, false, opts.prop);
    const Mat2 e = fm.at_pi().to_matrix();
    return m.a12 + m.a34 + m.a32() * e(0, 0) + m.a14 * e(1, 1) + m.a13 * e(0, 1) +
           m.a42() * e(1, 0);
}

/// Closed angular region epsilon <= +-arg lambda <= pi - epsilon.
struct Sector {
    enum class Half { upper, lower };

    double epsilon;
    Half half;

    Sector(double eps, Half h) : epsilon(eps), half(h) {
        if (!(eps > 0.0) || !(eps < kPi / 10.0))
            throw DomainError("sector aperture must satisfy 0 < eps < pi/10");
    }

    bool contains(double angle) const {
        if (half == Half::upper) return angle >= epsilon && angle <= kPi - epsilon;
        return angle >= -kPi + epsilon && angle <= -epsilon;
    }

    double bisector() const { return half == Half::upper ? kPi / 2.0 : -kPi / 2.0; }
};

/// beta(r) = |Delta(lambda)| |Im lambda|^{rho_sum} e^{-pi |Im lambda|} along a
/// ray; a positive, non-decaying profile is the desk-scale reading of the
/// sector lower bounds on |Delta|.
struct BoundProfile {
    double ray_angle = 0.0;
    std::vector<double> radii;
    std::vector<double> beta;
    double rho_sum = 0.0;
    double min_beta = 0.0;
};

struct BoundProfileOptions {
    std::optional<double> rho_sum;  // override the endpoint-derived exponent sum
    DeltaOptions delta{};
};

namespace detail {

inline double branch_rho_sum(const SpectralProblem& problem, const Sector& sector) {
    const BcClassification cls = classify_bc(problem.minors());
    const bool a14_lower =
        (cls.tag == BcClass::degenerate_a14 || cls.tag == BcClass::degenerate_both) &&
        sector.half == Sector::Half::lower;
    const bool a32_upper =
        (cls.tag == BcClass::degenerate_a32 || cls.tag == BcClass::degenerate_both) &&
        sector.half == Sector::Half::upper;
    if (!a14_lower && !a32_upper) return 0.0;  // regular-side sector: pure e^{pi|Im|} growth
    const Component pc = Component::P;
    const Component qc = Component::Q;
    const Side p_side = a14_lower ? Side::left : Side::right;
    const Side q_side = a14_lower ? Side::right : Side::left;
    auto pb = endpoint_behavior(problem.potential, pc, p_side);
    auto qb = endpoint_behavior(problem.potential, qc, q_side);
    if (!pb || !qb)
        throw EndpointDataUnavailable("bound profile needs endpoint exponents for this branch");
    return pb->rho + qb->rho;
}

}  // namespace detail

inline BoundProfile bound_profile(const SpectralProblem& problem, const Sector& sector,
                                  double ray_angle, std::span<const double> radii,
                                  const BoundProfileOptions& opts = {}) {
    if (!sector.contains(ray_angle)) throw SectorViolation("ray leaves the sector");
    if (radii.empty()) throw DomainError("bound profile needs at least one radius");
    for (std::size_t i = 0; i + 1 < radii.size(); ++i)
        if (!(radii[i] < radii[i + 1])) throw DomainError("radii must increase");
    if (radii.front() * std::abs(std::sin(ray_angle)) < 2.0)
        throw DomainError("smallest radius must keep |Im lambda| >= 2");

    BoundProfile prof;
    prof.ray_angle = ray_angle;
    prof.rho_sum = opts.rho_sum ? *opts.rho_sum : detail::branch_rho_sum(problem, sector);
    prof.min_beta = std::numeric_limits<double>::infinity();
    for (double r : radii) {
        const cplx lambda = std::polar(r, ray_angle);
        const ScaledComplex d = delta_scaled(problem, lambda, opts.delta);
        const double im = std::abs(lambda.imag());
        const double logbeta = d.logmag + prof.rho_sum * std::log(im) - kPi * im;
        const double beta = std::exp(logbeta);
        prof.radii.push_back(r);
        prof.beta.push_back(beta);
        prof.min_beta = std::min(prof.min_beta, beta);
    }
    return prof;
}

}  // namespace diraclab
