#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace diraclab {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into the principal branch (-pi, pi].
inline double wrap_phase(double phi) {
    double r = std::remainder(phi, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

/// Complex number carried as (log magnitude, phase). Values of size
/// e^{pi |Im lambda|} stay representable far beyond double range; zero is
/// the logmag = -inf sentinel.
struct ScaledComplex {
    double logmag = -std::numeric_limits<double>::infinity();
    double phase = 0.0;

    ScaledComplex() = default;
    ScaledComplex(double lm, double ph) : logmag(lm), phase(wrap_phase(ph)) {}

    static ScaledComplex zero() { return ScaledComplex(); }

    static ScaledComplex one() { return ScaledComplex(0.0, 0.0); }

    static ScaledComplex from(cplx z) {
        if (z == cplx(0.0, 0.0)) return zero();
        return ScaledComplex(std::log(std::abs(z)), std::arg(z));
    }

    /// z * e^{log_offset} without forming the product in doubles.
    static ScaledComplex from(cplx z, double log_offset) {
        if (z == cplx(0.0, 0.0)) return zero();
        return ScaledComplex(std::log(std::abs(z)) + log_offset, std::arg(z));
    }

    bool is_zero() const { return std::isinf(logmag) && logmag < 0.0; }

    /// May overflow to inf / underflow to 0 when logmag is out of double range.
    cplx to_complex() const {
        if (is_zero()) return {0.0, 0.0};
        return std::polar(std::exp(logmag), phase);
    }

    double abs() const { return is_zero() ? 0.0 : std::exp(logmag); }

    ScaledComplex times_exp(double log_offset) const {
        if (is_zero()) return *this;
        return ScaledComplex(logmag + log_offset, phase);
    }

    friend ScaledComplex operator*(const ScaledComplex& a, const ScaledComplex& b) {
        if (a.is_zero() || b.is_zero()) return zero();
        return ScaledComplex(a.logmag + b.logmag, a.phase + b.phase);
    }

    friend ScaledComplex operator*(const ScaledComplex& a, cplx c) { return a * from(c); }

    friend ScaledComplex operator*(cplx c, const ScaledComplex& a) { return a * from(c); }

    friend ScaledComplex operator/(const ScaledComplex& a, const ScaledComplex& b) {
        if (a.is_zero()) return zero();
        return ScaledComplex(a.logmag - b.logmag, a.phase - b.phase);
    }

    friend ScaledComplex operator-(const ScaledComplex& a) {
        if (a.is_zero()) return a;
        return ScaledComplex(a.logmag, a.phase + kPi);
    }

    friend ScaledComplex operator+(const ScaledComplex& a, const ScaledComplex& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        const double base = std::max(a.logmag, b.logmag);
        // The smaller term is invisible below ~36 decades; skip the exp.
        if (a.logmag - base < -90.0) return b;
        if (b.logmag - base < -90.0) return a;
        cplx w = std::polar(std::exp(a.logmag - base), a.phase) +
                 std::polar(std::exp(b.logmag - base), b.phase);
        if (w == cplx(0.0, 0.0)) return zero();
        return ScaledComplex(std::log(std::abs(w)) + base, std::arg(w));
    }

    friend ScaledComplex operator-(const ScaledComplex& a, const ScaledComplex& b) { return a + (-b); }
};

/// |a - b| evaluated after removing a common factor e^{log_scale}.
inline double scaled_distance(const ScaledComplex& a, const ScaledComplex& b, double log_scale = 0.0) {
    ScaledComplex d = a - b;
    if (d.is_zero()) return 0.0;
    return std::exp(d.logmag - log_scale);
}

}  // namespace diraclab
