#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "diraclab/errors.hpp"
#include "diraclab/scaled_complex.hpp"

namespace diraclab {

namespace detail {

template <class F>
cplx simpson_rec(F& f, double a, double b, cplx fa, cplx fm, cplx fb, cplx whole,
                 double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const cplx flm = f(lm);
    const cplx frm = f(rm);
    const cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const cplx delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || b - a < 1e-15 * (std::abs(a) + std::abs(b) + 1.0))
        return left + right + delta / 15.0;
    if (depth <= 0)
        throw QuadratureFailure("adaptive Simpson failed to converge");
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson on [a, b]; f must be smooth on the closed interval.
template <class F>
cplx integrate_adaptive(F&& f, double a, double b, double abs_tol = 1e-12, int max_depth = 48) {
    if (a == b) return {0.0, 0.0};
    const double m = 0.5 * (a + b);
    const cplx fa = f(a), fm = f(m), fb = f(b);
    const cplx whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

/// Integral over (a, b] when f may carry an integrable singularity at a.
/// Dyadic cells graded toward a, each resolved adaptively, plus a geometric
/// tail extrapolation from the innermost cells. Never evaluates f at a.
template <class F>
cplx integrate_graded_left(F&& f, double a, double b, double abs_tol = 1e-12) {
    if (a == b) return {0.0, 0.0};
    const double w = b - a;
    const int max_cells = 110;
    cplx total{0.0, 0.0};
    cplx prev{0.0, 0.0};
    cplx ratio_acc{0.0, 0.0};
    int ratio_n = 0;
    cplx last{0.0, 0.0};
    double running = 0.0;
    for (int k = 0; k < max_cells; ++k) {
        const double hi = a + w * std::ldexp(1.0, -k);
        const double lo = a + w * std::ldexp(1.0, -k - 1);
        if (hi - lo < 1e-16 * (std::abs(b) + 1.0)) break;
        const double cell_tol = abs_tol / ((k + 2.0) * (k + 2.0)) * 0.6;
        const cplx cell = integrate_adaptive(f, lo, hi, cell_tol);
        total += cell;
        running = std::max(running, std::abs(total));
        if (k > 0 && std::abs(prev) > 0.0) {
            cplx r = cell / prev;
            if (std::abs(r) < 0.95) {
                ratio_acc += r;
                ++ratio_n;
            } else {
                ratio_acc = {0.0, 0.0};
                ratio_n = 0;
            }
        }
        prev = cell;
        last = cell;
        // Once cells stop mattering the geometric tail is already resolved.
        if (k > 6 && std::abs(cell) < 0.02 * abs_tol) break;
    }
    if (ratio_n >= 3) {
        const cplx r = ratio_acc / static_cast<double>(ratio_n);
        if (std::abs(r) < 0.97) total += last * r / (1.0 - r);
    } else if (std::abs(last) > 10.0 * abs_tol && std::abs(last) > 1e-12 * running) {
        throw QuadratureFailure("graded quadrature: singular cells do not decay");
    }
    return total;
}

/// Same idea with the singularity allowed at b.
template <class F>
cplx integrate_graded_right(F&& f, double a, double b, double abs_tol = 1e-12) {
    auto g = [&f, a, b](double s) { return f(a + b - s); };
    return integrate_graded_left(g, a, b, abs_tol);
}

/// Full-interval integral tolerant of integrable singularities at either end.
template <class F>
cplx integrate_endpoint_tolerant(F&& f, double a, double b, double abs_tol = 1e-12) {
    const double m = 0.5 * (a + b);
    return integrate_graded_left(f, a, m, 0.5 * abs_tol) +
           integrate_graded_right(f, m, b, 0.5 * abs_tol);
}

}  // namespace diraclab
