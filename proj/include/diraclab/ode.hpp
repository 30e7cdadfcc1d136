#pragma once

#include <algorithm>
#include <cmath>

#include "diraclab/errors.hpp"

namespace diraclab {

struct OdeTolerances {
    double rel = 1e-10;
    double abs = 1e-12;
};

/// Dormand-Prince 5(4) embedded pair, adaptive step, integrating
/// y' = f(x, y) across [x0, x1]. State must support the usual vector-space
/// arithmetic plus cwiseAbs().maxCoeff() (Eigen fixed-size types do).
template <class State, class Rhs>
void dopri5_integrate(State& y, double x0, double x1, Rhs&& f, const OdeTolerances& tol,
                      double initial_step = 0.0) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double span = x1 - x0;
    if (span <= 0.0) return;
    double x = x0;
    double h = initial_step > 0.0 ? std::min(initial_step, span) : span / 16.0;
    const double h_min = std::max(span * 1e-14, 1e-15);

    State k1 = f(x, y);
    bool k1_fresh = true;
    int rejected_in_row = 0;

    while (x < x1) {
        h = std::min(h, x1 - x);
        if (h < h_min) throw StepSizeUnderflow("dopri5: step size underflow");
        if (!k1_fresh) k1 = f(x, y);

        State k2 = f(x + h * a21, State(y + h * a21 * k1));
        State k3 = f(x + h * (a31 + a32), State(y + h * (a31 * k1 + a32 * k2)));
        State k4 = f(x + h * 0.8, State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
        State k5 = f(x + h * (8.0 / 9.0), State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        State k6 = f(x + h, State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        State ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        State k7 = f(x + h, ynew);
        State err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double ymag = std::max(y.cwiseAbs().maxCoeff(), ynew.cwiseAbs().maxCoeff());
        const double scale = tol.abs + tol.rel * ymag;
        const double err = err_vec.cwiseAbs().maxCoeff() / scale;

        if (err <= 1.0) {
            x += h;
            y = ynew;
            k1 = k7;  // FSAL
            k1_fresh = true;
            rejected_in_row = 0;
            const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            k1_fresh = true;  // k1 still matches (x, y)
            ++rejected_in_row;
            if (rejected_in_row > 60) throw StepSizeUnderflow("dopri5: repeated step rejections");
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5);
        }
    }
}

}  // namespace diraclab
