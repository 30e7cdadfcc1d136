#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diraclab/errors.hpp"
#include "diraclab/potential.hpp"
#include "diraclab/problem.hpp"
#include "diraclab/quadrature.hpp"

namespace diraclab {

/// Fitted power law of a window integral at one endpoint.
struct EndpointFit {
    Side side;
    double rho = 0.0;
    cplx nu{0.0, 0.0};
    double residual = 0.0;  // max relative deviation of nu*h^rho over the ladder
};

/// Integral of f over the window of width h anchored at the given endpoint:
/// [0, h] on the left, [pi - h, pi] on the right.
inline cplx window_integral(const Potential& f, Side side, double h, double tol = 1e-12) {
    if (!(h > 0.0) || h > kPi) throw DomainError("window width must lie in (0, pi]");
    if (side == Side::left) {
        auto g = [&f](double x) { return f(x); };
        return integrate_graded_left(g, 0.0, h, tol);
    }
    auto g = [&f](double x) { return f(x); };
    return integrate_graded_right(g, kPi - h, kPi, tol);
}

/// Window ladder h_k = pi * 2^-k, k = 3..14.
inline std::vector<double> default_ladder() {
    std::vector<double> hs;
    for (int k = 3; k <= 14; ++k) hs.push_back(kPi * std::ldexp(1.0, -k));
    return hs;
}

/// Least-squares fit of log|H(h)| against log h over the ladder; the complex
/// coefficient is recovered from the three finest windows, where the finite-h
/// phase contamination is smallest.
inline EndpointFit estimate_endpoint(const Potential& f, Side side,
                                     std::span<const double> ladder,
                                     double quad_tol = 1e-12) {
    if (ladder.size() < 4) throw DomainError("ladder needs at least 4 windows");
    for (std::size_t i = 0; i + 1 < ladder.size(); ++i)
        if (!(ladder[i] > ladder[i + 1])) throw DomainError("ladder must be strictly decreasing");
    if (!(ladder.front() <= kPi) || !(ladder.back() > 0.0))
        throw DomainError("ladder must lie in (0, pi]");

    std::vector<cplx> H(ladder.size());
    double hmax_abs = 0.0;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        H[i] = window_integral(f, side, ladder[i], quad_tol);
        hmax_abs = std::max(hmax_abs, std::abs(H[i]));
    }
    std::size_t zeros = 0;
    const double floor = std::max(1e-280, 1e-14 * hmax_abs);
    for (const cplx& v : H)
        if (std::abs(v) < floor) ++zeros;
    if (2 * zeros >= ladder.size())
        throw DegenerateFit("window integrals vanish on half the ladder");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    double n = 0.0;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (std::abs(H[i]) < floor) continue;
        const double x = std::log(ladder[i]);
        const double y = std::log(std::abs(H[i]));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        n += 1.0;
    }
    const double rho = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    cplx nu{0.0, 0.0};
    int used = 0;
    for (std::size_t i = ladder.size(); i-- > 0 && used < 3;) {
        if (std::abs(H[i]) < floor) continue;
        nu += H[i] / std::pow(ladder[i], rho);
        ++used;
    }
    nu /= static_cast<double>(used);

    double residual = 0.0;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        const cplx model = nu * std::pow(ladder[i], rho);
        if (std::abs(model) > 0.0)
            residual = std::max(residual, std::abs(H[i] - model) / std::abs(model));
    }
    if (!(rho > 0.0)) throw DegenerateFit("fitted exponent is not positive");
    return {side, rho, nu, residual};
}

inline EndpointFit estimate_endpoint(const Potential& f, Side side, double quad_tol = 1e-12) {
    const auto ladder = default_ladder();
    return estimate_endpoint(f, side, ladder, quad_tol);
}

/// max over [0, pi] of x^rho e^{-lambda x} = (rho/lambda)^rho e^{-rho},
/// valid while the interior maximizer x = rho/lambda stays inside [0, pi].
inline double peak_value(double rho, double lambda) {
    if (!(rho > 0.0) || !(lambda > 0.0)) throw DomainError("peak_value needs rho, lambda > 0");
    if (rho > kPi * lambda) throw DomainError("maximum sits at x = pi when rho > pi*lambda");
    return std::pow(rho / lambda, rho) * std::exp(-rho);
}

/// Report of the sufficient completeness test for the degenerate classes:
/// minor pattern plus matching endpoint power laws.
struct CriterionReport {
    bool applicable = false;
    BcClass branch = BcClass::other_nonregular;
    std::vector<std::string> missing;
};

namespace detail {

inline std::optional<PowerBehavior> endpoint_behavior(const PotentialSpec& pot, Component c,
                                                      Side s) {
    if (auto d = pot.declared_endpoint(c, s)) return d;
    try {
        EndpointFit fit = estimate_endpoint(pot.component(c), s);
        return PowerBehavior{fit.rho, fit.nu};
    } catch (const DegenerateFit&) {
        return std::nullopt;  // the nu != 0 clause fails
    } catch (const NumericError& e) {
        throw EndpointDataUnavailable(std::string("endpoint estimation failed: ") + e.what());
    }
}

inline void require_behavior(const PotentialSpec& pot, Component c, Side s,
                             const char* clause, std::vector<std::string>& missing) {
    auto b = endpoint_behavior(pot, c, s);
    if (!b) {
        missing.push_back(std::string(clause) + ": nu != 0");
        return;
    }
    if (!(b->rho > 0.0)) missing.push_back(std::string(clause) + ": rho > 0");
    if (b->nu == cplx{0.0, 0.0}) missing.push_back(std::string(clause) + ": nu != 0");
}

}  // namespace detail

/// Checks the degenerate-class sufficient condition for completeness of the
/// root function system: the minor pattern A14*A32 = A13 = A24 = 0 together
/// with, depending on the nonzero anchor minor, power-law behavior of P at
/// the matching endpoint and of Q at the opposite one.
inline CriterionReport check_completeness_criterion(const SpectralProblem& problem,
                                                    double tol = 1e-12) {
    CriterionReport report;
    const Minors m = problem.minors();
    const BcClassification cls = classify_bc(m, tol);

    if (cls.tag == BcClass::regular || cls.tag == BcClass::other_nonregular) {
        report.branch = cls.tag;
        report.missing.push_back("minor pattern A14*A32 = A13 = A24 = 0");
        return report;
    }

    const bool try_a14 = cls.tag == BcClass::degenerate_a14 || cls.tag == BcClass::degenerate_both;
    const bool try_a32 = cls.tag == BcClass::degenerate_a32 || cls.tag == BcClass::degenerate_both;

    if (try_a14) {
        std::vector<std::string> missing;
        detail::require_behavior(problem.potential, Component::P, Side::left, "P left window", missing);
        detail::require_behavior(problem.potential, Component::Q, Side::right, "Q right window", missing);
        if (missing.empty()) {
            report.applicable = true;
            report.branch = BcClass::degenerate_a14;
            return report;
        }
        report.branch = BcClass::degenerate_a14;
        report.missing = std::move(missing);
    }
    if (try_a32) {
        std::vector<std::string> missing;
        detail::require_behavior(problem.potential, Component::P, Side::right, "P right window", missing);
        detail::require_behavior(problem.potential, Component::Q, Side::left, "Q left window", missing);
        if (missing.empty()) {
            report.applicable = true;
            report.branch = BcClass::degenerate_a32;
            report.missing.clear();
            return report;
        }
        if (!try_a14) {
            report.branch = BcClass::degenerate_a32;
            report.missing = std::move(missing);
        } else {
            for (auto& s : missing) report.missing.push_back(std::move(s));
        }
    }
    return report;
}

}  // namespace diraclab
