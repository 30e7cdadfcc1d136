#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diraclab/errors.hpp"
#include "diraclab/quadrature.hpp"
#include "diraclab/scaled_complex.hpp"

namespace diraclab {

enum class Side { left, right };

enum class Component { P, Q };

/// Leading power-law behavior of an endpoint window integral:
/// integral over the window of width h ~ nu * h^rho as h -> 0.
struct PowerBehavior {
    double rho;
    cplx nu;
};

/// One complex-valued summable function on [0, pi].
struct Potential {
    std::function<cplx(double)> f;
    bool singular_left = false;
    bool singular_right = false;

    cplx operator()(double x) const { return f(x); }
};

/// One potential component together with its declared endpoint behavior,
/// when known in closed form.
struct ComponentSpec {
    Potential fn;
    std::optional<PowerBehavior> left;
    std::optional<PowerBehavior> right;
};

namespace potentials {

inline ComponentSpec zero() {
    return {Potential{[](double) { return cplx{0.0, 0.0}; }}, std::nullopt, std::nullopt};
}

inline ComponentSpec constant(cplx c) {
    ComponentSpec s{Potential{[c](double) { return c; }}, std::nullopt, std::nullopt};
    if (c != cplx{0.0, 0.0}) {
        s.left = PowerBehavior{1.0, c};
        s.right = PowerBehavior{1.0, c};
    }
    return s;
}

/// c * x^alpha, alpha > -1 so the function stays summable.
inline ComponentSpec power(cplx c, double alpha) {
    if (alpha <= -1.0) throw DomainError("power potential needs alpha > -1");
    ComponentSpec s;
    s.fn = Potential{[c, alpha](double x) { return c * std::pow(x, alpha); },
                     alpha < 0.0, false};
    if (c != cplx{0.0, 0.0}) {
        s.left = PowerBehavior{alpha + 1.0, c / (alpha + 1.0)};
        s.right = PowerBehavior{1.0, c * std::pow(kPi, alpha)};
    }
    return s;
}

/// c * (pi - x)^alpha.
inline ComponentSpec power_right(cplx c, double alpha) {
    if (alpha <= -1.0) throw DomainError("power potential needs alpha > -1");
    ComponentSpec s;
    s.fn = Potential{[c, alpha](double x) { return c * std::pow(kPi - x, alpha); },
                     false, alpha < 0.0};
    if (c != cplx{0.0, 0.0}) {
        s.left = PowerBehavior{1.0, c * std::pow(kPi, alpha)};
        s.right = PowerBehavior{alpha + 1.0, c / (alpha + 1.0)};
    }
    return s;
}

/// coeffs[k] * x^k, low order.
inline ComponentSpec polynomial(std::vector<cplx> coeffs) {
    ComponentSpec s;
    s.fn = Potential{[coeffs](double x) {
        cplx v{0.0, 0.0};
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
        return v;
    }};
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] != cplx{0.0, 0.0}) {
            s.left = PowerBehavior{static_cast<double>(k) + 1.0,
                                   coeffs[k] / (static_cast<double>(k) + 1.0)};
            break;
        }
    }
    // Expansion around pi: q_m = (-1)^m p^(m)(pi) / m!.
    std::vector<cplx> around_right(coeffs.size(), cplx{0.0, 0.0});
    double scale = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        double binom = 1.0;
        double pi_pow = std::pow(kPi, static_cast<double>(k));
        scale = std::max(scale, std::abs(coeffs[k]) * pi_pow);
        for (std::size_t m = 0; m <= k; ++m) {
            around_right[m] += coeffs[k] * binom * pi_pow * (m % 2 ? -1.0 : 1.0);
            binom *= static_cast<double>(k - m) / static_cast<double>(m + 1);
            pi_pow /= kPi;
        }
    }
    for (std::size_t m = 0; m < around_right.size(); ++m) {
        if (std::abs(around_right[m]) > 1e-12 * scale) {
            s.right = PowerBehavior{static_cast<double>(m) + 1.0,
                                    around_right[m] / (static_cast<double>(m) + 1.0)};
            break;
        }
    }
    return s;
}

}  // namespace potentials

/// The pair (P, Q) on [0, pi] plus optional endpoint power-law data.
class PotentialSpec {
public:
    PotentialSpec(ComponentSpec p, ComponentSpec q)
        : p_(std::move(p.fn)), q_(std::move(q.fn)),
          p_left_(p.left), p_right_(p.right), q_left_(q.left), q_right_(q.right) {
        validate(p_left_);
        validate(p_right_);
        validate(q_left_);
        validate(q_right_);
    }

    const Potential& P() const { return p_; }
    const Potential& Q() const { return q_; }

    const Potential& component(Component c) const { return c == Component::P ? p_ : q_; }

    std::optional<PowerBehavior> declared_endpoint(Component c, Side s) const {
        if (c == Component::P) return s == Side::left ? p_left_ : p_right_;
        return s == Side::left ? q_left_ : q_right_;
    }

    /// L1 norm of a component estimated by endpoint-tolerant quadrature.
    double norm_l1(Component c, double tol = 1e-10) const {
        const Potential& f = component(c);
        auto g = [&f](double x) { return cplx{std::abs(f(x)), 0.0}; };
        return integrate_endpoint_tolerant(g, 0.0, kPi, tol).real();
    }

    bool any_singular_left() const { return p_.singular_left || q_.singular_left; }
    bool any_singular_right() const { return p_.singular_right || q_.singular_right; }

private:
    static void validate(const std::optional<PowerBehavior>& b) {
        if (!b) return;
        if (!(b->rho > 0.0)) throw DomainError("endpoint exponent must be positive");
        if (b->nu == cplx{0.0, 0.0}) throw DomainError("endpoint coefficient must be nonzero");
    }

    Potential p_, q_;
    std::optional<PowerBehavior> p_left_, p_right_, q_left_, q_right_;
};

}  // namespace diraclab
