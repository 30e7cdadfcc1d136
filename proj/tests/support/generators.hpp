#pragma once

#include <complex>
#include <random>
#include <vector>

#include "diraclab/boundary.hpp"
#include "diraclab/potential.hpp"
#include "diraclab/problem.hpp"

namespace diraclab::test {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

inline cplx random_unit_box(std::mt19937_64& g) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    return {d(g), d(g)};
}

inline BoundaryMatrix random_boundary(std::mt19937_64& g) {
    for (;;) {
        BoundaryMatrix bc;
        for (auto& row : bc.a)
            for (auto& v : row) v = random_unit_box(g);
        try {
            compute_minors(bc);
            return bc;
        } catch (const AllMinorsZero&) {
        }
    }
}

/// Random smooth potential pair: complex polynomials of degree <= 3.
inline PotentialSpec random_smooth_potential(std::mt19937_64& g) {
    auto poly = [&g]() {
        std::uniform_int_distribution<int> deg(0, 3);
        std::vector<cplx> coeffs(deg(g) + 1);
        for (auto& c : coeffs) c = 0.5 * random_unit_box(g);
        return potentials::polynomial(std::move(coeffs));
    };
    return PotentialSpec(poly(), poly());
}

/// lambda uniform over the box |Re| <= re_max, |Im| <= im_max intersected
/// with |lambda| <= abs_max.
inline cplx random_lambda(std::mt19937_64& g, double re_max, double im_max, double abs_max) {
    std::uniform_real_distribution<double> dre(-re_max, re_max), dim(-im_max, im_max);
    for (;;) {
        const cplx z{dre(g), dim(g)};
        if (std::abs(z) <= abs_max) return z;
    }
}

}  // namespace diraclab::test
