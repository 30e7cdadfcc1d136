#pragma once

#include "diraclab/boundary.hpp"
#include "diraclab/potential.hpp"

namespace diraclab {

/// A Dirac spectral problem on [0, pi]: first-order 2x2 system
/// B y' + V y = lambda y with B = diag(-i, i), V off-diagonal (P above, Q
/// below), and two-point boundary forms given by the boundary matrix.
struct SpectralProblem {
    PotentialSpec potential;
    BoundaryMatrix bc;

    Minors minors() const { return compute_minors(bc); }
};

}  // namespace diraclab
