#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "diraclab/errors.hpp"
#include "diraclab/scaled_complex.hpp"

namespace diraclab {

/// Coefficients of the two-point boundary forms
/// U_i(y) = a_i1 y1(0) + a_i2 y2(0) + a_i3 y1(pi) + a_i4 y2(pi).
struct BoundaryMatrix {
    std::array<std::array<cplx, 4>, 2> a{};

    static BoundaryMatrix from_rows(std::array<cplx, 4> r1, std::array<cplx, 4> r2) {
        return BoundaryMatrix{{r1, r2}};
    }

    /// y1 and y2 both periodic.
    static BoundaryMatrix periodic() {
        return from_rows({1.0, 0.0, -1.0, 0.0}, {0.0, 1.0, 0.0, -1.0});
    }

    /// y1(0) = y2(pi) = 0, the separated degenerate pair.
    static BoundaryMatrix separated_degenerate() {
        return from_rows({1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 1.0});
    }
};

/// Column minors A_jk of the 2x4 boundary matrix, with the antisymmetric
/// accessor A_kj = -A_jk.
struct Minors {
    cplx a12, a13, a14, a23, a24, a34;

    cplx a32() const { return -a23; }
    cplx a42() const { return -a24; }

    /// 1-based, any order of (j, k).
    cplx at(int j, int k) const {
        if (j == k) return {0.0, 0.0};
        if (j > k) return -at(k, j);
        switch (j * 10 + k) {
            case 12: return a12;
            case 13: return a13;
            case 14: return a14;
            case 23: return a23;
            case 24: return a24;
            case 34: return a34;
        }
        throw DomainError("minor index out of range");
    }

    double max_abs() const {
        double m = 0.0;
        for (cplx v : {a12, a13, a14, a23, a24, a34}) m = std::max(m, std::abs(v));
        return m;
    }

    /// A12 A34 - A13 A24 + A14 A23; identically zero for minors of a 2x4 matrix.
    cplx plucker() const { return a12 * a34 - a13 * a24 + a14 * a23; }
};

inline Minors compute_minors(const BoundaryMatrix& bc) {
    auto det = [&bc](int j, int k) {
        return bc.a[0][j] * bc.a[1][k] - bc.a[0][k] * bc.a[1][j];
    };
    Minors m{det(0, 1), det(0, 2), det(0, 3), det(1, 2), det(1, 3), det(2, 3)};
    if (m.max_abs() == 0.0) throw AllMinorsZero();
    return m;
}

enum class BcClass {
    regular,            // A14 A23 != 0
    degenerate_a14,     // A14 A32 = A13 = A24 = 0 with A14 != 0
    degenerate_a32,     // A14 A32 = A13 = A24 = 0 with A32 != 0
    degenerate_both,    // pattern holds with both anchors above the zero threshold
    other_nonregular,
};

inline const char* to_string(BcClass c) {
    switch (c) {
        case BcClass::regular: return "regular";
        case BcClass::degenerate_a14: return "degenerate_a14";
        case BcClass::degenerate_a32: return "degenerate_a32";
        case BcClass::degenerate_both: return "degenerate_both";
        case BcClass::other_nonregular: return "other_nonregular";
    }
    return "?";
}

struct BcClassification {
    BcClass tag;
    std::string notes;
};

/// Zero tests are absolute, at tol relative to max |A_jk| (squared scale for
/// products). Total on any minors produced by compute_minors.
inline BcClassification classify_bc(const Minors& m, double tol = 1e-12) {
    const double scale = m.max_abs();
    auto zero1 = [&](cplx z) { return std::abs(z) <= tol * scale; };
    auto zero2 = [&](cplx z) { return std::abs(z) <= tol * scale * scale; };

    if (!zero2(m.a14 * m.a23)) return {BcClass::regular, ""};

    const bool pattern = zero2(m.a14 * m.a32()) && zero1(m.a13) && zero1(m.a24);
    if (!pattern) return {BcClass::other_nonregular, ""};

    const bool has14 = !zero1(m.a14);
    const bool has32 = !zero1(m.a32());
    const std::string note =
        "degenerate pattern checked as A14*A32 = A13 = A24 = 0; the weaker "
        "A13 = A24 = 0 form omits the product condition";
    if (has14 && has32) return {BcClass::degenerate_both, note};
    if (has14) return {BcClass::degenerate_a14, note};
    if (has32) return {BcClass::degenerate_a32, note};
    return {BcClass::other_nonregular, ""};
}

}  // namespace diraclab
