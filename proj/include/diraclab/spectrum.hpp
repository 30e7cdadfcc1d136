#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "diraclab/determinant.hpp"
#include "diraclab/errors.hpp"
#include "diraclab/fundamental.hpp"
#include "diraclab/problem.hpp"
#include "diraclab/scaled_complex.hpp"

namespace diraclab {

struct Box {
    double re_lo, re_hi, im_lo, im_hi;

    cplx center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
    double width() const { return std::max(re_hi - re_lo, im_hi - im_lo); }
    bool contains(cplx z, double slack = 0.0) const {
        return z.real() >= re_lo - slack && z.real() <= re_hi + slack &&
               z.imag() >= im_lo - slack && z.imag() <= im_hi + slack;
    }
    Box expanded(double factor) const {
        const cplx c = center();
        const double hw = 0.5 * (re_hi - re_lo) * factor;
        const double hh = 0.5 * (im_hi - im_lo) * factor;
        return {c.real() - hw, c.real() + hw, c.imag() - hh, c.imag() + hh};
    }
    static Box around(cplx c, double side) {
        return {c.real() - 0.5 * side, c.real() + 0.5 * side, c.imag() - 0.5 * side,
                c.imag() + 0.5 * side};
    }
};

struct WindingOptions {
    int samples_per_edge = 8;
    int max_depth = 30;
    double boundary_rel_floor = 1e-11;
    int nudge_attempts = 3;
    double integer_tol = 1e-6;
};

struct EigenvalueRecord {
    cplx lambda;
    int multiplicity = 1;
    double residual = 0.0;  // |Delta| * e^{-pi |Im lambda|}
    Box box{};
    bool refined = false;
};

struct LocateOptions {
    DeltaOptions delta{};
    WindingOptions winding{};
    double cluster_side = 0.02;
    double min_side = 1e-9;
    double refine_tol = 1e-11;
    int max_newton_iter = 60;
    std::size_t eval_budget = 4'000'000;
};

struct LocateResult {
    std::vector<EigenvalueRecord> eigenvalues;
    bool budget_exceeded = false;
    std::vector<Box> unresolved;
};

namespace detail {

struct CplxKey {
    std::uint64_t re, im;
    bool operator==(const CplxKey&) const = default;
};

struct CplxKeyHash {
    std::size_t operator()(const CplxKey& k) const {
        std::uint64_t h = k.re * 0x9e3779b97f4a7c15ull;
        h ^= k.im + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

inline CplxKey make_key(cplx z) {
    return {std::bit_cast<std::uint64_t>(z.real()), std::bit_cast<std::uint64_t>(z.imag())};
}

class DeltaCache {
public:
    DeltaCache(const SpectralProblem& problem, DeltaOptions opts)
        : problem_(&problem), opts_(std::move(opts)) {}

    const ScaledComplex& value(cplx lambda) {
        auto [it, fresh] = values_.try_emplace(make_key(lambda));
        if (fresh) {
            it->second = delta_scaled(*problem_, lambda, opts_);
            ++evals_;
        }
        return it->second;
    }

    const DeltaDerivative& with_derivative(cplx lambda) {
        auto [it, fresh] = pairs_.try_emplace(make_key(lambda));
        if (fresh) {
            it->second = delta_with_derivative(*problem_, lambda, opts_);
            evals_ += 2;
        }
        return it->second;
    }

    std::size_t evals() const { return evals_; }

private:
    const SpectralProblem* problem_;
    DeltaOptions opts_;
    std::unordered_map<CplxKey, ScaledComplex, CplxKeyHash> values_;
    std::unordered_map<CplxKey, DeltaDerivative, CplxKeyHash> pairs_;
    std::size_t evals_ = 0;
};

struct WalkResult {
    int winding = 0;
    double max_logmag = -std::numeric_limits<double>::infinity();
    double min_logmag = std::numeric_limits<double>::infinity();
    cplx first_moment{0.0, 0.0};  // (1/2 pi i) oint lambda dlog(Delta), rough
};

// Adaptive phase tracking along the box boundary: segments are bisected until
// consecutive phase increments stay under pi/2, which rules out winding
// aliasing for analytic Delta.
inline WalkResult walk_boundary(DeltaCache& cache, const Box& box, const WindingOptions& w) {
    std::vector<cplx> pts;
    const std::array<cplx, 4> corners = {cplx{box.re_lo, box.im_lo}, cplx{box.re_hi, box.im_lo},
                                         cplx{box.re_hi, box.im_hi}, cplx{box.re_lo, box.im_hi}};
    const int k = std::max(2, w.samples_per_edge);
    for (int e = 0; e < 4; ++e) {
        const cplx a = corners[e], b = corners[(e + 1) % 4];
        for (int i = 0; i < k; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / k));
    }
    pts.push_back(pts.front());

    WalkResult res;
    double total = 0.0;
    cplx moment{0.0, 0.0};
    bool too_small = false;

    auto note = [&](const ScaledComplex& v) {
        res.max_logmag = std::max(res.max_logmag, v.logmag);
        res.min_logmag = std::min(res.min_logmag, v.logmag);
    };

    // Processes the segment [za, zb]; returns the phase increment.
    std::function<double(cplx, cplx, const ScaledComplex&, const ScaledComplex&, int)> segment =
        [&](cplx za, cplx zb, const ScaledComplex& va, const ScaledComplex& vb,
            int depth) -> double {
        const double dphi = wrap_phase(vb.phase - va.phase);
        if (std::abs(dphi) < kPi / 2.0) {
            const cplx dlog = cplx(vb.logmag - va.logmag, dphi);
            moment += 0.5 * (za + zb) * dlog;
            return dphi;
        }
        if (depth >= w.max_depth) {
            too_small = true;
            return dphi;
        }
        const cplx zm = 0.5 * (za + zb);
        const ScaledComplex& vm = cache.value(zm);
        note(vm);
        return segment(za, zm, va, vm, depth + 1) + segment(zm, zb, vm, vb, depth + 1);
    };

    // Copy sample values out: cache rehashing invalidates references.
    ScaledComplex prev = cache.value(pts[0]);
    note(prev);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const ScaledComplex cur = cache.value(pts[i]);
        note(cur);
        total += segment(pts[i - 1], pts[i], prev, cur, 0);
        prev = cur;
    }

    if (res.min_logmag < res.max_logmag + std::log(w.boundary_rel_floor))
        throw BoundaryZero("determinant vanishes on the contour");
    if (too_small)
        throw PhaseTrackingFailure("phase refinement exhausted its depth budget");

    const double raw = total / (2.0 * kPi);
    const double rounded = std::round(raw);
    if (std::abs(raw - rounded) > w.integer_tol)
        throw PhaseTrackingFailure("winding did not converge to an integer");
    res.winding = static_cast<int>(rounded);
    res.first_moment = moment / cplx(0.0, 2.0 * kPi);
    return res;
}

inline WalkResult walk_with_nudges(DeltaCache& cache, Box& box, const WindingOptions& w) {
    for (int attempt = 0;; ++attempt) {
        try {
            return walk_boundary(cache, box, w);
        } catch (const BoundaryZero&) {
            if (attempt >= w.nudge_attempts) throw;
            box = box.expanded(1.0 + 0.0317 * (attempt + 1));
        }
    }
}

}  // namespace detail

/// Number of zeros of Delta (with multiplicity) inside the box, by the
/// argument principle. The box is nudged outward a few times if Delta nearly
/// vanishes on the boundary.
inline int count_zeros(const SpectralProblem& problem, const Box& box,
                       const WindingOptions& opts = {}, const DeltaOptions& delta_opts = {}) {
    detail::DeltaCache cache(problem, delta_opts);
    Box b = box;
    return detail::walk_with_nudges(cache, b, opts).winding;
}

namespace detail {

struct Refiner {
    DeltaCache& cache;
    const LocateOptions& opts;

    double scaled_logmag(const ScaledComplex& v, cplx lambda) const {
        return v.logmag - kPi * std::abs(lambda.imag());
    }

    // Damped Newton on Delta for a simple zero seeded inside the box.
    std::optional<cplx> newton(cplx seed, const Box& box) const {
        cplx z = seed;
        double cur = scaled_logmag(cache.with_derivative(z).value, z);
        for (int it = 0; it < opts.max_newton_iter; ++it) {
            const DeltaDerivative& dd = cache.with_derivative(z);
            if (dd.value.is_zero()) return z;
            const ScaledComplex ratio = dd.value / dd.derivative;
            if (ratio.is_zero()) return z;
            cplx step = -ratio.to_complex();
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return std::nullopt;
            const double cap = 1.5 * box.width();
            if (std::abs(step) > cap) step *= cap / std::abs(step);
            for (int half = 0;; ++half) {
                const cplx znew = z + step;
                const double nxt = scaled_logmag(cache.with_derivative(znew).value, znew);
                if (nxt <= cur + 0.05 || std::abs(step) < 1e-15 * (1.0 + std::abs(z))) {
                    z = znew;
                    cur = nxt;
                    break;
                }
                if (half >= 8) return std::nullopt;
                step *= 0.5;
            }
            if (!box.contains(z, 1.0 * box.width())) return std::nullopt;
            if (std::abs(step) <= opts.refine_tol * (1.0 + std::abs(z))) return z;
        }
        return std::nullopt;
    }

    // Secant iteration on Delta' for a double zero.
    std::optional<cplx> secant_on_derivative(cplx seed, const Box& box) const {
        cplx z0 = seed;
        cplx z1 = seed + cplx(0.6, 0.8) * 1e-4 * (1.0 + std::abs(seed));
        // Work on the lifted derivative so nothing overflows doubles.
        const double lift = std::max(cache.with_derivative(z0).derivative.logmag, 0.0);
        cplx f0 = cache.with_derivative(z0).derivative.times_exp(-lift).to_complex();
        cplx f1 = cache.with_derivative(z1).derivative.times_exp(-lift).to_complex();
        for (int it = 0; it < 50; ++it) {
            const cplx den = f1 - f0;
            if (den == cplx{0.0, 0.0}) break;
            const cplx z2 = z1 - f1 * (z1 - z0) / den;
            if (!std::isfinite(z2.real()) || !std::isfinite(z2.imag())) break;
            if (!box.contains(z2, 2.0 * box.width())) break;
            z0 = z1;
            f0 = f1;
            z1 = z2;
            f1 = cache.with_derivative(z1).derivative.times_exp(-lift).to_complex();
            if (std::abs(z1 - z0) <= opts.refine_tol * (1.0 + std::abs(z1))) return z1;
        }
        return std::nullopt;
    }
};

inline bool split_line_clear(DeltaCache& cache, double fixed, bool vertical, double lo, double hi,
                             double floor_logmag) {
    for (int i = 0; i <= 8; ++i) {
        const double t = lo + (hi - lo) * i / 8.0;
        const cplx z = vertical ? cplx{fixed, t} : cplx{t, fixed};
        if (cache.value(z).logmag < floor_logmag) return false;
    }
    return true;
}

}  // namespace detail

/// Covers the disk |lambda| <= R with unit boxes (offset to dodge the integer
/// lattice), counts zeros by winding, subdivides until clusters are isolated,
/// then refines: Newton on Delta for simple zeros, first-moment seeding plus
/// secant on Delta' for double ones. Partial results are flagged instead of
/// discarded when the evaluation budget runs out.
inline LocateResult locate_eigenvalues(const SpectralProblem& problem, double R,
                                       const LocateOptions& opts = {}) {
    if (!(R > 0.0)) throw DomainError("locate_eigenvalues needs R > 0");
    detail::DeltaCache cache(problem, opts.delta);
    detail::Refiner refiner{cache, opts};
    LocateResult result;

    // An identically vanishing determinant means every lambda is an
    // eigenvalue; zero search is meaningless there.
    bool any_nonzero = false;
    for (cplx probe : {cplx{0.31, 0.17}, cplx{-1.23, 0.77}, cplx{2.71, -0.41}})
        if (!cache.value(probe).is_zero()) any_nonzero = true;
    if (!any_nonzero)
        throw DomainError("characteristic determinant vanishes identically on probe points");

    std::deque<Box> queue;
    const double off = 0.137;
    for (int mi = static_cast<int>(std::floor(-R - 1.0)); mi <= static_cast<int>(std::ceil(R)); ++mi) {
        for (int ni = static_cast<int>(std::floor(-R - 1.0)); ni <= static_cast<int>(std::ceil(R));
             ++ni) {
            Box b{mi + off, mi + 1.0 + off, ni + off, ni + 1.0 + off};
            const double dre = std::max({b.re_lo, 0.0, -b.re_hi});
            const double dim = std::max({b.im_lo, 0.0, -b.im_hi});
            if (dre * dre + dim * dim <= R * R) queue.push_back(b);
        }
    }

    struct Candidate {
        cplx lambda;
        int multiplicity;
        bool refined;
        Box box;
    };
    std::vector<Candidate> found;

    auto out_of_budget = [&]() { return cache.evals() > opts.eval_budget; };

    while (!queue.empty()) {
        Box box = queue.front();
        queue.pop_front();
        if (out_of_budget()) {
            result.budget_exceeded = true;
            result.unresolved.push_back(box);
            continue;
        }
        detail::WalkResult walk = detail::walk_with_nudges(cache, box, opts.winding);
        if (walk.winding == 0) continue;

        if (walk.winding == 1) {
            cplx seed = walk.first_moment;
            if (!box.contains(seed, 0.0)) seed = box.center();
            auto z = refiner.newton(seed, box);
            if (!z) z = refiner.newton(box.center(), box);
            if (z) {
                found.push_back({*z, 1, true, box});
                continue;
            }
        } else if (walk.winding == 2 && box.width() <= opts.cluster_side) {
            const cplx seed = walk.first_moment / 2.0;
            auto z = refiner.secant_on_derivative(box.contains(seed) ? seed : box.center(), box);
            if (z) {
                const double res_log = cache.value(*z).logmag;
                if (res_log < walk.max_logmag + std::log(opts.winding.boundary_rel_floor) + 5.0 ||
                    res_log < -25.0) {
                    found.push_back({*z, 2, true, box});
                    continue;
                }
            }
        }

        if (box.width() <= opts.min_side ||
            (walk.winding >= 2 && box.width() <= 1e-6)) {
            // Unseparable cluster at resolution limit: report the center.
            found.push_back({box.center(), walk.winding, false, box});
            continue;
        }

        // Split in four, shifting the cut lines off any near-zero of Delta.
        const double floor_log =
            walk.max_logmag + std::log(opts.winding.boundary_rel_floor) + 2.0;
        double xm = 0.5 * (box.re_lo + box.re_hi);
        double ym = 0.5 * (box.im_lo + box.im_hi);
        for (int t = 0; t < 5; ++t) {
            if (detail::split_line_clear(cache, xm, true, box.im_lo, box.im_hi, floor_log)) break;
            xm += 0.017 * (box.re_hi - box.re_lo);
        }
        for (int t = 0; t < 5; ++t) {
            if (detail::split_line_clear(cache, ym, false, box.re_lo, box.re_hi, floor_log)) break;
            ym += 0.017 * (box.im_hi - box.im_lo);
        }
        queue.push_back({box.re_lo, xm, box.im_lo, ym});
        queue.push_back({xm, box.re_hi, box.im_lo, ym});
        queue.push_back({box.re_lo, xm, ym, box.im_hi});
        queue.push_back({xm, box.re_hi, ym, box.im_hi});
    }

    // Merge duplicates (nudged or escaped refinements can land twice).
    std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });
    std::vector<Candidate> merged;
    for (const auto& c : found) {
        bool dup = false;
        for (auto& m : merged) {
            if (std::abs(m.lambda - c.lambda) < 1e-6 * (1.0 + std::abs(c.lambda))) {
                if (c.refined && !m.refined) m = c;
                dup = true;
                break;
            }
        }
        if (!dup) merged.push_back(c);
    }

    for (const auto& c : merged) {
        if (std::abs(c.lambda) > R + 1e-9) continue;
        EigenvalueRecord rec;
        rec.lambda = c.lambda;
        rec.refined = c.refined;
        rec.box = c.box;
        double iso = 1e-4;
        for (const auto& other : merged) {
            if (&other == &c) continue;
            iso = std::min(iso, 0.4 * std::abs(other.lambda - c.lambda));
        }
        iso = std::max(iso, 1e-8);
        try {
            Box tight = Box::around(c.lambda, 2.0 * iso);
            rec.multiplicity = detail::walk_with_nudges(cache, tight, opts.winding).winding;
            if (rec.multiplicity < 1) rec.multiplicity = c.multiplicity;
        } catch (const NumericError&) {
            rec.multiplicity = c.multiplicity;
        }
        const ScaledComplex v = cache.value(c.lambda);
        rec.residual = std::exp(v.logmag - kPi * std::abs(c.lambda.imag()));
        result.eigenvalues.push_back(rec);
    }
    std::sort(result.eigenvalues.begin(), result.eigenvalues.end(),
              [](const EigenvalueRecord& a, const EigenvalueRecord& b) {
                  if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
                  return a.lambda.imag() < b.lambda.imag();
              });
    return result;
}

struct ChainOptions {
    int grid_resolution = 512;  // even, for Simpson weights
    double tol = 1e-6;
    double kernel_rel = 1e-6;
    DeltaOptions delta{};
};

struct RootFunction {
    std::vector<std::array<cplx, 2>> samples;
    double norm = 0.0;          // H = L2 + L2 norm
    double ode_residual = 0.0;  // relative, high-order finite differences
    double bc_residual = 0.0;   // relative boundary-form defect
};

/// Eigenfunction(s) and, for a double eigenvalue with a one-dimensional
/// kernel, the associated function solving (L - lambda) y1 = y0.
struct RootChain {
    EigenvalueRecord eigenvalue;
    std::vector<RootFunction> functions;
    std::vector<double> grid;
    bool has_associated = false;
    std::string diagnostics;
};

namespace detail {

inline std::vector<double> simpson_weights(int n_points) {
    const int n = n_points - 1;
    const double h = kPi / n;
    std::vector<double> w(n_points, 0.0);
    w[0] = w[n] = h / 3.0;
    for (int j = 1; j < n; ++j) w[j] = (j % 2 ? 4.0 : 2.0) * h / 3.0;
    return w;
}

inline cplx h_inner(const std::vector<std::array<cplx, 2>>& u,
                    const std::vector<std::array<cplx, 2>>& v, const std::vector<double>& w) {
    cplx s{0.0, 0.0};
    for (std::size_t j = 0; j < u.size(); ++j)
        s += w[j] * (u[j][0] * std::conj(v[j][0]) + u[j][1] * std::conj(v[j][1]));
    return s;
}

inline double h_norm(const std::vector<std::array<cplx, 2>>& u, const std::vector<double>& w) {
    return std::sqrt(std::abs(h_inner(u, u, w)));
}

inline std::array<cplx, 2> boundary_forms(const BoundaryMatrix& bc,
                                          const std::vector<std::array<cplx, 2>>& y) {
    std::array<cplx, 2> u;
    for (int i = 0; i < 2; ++i)
        u[i] = bc.a[i][0] * y.front()[0] + bc.a[i][1] * y.front()[1] + bc.a[i][2] * y.back()[0] +
               bc.a[i][3] * y.back()[1];
    return u;
}

// || B y' + V y - lambda y - rhs || / (||y|| + ||rhs||) over interior nodes,
// with y' from the 6th-order central stencil.
inline double ode_residual(const SpectralProblem& problem, cplx lambda,
                           const std::vector<std::array<cplx, 2>>& y,
                           const std::vector<std::array<cplx, 2>>* rhs,
                           const std::vector<double>& grid) {
    const int n = static_cast<int>(grid.size()) - 1;
    const double h = grid[1] - grid[0];
    const cplx i1{0.0, 1.0};
    double num = 0.0, den_y = 0.0, den_r = 0.0;
    for (int j = 3; j <= n - 3; ++j) {
        std::array<cplx, 2> dy;
        for (int c = 0; c < 2; ++c) {
            dy[c] = (-y[j - 3][c] + 9.0 * y[j - 2][c] - 45.0 * y[j - 1][c] + 45.0 * y[j + 1][c] -
                     9.0 * y[j + 2][c] + y[j + 3][c]) /
                    (60.0 * h);
        }
        const cplx P = problem.potential.P()(grid[j]);
        const cplx Q = problem.potential.Q()(grid[j]);
        cplx r1 = -i1 * dy[0] + P * y[j][1] - lambda * y[j][0];
        cplx r2 = i1 * dy[1] + Q * y[j][0] - lambda * y[j][1];
        if (rhs) {
            r1 -= (*rhs)[j][0];
            r2 -= (*rhs)[j][1];
        }
        num += std::norm(r1) + std::norm(r2);
        den_y += std::norm(y[j][0]) + std::norm(y[j][1]);
        if (rhs) den_r += std::norm((*rhs)[j][0]) + std::norm((*rhs)[j][1]);
    }
    const double den = std::sqrt(den_y) + std::sqrt(den_r);
    return den > 0.0 ? std::sqrt(num) / den : 0.0;
}

inline std::vector<std::array<cplx, 2>> apply_to_vector(const std::vector<Mat2>& mats,
                                                        const Eigen::Vector2cd& c) {
    std::vector<std::array<cplx, 2>> out(mats.size());
    for (std::size_t j = 0; j < mats.size(); ++j) {
        const Eigen::Vector2cd v = mats[j] * c;
        out[j] = {v(0), v(1)};
    }
    return out;
}

}  // namespace detail

/// Builds the root-function chain at a located eigenvalue: the numerical
/// kernel of the 2x2 boundary matrix W(lambda) gives the eigenfunction(s);
/// when the winding multiplicity is 2 over a one-dimensional kernel, the
/// associated function is assembled from the lambda-derivative of the
/// fundamental matrix with its boundary defect removed in least squares.
inline RootChain root_chain(const SpectralProblem& problem, const EigenvalueRecord& ev,
                            const ChainOptions& opts = {}) {
    if (opts.grid_resolution < 16 || opts.grid_resolution % 2 != 0)
        throw DomainError("chain grid resolution must be even and at least 16");
    const bool want_deriv = ev.multiplicity >= 2;
    const FundamentalMatrix fm =
        propagate(problem, ev.lambda, opts.grid_resolution, want_deriv, opts.delta.prop);
    const int np = static_cast<int>(fm.grid.size());

    std::vector<Mat2> E(np);
    for (int j = 0; j < np; ++j) E[j] = fm.E[j].to_matrix();

    Mat2 W;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            W(i, k) = problem.bc.a[i][k] + problem.bc.a[i][2] * E.back()(0, k) +
                      problem.bc.a[i][3] * E.back()(1, k);

    double a_scale = 0.0;
    for (const auto& row : problem.bc.a)
        for (cplx v : row) a_scale = std::max(a_scale, std::abs(v));
    const double w_scale = a_scale * std::max(1.0, E.back().cwiseAbs().maxCoeff());

    Eigen::JacobiSVD<Mat2> svd(W, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int kernel_dim = 0;
    if (sv(1) <= opts.kernel_rel * w_scale) kernel_dim = sv(0) <= opts.kernel_rel * w_scale ? 2 : 1;
    if (kernel_dim == 0)
        throw ChainConstructionFailure("W(lambda) has no numerical kernel at this tolerance");

    RootChain chain;
    chain.eigenvalue = ev;
    chain.grid = fm.grid;
    const auto weights = detail::simpson_weights(np);

    auto finish = [&](std::vector<std::array<cplx, 2>> samples,
                      const std::vector<std::array<cplx, 2>>* rhs) {
        RootFunction f;
        f.norm = detail::h_norm(samples, weights);
        const auto u = detail::boundary_forms(problem.bc, samples);
        double sup = 0.0;
        for (const auto& s : samples) sup = std::max({sup, std::abs(s[0]), std::abs(s[1])});
        f.bc_residual = (std::abs(u[0]) + std::abs(u[1])) / std::max(1e-300, a_scale * sup);
        f.ode_residual = detail::ode_residual(problem, ev.lambda, samples, rhs, fm.grid);
        f.samples = std::move(samples);
        chain.functions.push_back(std::move(f));
    };

    if (kernel_dim == 2) {
        finish(detail::apply_to_vector(E, Eigen::Vector2cd(1.0, 0.0)), nullptr);
        finish(detail::apply_to_vector(E, Eigen::Vector2cd(0.0, 1.0)), nullptr);
        if (ev.multiplicity != 2)
            chain.diagnostics = "kernel dimension 2 with winding multiplicity " +
                                std::to_string(ev.multiplicity);
        return chain;
    }

    const Eigen::Vector2cd c = svd.matrixV().col(1);
    auto y0 = detail::apply_to_vector(E, c);
    finish(std::move(y0), nullptr);

    if (ev.multiplicity == 2) {
        std::vector<Mat2> dE(np);
        for (int j = 0; j < np; ++j) dE[j] = fm.dE[j].to_matrix();
        auto v = detail::apply_to_vector(dE, c);
        const auto uv = detail::boundary_forms(problem.bc, v);
        // Least-squares c1 with W c1 = -U(v); W is rank one here.
        Eigen::Vector2cd rhs(-uv[0], -uv[1]);
        Eigen::Vector2cd c1 = Eigen::Vector2cd::Zero();
        const cplx proj = svd.matrixU().col(0).dot(rhs);  // conjugating dot
        c1 = svd.matrixV().col(0) * (proj / sv(0));
        std::vector<std::array<cplx, 2>> y1(np);
        for (int j = 0; j < np; ++j) {
            const Eigen::Vector2cd extra = E[j] * c1;
            y1[j] = {v[j][0] + extra(0), v[j][1] + extra(1)};
        }
        const auto u1 = detail::boundary_forms(problem.bc, y1);
        double sup = 0.0;
        for (const auto& s : y1) sup = std::max({sup, std::abs(s[0]), std::abs(s[1])});
        const double bc_rel = (std::abs(u1[0]) + std::abs(u1[1])) / std::max(1e-300, a_scale * sup);
        if (bc_rel > opts.tol)
            throw ChainConstructionFailure(
                "associated function cannot satisfy the boundary forms: relative defect " +
                std::to_string(bc_rel));
        finish(std::move(y1), &chain.functions.front().samples);
        chain.has_associated = true;
    } else if (ev.multiplicity > 2) {
        chain.diagnostics = "multiplicity above the chain cap; eigenfunction reported alone";
    }
    return chain;
}

/// One probe vector for the completeness experiment.
struct TestVector {
    std::string name;
    std::function<std::array<cplx, 2>(double)> f;
};

inline std::vector<TestVector> default_test_vectors() {
    auto bump = [](double x, double c, double w) { return std::exp(-(x - c) * (x - c) / (2.0 * w * w)); };
    return {
        {"bump_first", [bump](double x) { return std::array<cplx, 2>{bump(x, kPi / 2, kPi / 8), 0.0}; }},
        {"bump_second", [bump](double x) { return std::array<cplx, 2>{0.0, bump(x, 2 * kPi / 3, kPi / 9)}; }},
        {"poly_pair", [](double x) {
             return std::array<cplx, 2>{x * (kPi - x) / (kPi * kPi), 1.0 - 2.0 * x / kPi};
         }},
        {"ramp_pair", [](double x) {
             return std::array<cplx, 2>{x / kPi, x * x * (kPi - x) / (kPi * kPi * kPi)};
         }},
    };
}

struct CompletenessRung {
    double radius = 0.0;
    int eigenvalue_count = 0;
    int function_count = 0;
    double min_gram_eigenvalue = 0.0;  // of the normalized Gram matrix
    std::vector<double> residuals;     // per test vector, relative
};

struct CompletenessReport {
    std::vector<std::string> test_names;
    std::vector<CompletenessRung> rungs;
};

struct CompletenessOptions {
    LocateOptions locate{};
    ChainOptions chain{};
    double gram_drop = 1e-10;
};

/// Projects the test vectors onto the span of all root functions with
/// |lambda| <= R for each rung of the radius ladder, reporting relative
/// residuals and the smallest normalized Gram eigenvalue (the minimality
/// proxy: redundant systems drive it to numerical zero).
inline CompletenessReport completeness_experiment(const SpectralProblem& problem,
                                                  std::span<const double> radii,
                                                  const std::vector<TestVector>& tests,
                                                  const CompletenessOptions& opts = {}) {
    if (radii.empty()) throw DomainError("completeness experiment needs a radius ladder");
    for (std::size_t i = 0; i + 1 < radii.size(); ++i)
        if (!(radii[i] < radii[i + 1])) throw DomainError("radius ladder must increase");

    const LocateResult loc = locate_eigenvalues(problem, radii.back(), opts.locate);
    if (loc.budget_exceeded)
        throw BudgetExceeded("eigenvalue search exhausted its budget; ladder would be unsound");

    struct BasisFn {
        double abs_lambda;
        std::vector<std::array<cplx, 2>> samples;  // normalized
    };
    std::vector<BasisFn> basis;
    const auto weights = detail::simpson_weights(opts.chain.grid_resolution + 1);
    for (const auto& ev : loc.eigenvalues) {
        RootChain chain = root_chain(problem, ev, opts.chain);
        for (auto& f : chain.functions) {
            if (f.norm <= 0.0) continue;
            for (auto& s : f.samples) {
                s[0] /= f.norm;
                s[1] /= f.norm;
            }
            basis.push_back({std::abs(ev.lambda), std::move(f.samples)});
        }
    }

    CompletenessReport report;
    for (const auto& t : tests) report.test_names.push_back(t.name);

    const int np = opts.chain.grid_resolution + 1;
    std::vector<std::vector<std::array<cplx, 2>>> fs;
    for (const auto& t : tests) {
        std::vector<std::array<cplx, 2>> s(np);
        for (int j = 0; j < np; ++j) s[j] = t.f(kPi * j / (np - 1));
        const double nrm = detail::h_norm(s, weights);
        if (nrm <= 0.0) throw DomainError("test vector has zero norm");
        for (auto& v : s) {
            v[0] /= nrm;
            v[1] /= nrm;
        }
        fs.push_back(std::move(s));
    }

    for (double R : radii) {
        CompletenessRung rung;
        rung.radius = R;
        std::vector<const BasisFn*> active;
        for (const auto& b : basis)
            if (b.abs_lambda <= R + 1e-9) active.push_back(&b);
        rung.function_count = static_cast<int>(active.size());
        for (const auto& ev : loc.eigenvalues)
            if (std::abs(ev.lambda) <= R + 1e-9) ++rung.eigenvalue_count;

        if (active.empty()) {
            rung.residuals.assign(tests.size(), 1.0);
            rung.min_gram_eigenvalue = 0.0;
            report.rungs.push_back(std::move(rung));
            continue;
        }

        const int m = static_cast<int>(active.size());
        Eigen::MatrixXcd G(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j <= i; ++j) {
                const cplx v = detail::h_inner(active[j]->samples, active[i]->samples, weights);
                G(i, j) = v;
                G(j, i) = std::conj(v);
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(G);
        const auto& mu = eig.eigenvalues();
        rung.min_gram_eigenvalue = mu(0);
        const double drop = opts.gram_drop * mu(m - 1);

        for (std::size_t t = 0; t < fs.size(); ++t) {
            Eigen::VectorXcd rhs(m);
            for (int i = 0; i < m; ++i)
                rhs(i) = detail::h_inner(fs[t], active[i]->samples, weights);
            Eigen::VectorXcd c = Eigen::VectorXcd::Zero(m);
            for (int k = 0; k < m; ++k) {
                if (mu(k) <= drop) continue;
                const Eigen::VectorXcd vk = eig.eigenvectors().col(k);
                c += vk * (vk.dot(rhs) / mu(k));
            }
            std::vector<std::array<cplx, 2>> r = fs[t];
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < np; ++j) {
                    r[j][0] -= c(i) * active[i]->samples[j][0];
                    r[j][1] -= c(i) * active[i]->samples[j][1];
                }
            rung.residuals.push_back(detail::h_norm(r, weights));
        }
        report.rungs.push_back(std::move(rung));
    }
    return report;
}

}  // namespace diraclab
