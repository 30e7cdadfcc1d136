#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "diraclab/errors.hpp"
#include "diraclab/problem.hpp"
#include "diraclab/quadrature.hpp"
#include "diraclab/scaled_complex.hpp"

namespace diraclab {

/// Levels of the iterated oscillatory integrals feeding the diagonal entries
/// of the fundamental matrix: e11(t) = e^{i lambda t} sum_n g_n(t),
/// e22(t) = e^{-i lambda t} sum_n h_n(t). Stored values are scaled,
/// g_n(t) = g[n][j] e^{g_rate t}, keeping every carrier O(1); the h chain is
/// the g chain of (Q, P, -lambda).
struct IteratedIntegralTable {
    cplx lambda;
    std::vector<double> grid;
    std::vector<std::vector<cplx>> g, h;  // scaled per-level node values, level 0 included
    double g_rate = 0.0, h_rate = 0.0;
    std::vector<double> g_sup, h_sup;  // per-level scaled sup norms over the fine grid
    cplx g_sum_end{0.0, 0.0}, h_sum_end{0.0, 0.0};  // scaled sums at t = pi
    int n_max = 0;
    double tail_bound = 0.0;

    cplx g_value(std::size_t n, std::size_t j) const {
        return g[n][j] * std::exp(g_rate * grid[j]);
    }
    cplx h_value(std::size_t n, std::size_t j) const {
        return h[n][j] * std::exp(h_rate * grid[j]);
    }
};

struct SeriesOptions {
    int level_cap = 60;
    double fine_factor = 1200.0;  // fine nodes per unit of |Re|+|Im|
    int max_fine = 1 << 17;
    double graded_tol = 1e-13;
};

namespace series_detail {

struct ChainSpec {
    const std::vector<cplx>* fout;
    const std::vector<cplx>* fin;
    const std::vector<cplx>* osc_out;  // e^{2 i alpha_out t_j}
    const std::vector<cplx>* osc_in;
    double alpha_out, alpha_in;
    double p, q;  // damping rates of the outer / inner carriers
    const Potential* fout_fn;
    const Potential* fin_fn;
};

struct ChainResult {
    std::vector<std::vector<cplx>> levels;  // coarse nodes
    std::vector<double> level_sup;
    cplx sum_end{0.0, 0.0};
    double rate = 0.0;
    int n_levels = 0;
    double tail_bound = 0.0;
};

// One cumulative product-quadrature pass: out[j] ~ scaled cumulative integral
// of fn[j]*carrier[j]*osc[j] with per-cell exponential damping at rate 2*damp.
// Parabolic three-node cells; the cells touching a singular endpoint are
// replaced by graded adaptive quadrature with the carrier interpolated from
// its known node values.
struct PassContext {
    int M;
    double h;
    double damp;  // rate
    const std::vector<cplx>& values;  // fn * carrier * osc at nodes
    bool sing_left, sing_right;
};

template <class GradedCell>
void cumulative_pass(const PassContext& ctx, std::vector<cplx>& out, GradedCell&& graded_cell) {
    const int M = ctx.M;
    const double h = ctx.h;
    const double d = std::exp(-2.0 * ctx.damp * h);
    const double dinv = 1.0 / d;
    const double w = h / 12.0;
    const auto& v = ctx.values;
    out[0] = {0.0, 0.0};
    for (int j = 0; j < M; ++j) {
        cplx cell;
        if (j == 0) {
            cell = ctx.sing_left ? graded_cell(0)
                                 : w * (5.0 * d * v[0] + 8.0 * v[1] - dinv * v[2]);
        } else if (j == 1 && ctx.sing_left) {
            cell = w * (5.0 * d * v[1] + 8.0 * v[2] - dinv * v[3]);
        } else if (j == M - 1 && ctx.sing_right) {
            cell = graded_cell(M - 1);
        } else {
            cell = w * (-d * d * v[j - 1] + 8.0 * d * v[j] + 5.0 * v[j + 1]);
        }
        out[j + 1] = d * out[j] + cell;
    }
}

inline ChainResult run_chain(const ChainSpec& spec, int M, int stride, double tol,
                             const SeriesOptions& opts) {
    const double h = kPi / M;
    ChainResult res;
    res.rate = 2.0 * spec.p;

    std::vector<cplx> A_prev(M + 1), A(M + 1), B(M + 1), base(M + 1), sum_fine(M + 1);
    for (int j = 0; j <= M; ++j) A_prev[j] = std::exp(-2.0 * spec.p * (h * j));
    sum_fine = A_prev;
    double sup_sum = 1.0;
    res.sum_end = A_prev[M];

    auto push_coarse = [&](const std::vector<cplx>& src) {
        std::vector<cplx> c;
        c.reserve(M / stride + 1);
        for (int j = 0; j <= M; j += stride) c.push_back(src[j]);
        res.levels.push_back(std::move(c));
    };
    push_coarse(A_prev);
    res.level_sup.push_back(1.0);

    const bool in_sl = spec.fin_fn->singular_left;
    const bool in_sr = spec.fin_fn->singular_right;
    const bool out_sl = spec.fout_fn->singular_left;
    const bool out_sr = spec.fout_fn->singular_right;

    for (int n = 1;; ++n) {
        if (n > opts.level_cap)
            throw TruncationCapReached("iterated integral levels exceeded the cap");

        // Inner pass: B ~ cumulative of fin * A_prev * e^{2 i alpha_in u}.
        for (int j = 0; j <= M; ++j) base[j] = (*spec.fin)[j] * A_prev[j] * (*spec.osc_in)[j];
        if (in_sl) base[0] = {0.0, 0.0};
        if (in_sr) base[M] = {0.0, 0.0};
        auto graded_b = [&](int j) -> cplx {
            const double lo = h * j, hi = h * (j + 1);
            auto carrier = [&](double u) -> cplx {
                if (n == 1) return std::exp(-2.0 * spec.p * u);
                if (j == 0) return A_prev[1] * (u / h);
                return A_prev[j] + (A_prev[j + 1] - A_prev[j]) * ((u - lo) / h);
            };
            auto f = [&](double u) {
                return (*spec.fin_fn)(u) * carrier(u) *
                       std::polar(1.0, 2.0 * spec.alpha_in * u) *
                       std::exp(-2.0 * spec.q * (hi - u));
            };
            return j == 0 ? integrate_graded_left(f, lo, hi, opts.graded_tol)
                          : integrate_graded_right(f, lo, hi, opts.graded_tol);
        };
        cumulative_pass({M, h, spec.q, base, in_sl, in_sr}, B, graded_b);

        // Outer pass: A ~ cumulative of fout * B * e^{2 i alpha_out s}.
        for (int j = 0; j <= M; ++j) base[j] = (*spec.fout)[j] * B[j] * (*spec.osc_out)[j];
        if (out_sl) base[0] = {0.0, 0.0};
        if (out_sr) base[M] = {0.0, 0.0};
        auto graded_a = [&](int j) -> cplx {
            const double lo = h * j, hi = h * (j + 1);
            auto carrier = [&](double u) -> cplx {
                if (j == 0) return B[1] * (u / h);
                return B[j] + (B[j + 1] - B[j]) * ((u - lo) / h);
            };
            auto f = [&](double u) {
                return (*spec.fout_fn)(u) * carrier(u) *
                       std::polar(1.0, 2.0 * spec.alpha_out * u) *
                       std::exp(-2.0 * spec.p * (hi - u));
            };
            return j == 0 ? integrate_graded_left(f, lo, hi, opts.graded_tol)
                          : integrate_graded_right(f, lo, hi, opts.graded_tol);
        };
        cumulative_pass({M, h, spec.p, base, out_sl, out_sr}, A, graded_a);

        double sup = 0.0;
        for (int j = 0; j <= M; ++j) {
            sum_fine[j] += A[j];
            sup = std::max(sup, std::abs(A[j]));
            sup_sum = std::max(sup_sum, std::abs(sum_fine[j]));
        }
        res.sum_end += A[M];
        push_coarse(A);
        res.level_sup.push_back(sup);
        res.n_levels = n;
        if (sup <= tol * sup_sum) {
            res.tail_bound = sup;
            break;
        }
        std::swap(A_prev, A);
    }
    return res;
}

}  // namespace series_detail

/// Builds both iterated-integral chains for one lambda by cumulative product
/// quadrature over a shared fine grid (cost linear per level). Truncates when
/// a level's scaled sup-norm drops below tol times the running sum.
inline IteratedIntegralTable build_tables(const SpectralProblem& problem, cplx lambda,
                                          int grid_resolution, double tol = 1e-12,
                                          const SeriesOptions& opts = {}) {
    if (grid_resolution < 64) throw DomainError("build_tables needs grid_resolution >= 64");
    const double a = lambda.real();
    const double b = lambda.imag();

    // Oscillation at frequency 2|Re lambda| must be resolved by the parabolic
    // cells; scale the fine grid with the total frequency content.
    const double target = opts.fine_factor * (std::abs(a) + std::abs(b) + 2.0);
    int M = grid_resolution;
    while (M < target && 2 * M <= opts.max_fine) M *= 2;
    const int stride = M / grid_resolution;

    const Potential& P = problem.potential.P();
    const Potential& Q = problem.potential.Q();
    std::vector<cplx> Pv(M + 1), Qv(M + 1), osc(M + 1), osc_conj(M + 1);
    const double h = kPi / M;
    for (int j = 0; j <= M; ++j) {
        const double t = h * j;
        const bool left_end = j == 0, right_end = j == M;
        Pv[j] = (left_end && P.singular_left) || (right_end && P.singular_right) ? cplx{0.0, 0.0}
                                                                                 : P(t);
        Qv[j] = (left_end && Q.singular_left) || (right_end && Q.singular_right) ? cplx{0.0, 0.0}
                                                                                 : Q(t);
        osc[j] = std::polar(1.0, 2.0 * a * t);
        osc_conj[j] = std::conj(osc[j]);
    }

    IteratedIntegralTable table;
    table.lambda = lambda;
    table.grid.resize(grid_resolution + 1);
    for (int j = 0; j <= grid_resolution; ++j) table.grid[j] = kPi * j / grid_resolution;

    series_detail::ChainSpec g_spec{&Pv, &Qv, &osc_conj, &osc, -a, a,
                                    std::max(b, 0.0), std::max(-b, 0.0), &P, &Q};
    series_detail::ChainSpec h_spec{&Qv, &Pv, &osc, &osc_conj, a, -a,
                                    std::max(-b, 0.0), std::max(b, 0.0), &Q, &P};

    auto gres = series_detail::run_chain(g_spec, M, stride, tol, opts);
    auto hres = series_detail::run_chain(h_spec, M, stride, tol, opts);

    table.g = std::move(gres.levels);
    table.h = std::move(hres.levels);
    table.g_rate = gres.rate;
    table.h_rate = hres.rate;
    table.g_sup = std::move(gres.level_sup);
    table.h_sup = std::move(hres.level_sup);
    table.g_sum_end = gres.sum_end;
    table.h_sum_end = hres.sum_end;
    table.n_max = std::max(gres.n_levels, hres.n_levels);
    table.tail_bound = std::max(gres.tail_bound, hres.tail_bound);
    return table;
}

/// e11(pi, lambda) from the table, in scaled form.
inline ScaledComplex e11_series(const IteratedIntegralTable& t) {
    // e^{i lambda pi} * sum_n g_n(pi); the stored sum carries e^{-g_rate pi}.
    return ScaledComplex::from(t.g_sum_end, t.g_rate * kPi) *
           ScaledComplex(-t.lambda.imag() * kPi, t.lambda.real() * kPi);
}

/// e22(pi, lambda) from the table, in scaled form.
inline ScaledComplex e22_series(const IteratedIntegralTable& t) {
    return ScaledComplex::from(t.h_sum_end, t.h_rate * kPi) *
           ScaledComplex(t.lambda.imag() * kPi, -t.lambda.real() * kPi);
}

struct LevelNorm {
    int n;
    double g_sup;
    double h_sup;
};

/// Per-level scaled sup-norms; the tail must be summable for the series to be
/// trustworthy.
inline std::vector<LevelNorm> scaled_partial_sums(const IteratedIntegralTable& t) {
    std::vector<LevelNorm> out;
    const std::size_t n = std::max(t.g_sup.size(), t.h_sup.size());
    for (std::size_t k = 1; k < n; ++k) {
        out.push_back({static_cast<int>(k), k < t.g_sup.size() ? t.g_sup[k] : 0.0,
                       k < t.h_sup.size() ? t.h_sup[k] : 0.0});
    }
    return out;
}

}  // namespace diraclab
