// SPDX-License-Identifier: Apache-2.0
//
// Circular moments E[cos m theta | r], E[sin m theta | r] of the azimuth density
// conditioned on range, as truncated Bessel series.
//
// With x = A3 r^2 and y = D r, the "diagonal" integrals (phi2 = 0) are
//
//   Idc(m) = 2 pi [ I_0(x) I_m(y) cos(m psi)
//              + sum_{j=1}^{N} I_j(x) (I_{2j+m}(y) cos((2j+m) psi) + I_{2j-m}(y) cos((2j-m) psi)) ]
//   Ids(m) = 2 pi [ I_0(x) I_m(y) sin(m psi)
//              + sum_{j=1}^{N} I_j(x) (I_{2j+m}(y) sin((2j+m) psi) - I_{2j-m}(y) sin((2j-m) psi)) ]
//
// and the general case is the rotation of (Idc, Ids) by m phi2 / 2, divided by
// Delta = Idc(0). Negative orders fold with I_{-n} = I_n.

#pragma once

#include "rot/density.hpp"
#include "rot/special_functions.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rot {

struct MomentPair {
    double c = 0.0;
    double s = 0.0;
};

/// Moments of orders 1..M, stored at index m - 1.
struct CircularMoments {
    double r = 0.0;
    int n_terms = 0;
    std::vector<MomentPair> orders;

    [[nodiscard]] int M() const { return static_cast<int>(orders.size()); }
    [[nodiscard]] const MomentPair& operator[](int m) const { return orders.at(m - 1); }
};

enum class TrigKind { cos, sin };

namespace detail {

struct SeriesArgs {
    double x; // A3 r^2
    double y; // D r
};

inline SeriesArgs series_args(const PolarParams& pp, double r)
{
    return {pp.A3 * r * r, pp.D * r};
}

// Normalized diagonal sums, i.e. Idc / (2 pi I_0(x) I_0(y)) and Ids likewise,
// from ratio tables rx[j] = I_j(x)/I_0(x), ry[n] = I_n(y)/I_0(y).
// `abs_sum` collects the sum of absolute term magnitudes for conditioning checks.
inline MomentPair normalized_diag(int m, double psi, int n_terms, const std::vector<double>& rx,
                                  const std::vector<double>& ry, double* abs_sum = nullptr)
{
    MomentPair out;
    const double lead = rx[0] * ry[m];
    out.c = lead * std::cos(m * psi);
    out.s = lead * std::sin(m * psi);
    double mag = std::abs(lead);
    for (int j = 1; j <= n_terms; ++j) {
        const int up = 2 * j + m;
        const int down = 2 * j - m;
        const double t_up = rx[j] * ry[up];
        const double t_down = rx[j] * ry[std::abs(down)];
        out.c += t_up * std::cos(up * psi) + t_down * std::cos(down * psi);
        out.s += t_up * std::sin(up * psi) - t_down * std::sin(down * psi);
        mag += std::abs(t_up) + std::abs(t_down);
    }
    if (abs_sum)
        *abs_sum = mag;
    return out;
}

inline MomentPair rotate_and_normalize(int m, double phi2, const MomentPair& diag, double delta)
{
    const double ch = std::cos(0.5 * m * phi2);
    const double sh = std::sin(0.5 * m * phi2);
    return {(ch * diag.c + sh * diag.s) / delta, (ch * diag.s - sh * diag.c) / delta};
}

inline void require_positive_range(double r, const char* who)
{
    if (!(r > 0.0) || !std::isfinite(r))
        throw std::invalid_argument(std::string(who) + ": r must be finite and > 0");
}

} // namespace detail

/// Idc(m) for the diagonal problem. May return +inf when I_0(x) I_0(y) overflows.
inline double diag_cos(int m, const PolarParams& pp, double r, int n_terms)
{
    detail::require_positive_range(r, "diag_cos");
    if (m < 0 || n_terms < 0)
        throw std::invalid_argument("diag_cos: m and n_terms must be >= 0");
    const auto [x, y] = detail::series_args(pp, r);
    const auto rx = exact_bessel_ratio_table(n_terms, x);
    const auto ry = exact_bessel_ratio_table(2 * n_terms + m, y);
    const auto nd = detail::normalized_diag(m, pp.psi, n_terms, rx, ry);
    return 2.0 * std::numbers::pi * nd.c * std::exp(log_bessel_i(0, x) + log_bessel_i(0, y));
}

/// Ids(m) for the diagonal problem.
inline double diag_sin(int m, const PolarParams& pp, double r, int n_terms)
{
    detail::require_positive_range(r, "diag_sin");
    if (m < 0 || n_terms < 0)
        throw std::invalid_argument("diag_sin: m and n_terms must be >= 0");
    const auto [x, y] = detail::series_args(pp, r);
    const auto rx = exact_bessel_ratio_table(n_terms, x);
    const auto ry = exact_bessel_ratio_table(2 * n_terms + m, y);
    const auto nd = detail::normalized_diag(m, pp.psi, n_terms, rx, ry);
    return 2.0 * std::numbers::pi * nd.s * std::exp(log_bessel_i(0, x) + log_bessel_i(0, y));
}

namespace detail {

// Direct (unnormalized) evaluation with plain Bessel values. Throws
// std::overflow_error if any I_n is not representable.
inline MomentPair gen_direct(int m, const PolarParams& pp, double r, int n_terms)
{
    require_positive_range(r, "gen_cos/gen_sin");
    if (m < 0 || n_terms < 0)
        throw std::invalid_argument("gen_cos/gen_sin: m and n_terms must be >= 0");
    const auto [x, y] = series_args(pp, r);
    std::vector<double> ix(static_cast<std::size_t>(n_terms) + 1);
    std::vector<double> iy(static_cast<std::size_t>(2 * n_terms + m) + 1);
    for (int j = 0; j <= n_terms; ++j)
        ix[j] = bessel_i(j, x);
    for (int n = 0; n <= 2 * n_terms + m; ++n)
        iy[n] = bessel_i(n, y);
    const auto diag = normalized_diag(m, pp.psi, n_terms, ix, iy);
    const auto norm = normalized_diag(0, pp.psi, n_terms, ix, iy);
    if (!(norm.c > 0.0))
        throw std::domain_error("gen_cos/gen_sin: truncated normalizer is not positive");
    return rotate_and_normalize(m, pp.phi2, diag, norm.c);
}

} // namespace detail

/// E[cos m theta | r] from plain Bessel values.
inline double gen_cos(int m, const PolarParams& pp, double r, int n_terms)
{
    return detail::gen_direct(m, pp, r, n_terms).c;
}

/// E[sin m theta | r] from plain Bessel values.
inline double gen_sin(int m, const PolarParams& pp, double r, int n_terms)
{
    return detail::gen_direct(m, pp, r, n_terms).s;
}

/// Series moments for orders 1..M plus numerical diagnostics.
///
/// condition: sum of |terms| over |normalizer|; the series cancels badly once
///   this approaches 1 / epsilon (opposing first and second harmonics at large x).
/// tail: magnitude of the first omitted j-term relative to the normalizer.
struct SeriesMoments {
    CircularMoments moments;
    double condition = 1.0;
    double tail = 0.0;
};

/// All orders 1..M in one pass over shared ratio tables, normalized by
/// I_0(x) I_0(y). Ratios use exp(-N^2 / 2x) where the regime allows it and the
/// exact log-domain recurrence elsewhere.
inline SeriesMoments series_moments(const PolarParams& pp, double r, int max_order, int n_terms,
                                    const BesselRegime& regime = {})
{
    detail::require_positive_range(r, "series_moments");
    if (max_order < 0 || n_terms < 0)
        throw std::invalid_argument("series_moments: max_order and n_terms must be >= 0");
    validate(regime);
    const auto [x, y] = detail::series_args(pp, r);
    // One extra j so the first omitted term can be reported.
    const auto rx = bessel_ratio_table(n_terms + 1, x, regime);
    const auto ry = bessel_ratio_table(2 * (n_terms + 1) + max_order, y, regime);

    SeriesMoments out;
    out.moments.r = r;
    out.moments.n_terms = n_terms;
    double abs_sum = 0.0;
    const auto norm = detail::normalized_diag(0, pp.psi, n_terms, rx, ry, &abs_sum);
    if (!(norm.c > 0.0))
        throw std::domain_error("series_moments: truncated normalizer is not positive");
    out.condition = abs_sum / norm.c;
    const int j_next = n_terms + 1;
    out.tail = rx[j_next] * (ry[2 * j_next] + ry[2 * j_next + max_order]) / norm.c;
    out.moments.orders.reserve(static_cast<std::size_t>(max_order));
    for (int m = 1; m <= max_order; ++m) {
        const auto diag = detail::normalized_diag(m, pp.psi, n_terms, rx, ry);
        out.moments.orders.push_back(detail::rotate_and_normalize(m, pp.phi2, diag, norm.c));
    }
    return out;
}

/// Series moments with n_terms doubled from `n_start` until the first omitted
/// term drops below `tail_tol` or `n_max` is reached. Throws std::domain_error
/// if the normalizer is still not positive at `n_max`.
inline SeriesMoments converged_series_moments(const PolarParams& pp, double r, int max_order,
                                              int n_start = 5, double tail_tol = 1e-14,
                                              int n_max = 256, const BesselRegime& regime = {})
{
    for (int n = std::max(n_start, 1);; n = std::min(2 * n, n_max)) {
        try {
            auto sm = series_moments(pp, r, max_order, n, regime);
            if (sm.tail <= tail_tol || n >= n_max)
                return sm;
        } catch (const std::domain_error&) {
            // A short truncation can leave the normalizer negative; more terms fix that.
            if (n >= n_max)
                throw;
        }
    }
}

/// (E[cos m theta | r], E[sin m theta | r]) through the normalized path.
inline std::pair<double, double> stabilized_gen_moments(int m, const PolarParams& pp, double r,
                                                        int n_terms, const BesselRegime& regime = {})
{
    if (m < 0)
        throw std::invalid_argument("stabilized_gen_moments: m must be >= 0");
    if (m == 0)
        return {1.0, 0.0};
    const auto sm = series_moments(pp, r, m, n_terms, regime);
    return {sm.moments[m].c, sm.moments[m].s};
}

inline CircularMoments circular_moments(const PolarParams& pp, double r, int max_order,
                                        int n_terms = 5, const BesselRegime& regime = {})
{
    if (max_order < 1)
        throw std::invalid_argument("circular_moments: max_order must be >= 1");
    return series_moments(pp, r, max_order, n_terms, regime).moments;
}

/// E[b | r] with b = (cos theta, sin theta).
inline Eigen::Vector2d bearing_mean(const CircularMoments& cm)
{
    return {cm[1].c, cm[1].s};
}

/// E[(b - E b)(b - E b)^T | r] from the first two moments.
inline Eigen::Matrix2d bearing_covariance(const CircularMoments& cm)
{
    if (cm.M() < 2)
        throw std::invalid_argument("bearing_covariance: needs moments up to order 2");
    const double c1 = cm[1].c, s1 = cm[1].s, c2 = cm[2].c, s2 = cm[2].s;
    Eigen::Matrix2d P;
    P(0, 0) = 0.5 + 0.5 * c2 - c1 * c1;
    P(1, 1) = 0.5 - 0.5 * c2 - s1 * s1;
    P(0, 1) = P(1, 0) = 0.5 * s2 - c1 * s1;
    return P;
}

inline Eigen::Vector2d bearing_mean(const PolarParams& pp, double r, int n_terms = 5)
{
    return bearing_mean(circular_moments(pp, r, 1, n_terms));
}

inline Eigen::Matrix2d bearing_covariance(const PolarParams& pp, double r, int n_terms = 5)
{
    return bearing_covariance(circular_moments(pp, r, 2, n_terms));
}

/// E[cos^k theta | r] or E[sin^k theta | r] for k in {2, 3, 4} by power reduction.
inline double power_moment(int power, TrigKind kind, const CircularMoments& cm)
{
    auto need = [&](int order) {
        if (cm.M() < order)
            throw std::invalid_argument("power_moment: not enough moment orders");
    };
    const bool is_cos = kind == TrigKind::cos;
    switch (power) {
    case 2:
        need(2);
        return is_cos ? 0.5 + 0.5 * cm[2].c : 0.5 - 0.5 * cm[2].c;
    case 3:
        need(3);
        return is_cos ? (3.0 * cm[1].c + cm[3].c) / 4.0 : (3.0 * cm[1].s - cm[3].s) / 4.0;
    case 4:
        need(4);
        return is_cos ? (3.0 + 4.0 * cm[2].c + cm[4].c) / 8.0 : (3.0 - 4.0 * cm[2].c + cm[4].c) / 8.0;
    default:
        throw std::invalid_argument("power_moment: power must be 2, 3 or 4");
    }
}

inline double power_moment(int power, TrigKind kind, const PolarParams& pp, double r,
                           int n_terms = 5)
{
    if (power < 2 || power > 4)
        throw std::invalid_argument("power_moment: power must be 2, 3 or 4");
    return power_moment(power, kind, circular_moments(pp, r, power, n_terms));
}

/// E[cos theta sin theta | r].
inline double cross_moment(const CircularMoments& cm)
{
    return 0.5 * cm[2].s;
}

} // namespace rot
