// SPDX-License-Identifier: Apache-2.0
//
// Modified Bessel functions of the first kind, integer order, real argument.
//
// Small arguments (x <= threshold_direct * (order + 1)) are summed directly
// from the power series, rescaled in log space so that large orders do not
// overflow intermediate terms. Larger arguments combine the Hankel expansion
// of I_0 with ratios I_n / I_{n-1} obtained by backward recurrence.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rot {

/// Switching thresholds for Bessel evaluation.
///
/// threshold_direct: the power series is used while x <= threshold_direct * (n + 1).
/// threshold_ratio_validity: I_N(x) / I_0(x) ~ exp(-N^2 / 2x) is trusted only
/// when x >= threshold_ratio_validity * N^2. The relative error of that
/// approximation is about N^2 / (4 x^2), i.e. 1 / (4 t^2 N^2) at the threshold t;
/// the default keeps it below 3e-9.
struct BesselRegime {
    double threshold_direct = 20.0;
    double threshold_ratio_validity = 1e4;
};

inline void validate(const BesselRegime& regime)
{
    if (!(regime.threshold_direct > 0.0))
        throw std::invalid_argument("BesselRegime: threshold_direct must be positive");
    if (!(regime.threshold_ratio_validity >= 10.0))
        throw std::invalid_argument("BesselRegime: threshold_ratio_validity must be >= 10");
}

namespace detail {

constexpr double kLogHuge = 644.72; // ln(1e280)

// ln I_n(x) from the power series sum_k (x/2)^{2k+n} / (k! (n+k)!).
inline double log_bessel_i_series(int n, double x)
{
    const double half = 0.5 * x;
    const double quarter_sq = half * half;
    double log_lead = n * std::log(half) - std::lgamma(n + 1.0);
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1;; ++k) {
        term *= quarter_sq / (static_cast<double>(k) * static_cast<double>(n + k));
        sum += term;
        if (term < sum * 1e-17)
            break;
        if (sum > 1e280) {
            sum *= 1e-280;
            term *= 1e-280;
            log_lead += kLogHuge;
        }
    }
    return log_lead + std::log(sum);
}

// ln I_0(x) for x > 20 via the Hankel expansion
// I_0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! 8^k x^k).
inline double log_bessel_i0_asymptotic(double x)
{
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        if (next >= term)
            break;
        term = next;
        sum += term;
        if (term < 1e-17 * sum)
            break;
    }
    return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

inline double log_bessel_i0(double x)
{
    if (x <= 20.0)
        return log_bessel_i_series(0, x);
    return log_bessel_i0_asymptotic(x);
}

} // namespace detail

/// ln(I_n(x) / I_0(x)) for n = 0..n_max, by backward recurrence on
/// r_k = I_k / I_{k-1} = x / (2k + x r_{k+1}).
inline std::vector<double> log_bessel_ratios(int n_max, double x)
{
    if (n_max < 0)
        throw std::invalid_argument("log_bessel_ratios: negative order");
    if (!(x >= 0.0) || !std::isfinite(x))
        throw std::invalid_argument("log_bessel_ratios: argument must be finite and >= 0");

    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (x == 0.0) {
        for (int n = 1; n <= n_max; ++n)
            out[n] = -std::numeric_limits<double>::infinity();
        return out;
    }

    const double nm = static_cast<double>(n_max);
    const int start = static_cast<int>(std::ceil(std::sqrt(nm * nm + 80.0 * x))) + 25;
    // Asymptotic guess for I_K / I_{K-1}; its error is damped by the recurrence.
    double ratio = x / (start + std::sqrt(static_cast<double>(start) * start + x * x));
    std::vector<double> ratios(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int k = start - 1; k >= 1; --k) {
        ratio = x / (2.0 * k + x * ratio);
        if (k <= n_max)
            ratios[k] = ratio;
    }
    double acc = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        acc += std::log(ratios[n]);
        out[n] = acc;
    }
    return out;
}

/// ln I_n(x). Finite wherever I_n(x) > 0, including arguments whose I_n overflows.
inline double log_bessel_i(int n, double x, const BesselRegime& regime = {})
{
    if (n < 0)
        n = -n;
    if (!(x >= 0.0) || !std::isfinite(x))
        throw std::invalid_argument("log_bessel_i: argument must be finite and >= 0");
    if (x == 0.0)
        return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (x <= regime.threshold_direct * (n + 1))
        return detail::log_bessel_i_series(n, x);
    const double log_i0 = detail::log_bessel_i0(x);
    if (n == 0)
        return log_i0;
    return log_i0 + log_bessel_ratios(n, x).back();
}

/// I_n(x). Throws std::overflow_error when the value is not representable;
/// use log_bessel_i there.
inline double bessel_i(int n, double x, const BesselRegime& regime = {})
{
    const double log_value = log_bessel_i(n, x, regime);
    if (log_value > std::log(std::numeric_limits<double>::max()))
        throw std::overflow_error("bessel_i: result exceeds double range");
    return std::exp(log_value);
}

/// Large-argument approximation I_N(x) / I_0(x) ~ exp(-N^2 / (2x)),
/// error O(N^4 / x^2). Applicability is the caller's decision.
inline double bessel_ratio(int order, double x)
{
    if (order == 0)
        return 1.0;
    if (x <= 0.0)
        return 0.0;
    const double n = static_cast<double>(order);
    return std::exp(-n * n / (2.0 * x));
}

/// I_n(x) / I_0(x) for n = 0..n_max. Entries with x >= threshold_ratio_validity * n^2
/// use bessel_ratio; the rest use the exact log-domain recurrence.
inline std::vector<double> bessel_ratio_table(int n_max, double x, const BesselRegime& regime = {})
{
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
    out[0] = 1.0;
    if (n_max == 0)
        return out;
    int approx_limit = 0;
    if (x > 0.0)
        approx_limit = static_cast<int>(std::floor(std::sqrt(x / regime.threshold_ratio_validity)));
    for (int n = 1; n <= std::min(n_max, approx_limit); ++n)
        out[n] = bessel_ratio(n, x);
    if (approx_limit < n_max) {
        const auto logs = log_bessel_ratios(n_max, x);
        for (int n = approx_limit + 1; n <= n_max; ++n)
            out[n] = std::exp(logs[n]);
    }
    return out;
}

/// Exact I_n(x) / I_0(x) for n = 0..n_max.
inline std::vector<double> exact_bessel_ratio_table(int n_max, double x)
{
    auto logs = log_bessel_ratios(n_max, x);
    for (auto& v : logs)
        v = std::exp(v);
    return logs;
}

} // namespace rot
