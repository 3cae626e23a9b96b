// SPDX-License-Identifier: Apache-2.0
//
// Quadrature reference for the conditional azimuth moments. Independent of
// the Bessel series; only the parameter and result types are shared.

#pragma once

#include "rot/density.hpp"
#include "rot/moments.hpp"
#include "rot/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace rot {

namespace detail {

struct ExponentPeak {
    double theta;
    double value;
    double curvature; // -g''(theta) >= 0
};

// Local maxima of g(theta) = y cos(theta - phi1) + x cos(2 theta + phi2), a
// trigonometric polynomial of degree two (at most two maxima).
inline std::vector<ExponentPeak> exponent_peaks(const PolarParams& pp, double r)
{
    const double y = pp.D * r;
    const double x = pp.A3 * r * r;
    auto g = [&](double t) { return y * std::cos(t - pp.phi1) + x * std::cos(2.0 * t + pp.phi2); };
    auto dg = [&](double t) {
        return -y * std::sin(t - pp.phi1) - 2.0 * x * std::sin(2.0 * t + pp.phi2);
    };
    auto d2g = [&](double t) {
        return -y * std::cos(t - pp.phi1) - 4.0 * x * std::cos(2.0 * t + pp.phi2);
    };

    constexpr int grid = 64;
    constexpr double step = 2.0 * std::numbers::pi / grid;
    std::vector<double> values(grid);
    for (int i = 0; i < grid; ++i)
        values[i] = g(i * step);

    std::vector<ExponentPeak> peaks;
    for (int i = 0; i < grid; ++i) {
        const double prev = values[(i + grid - 1) % grid];
        const double next = values[(i + 1) % grid];
        if (!(values[i] >= prev && values[i] > next))
            continue;
        // Safeguarded Newton on g' inside the bracketing cell.
        double lo = (i - 1) * step, hi = (i + 1) * step;
        double t = i * step;
        for (int it = 0; it < 60; ++it) {
            const double d1 = dg(t);
            const double d2 = d2g(t);
            if (d1 > 0.0)
                lo = t;
            else
                hi = t;
            double candidate = (d2 < 0.0) ? t - d1 / d2 : 0.5 * (lo + hi);
            if (!(candidate > lo && candidate < hi))
                candidate = 0.5 * (lo + hi);
            if (std::abs(candidate - t) < 1e-15 * (1.0 + std::abs(t))) {
                t = candidate;
                break;
            }
            t = candidate;
        }
        peaks.push_back({t, g(t), std::max(-d2g(t), 0.0)});
    }
    if (peaks.empty()) // constant exponent
        peaks.push_back({0.0, g(0.0), 0.0});
    return peaks;
}

} // namespace detail

namespace detail {

// Integration window centred opposite the dominant peak, breakpoints around
// every peak, and the exponent maximum to subtract.
struct QuadLayout {
    double offset;
    double gmax;
    std::vector<double> breaks;
};

inline QuadLayout quad_layout(const PolarParams& pp, double r)
{
    const auto peaks = exponent_peaks(pp, r);
    const auto top = *std::max_element(peaks.begin(), peaks.end(),
                                       [](const auto& a, const auto& b) { return a.value < b.value; });
    QuadLayout lay{top.theta - std::numbers::pi, top.value, {}};
    const double window_end = lay.offset + 2.0 * std::numbers::pi;
    for (const auto& pk : peaks) {
        double center = pk.theta;
        while (center < lay.offset)
            center += 2.0 * std::numbers::pi;
        while (center >= window_end)
            center -= 2.0 * std::numbers::pi;
        lay.breaks.push_back(center);
        if (pk.curvature > 0.0) {
            const double width = 1.0 / std::sqrt(pk.curvature);
            for (double k : {1.0, 3.0, 9.0, 27.0}) {
                lay.breaks.push_back(center - k * width);
                lay.breaks.push_back(center + k * width);
            }
        }
    }
    return lay;
}

inline void require_quad_args(int m, double r, const char* who)
{
    if (m < 0)
        throw std::invalid_argument(std::string(who) + ": m must be >= 0");
    if (!(r > 0.0) || !std::isfinite(r))
        throw std::invalid_argument(std::string(who) + ": r must be finite and > 0");
}

// Numerator quadrature of trig(m t) * weight(t) divided by a precomputed normalizer.
template <class W>
QuadResult quad_ratio(int m, TrigKind kind, const W& weight, const QuadLayout& lay, const QuadResult& norm,
                      const QuadratureSpec& spec)
{
    auto integrand = [&](double t) {
        const double trig = kind == TrigKind::cos ? std::cos(m * t) : std::sin(m * t);
        return trig * weight(t);
    };
    // Absolute tolerance scaled to the normalizer so the moment, not the raw integral, meets it.
    QuadratureSpec scaled = spec;
    scaled.abs_tol = spec.abs_tol * std::abs(norm.value);
    const auto num = quad_periodic(integrand, scaled, lay.offset, lay.breaks);

    QuadResult out;
    out.value = num.value / norm.value;
    out.error = num.error / std::abs(norm.value) + std::abs(out.value) * norm.error / std::abs(norm.value);
    out.subdivisions = num.subdivisions + norm.subdivisions;
    out.evaluations = num.evaluations + norm.evaluations;
    out.converged = num.converged && norm.converged;
    return out;
}

} // namespace detail

/// E[cos m theta | r] or E[sin m theta | r] by adaptive quadrature of the
/// unnormalized density, normalized by a second quadrature. The exponent's
/// maximum is subtracted before exponentiation; breakpoints are placed around
/// each peak at multiples of its curvature width.
inline QuadResult quad_moment(int m, TrigKind kind, const PolarParams& pp, double r,
                              const QuadratureSpec& spec = {})
{
    detail::require_quad_args(m, r, "quad_moment");
    const auto lay = detail::quad_layout(pp, r);
    auto weight = [&](double t) { return std::exp(polar_exponent(pp, t, r) - lay.gmax); };
    const auto norm = quad_periodic(weight, spec, lay.offset, lay.breaks);
    if (m == 0 && kind == TrigKind::cos) {
        QuadResult out = norm;
        out.value = 1.0;
        out.error = norm.error / std::abs(norm.value);
        return out;
    }
    return detail::quad_ratio(m, kind, weight, lay, norm, spec);
}

struct QuadMomentPair {
    QuadResult c;
    QuadResult s;
};

/// Cosine and sine moments of order m sharing one normalizer quadrature.
inline QuadMomentPair quad_moment_pair(int m, const PolarParams& pp, double r, const QuadratureSpec& spec = {})
{
    detail::require_quad_args(m, r, "quad_moment_pair");
    const auto lay = detail::quad_layout(pp, r);
    auto weight = [&](double t) { return std::exp(polar_exponent(pp, t, r) - lay.gmax); };
    const auto norm = quad_periodic(weight, spec, lay.offset, lay.breaks);
    return {detail::quad_ratio(m, TrigKind::cos, weight, lay, norm, spec),
            detail::quad_ratio(m, TrigKind::sin, weight, lay, norm, spec)};
}

/// Quadrature moments for orders 1..max_order. Throws std::runtime_error if any
/// integral fails to converge.
inline CircularMoments quad_moments(const PolarParams& pp, double r, int max_order,
                                    const QuadratureSpec& spec = {})
{
    detail::require_quad_args(max_order, r, "quad_moments");
    const auto lay = detail::quad_layout(pp, r);
    auto weight = [&](double t) { return std::exp(polar_exponent(pp, t, r) - lay.gmax); };
    const auto norm = quad_periodic(weight, spec, lay.offset, lay.breaks);
    CircularMoments out;
    out.r = r;
    out.n_terms = 0;
    for (int m = 1; m <= max_order; ++m) {
        const auto c = detail::quad_ratio(m, TrigKind::cos, weight, lay, norm, spec);
        const auto s = detail::quad_ratio(m, TrigKind::sin, weight, lay, norm, spec);
        if (!c.converged || !s.converged)
            throw std::runtime_error("quad_moments: quadrature did not converge");
        out.orders.push_back({c.value, s.value});
    }
    return out;
}

/// p(theta | r) normalized by quadrature; usable where the series normalizer is not.
inline double quad_azimuth_density(double theta, const PolarParams& pp, double r, const QuadratureSpec& spec = {})
{
    detail::require_quad_args(0, r, "quad_azimuth_density");
    const auto lay = detail::quad_layout(pp, r);
    auto weight = [&](double t) { return std::exp(polar_exponent(pp, t, r) - lay.gmax); };
    const auto norm = quad_periodic(weight, spec, lay.offset, lay.breaks);
    return weight(theta) / norm.value;
}

} // namespace rot
