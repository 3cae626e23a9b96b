// SPDX-License-Identifier: Apache-2.0
//
// Adaptive Gauss-Kronrod (7/15) quadrature. Intervals are kept in a max-heap
// keyed on their error estimate and the worst one is bisected until the global
// estimate meets max(abs_tol, rel_tol * |result|). Error scaling follows QUADPACK's
// QK15.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <vector>

namespace rot {

struct QuadratureSpec {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_subdivisions = 2000;
};

inline void validate(const QuadratureSpec& spec)
{
    if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0))
        throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
    if (spec.max_subdivisions < 10)
        throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 10");
}

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
    int evaluations = 0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod_15(const F& f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_center = f(center);
    double res_g = f_center * kWg[3];
    double res_k = f_center * kWgk[7];
    double res_abs = std::abs(res_k);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double pair = f1[j] + f2[j];
        res_k += kWgk[j] * pair;
        res_abs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1)
            res_g += kWg[j / 2] * pair;
    }
    const double mean = 0.5 * res_k;
    double res_asc = kWgk[7] * std::abs(f_center - mean);
    for (int j = 0; j < 7; ++j)
        res_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

    const double scale = std::abs(half);
    double err = std::abs((res_k - res_g) * half);
    res_asc *= scale;
    res_abs *= scale;
    if (res_asc != 0.0 && err != 0.0)
        err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * res_abs, err);
    return {a, b, res_k * half, err};
}

} // namespace detail

/// Integrates f over [a, b]. `breakpoints` inside (a, b) seed the initial
/// partition, which is how narrow peaks are made visible to the first panels.
template <class F>
QuadResult integrate(const F& f, double a, double b, const QuadratureSpec& spec = {},
                     std::vector<double> breakpoints = {})
{
    validate(spec);
    std::vector<double> edges{a};
    std::sort(breakpoints.begin(), breakpoints.end());
    for (double p : breakpoints)
        if (p > edges.back() && p < b)
            edges.push_back(p);
    edges.push_back(b);

    std::priority_queue<detail::Panel> heap;
    double total = 0.0;
    double total_err = 0.0;
    QuadResult out;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        auto p = detail::gauss_kronrod_15(f, edges[i], edges[i + 1]);
        total += p.value;
        total_err += p.error;
        heap.push(p);
        out.evaluations += 15;
    }
    out.subdivisions = static_cast<int>(heap.size());

    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (out.subdivisions >= spec.max_subdivisions) {
            out.value = total;
            out.error = total_err;
            out.converged = false;
            return out;
        }
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        out.evaluations += 30;
        ++out.subdivisions;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally so cancellation in the running totals does not drift.
        if (out.subdivisions % 64 == 0) {
            auto copy = heap;
            total = 0.0;
            total_err = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                total_err += copy.top().error;
                copy.pop();
            }
        }
    }
    out.value = total;
    out.error = total_err;
    out.converged = true;
    return out;
}

/// Integral of f over one period [offset, offset + 2 pi).
template <class F>
QuadResult quad_periodic(const F& f, const QuadratureSpec& spec = {}, double offset = 0.0,
                         std::vector<double> breakpoints = {})
{
    return integrate(f, offset, offset + 2.0 * std::numbers::pi, spec, std::move(breakpoints));
}

} // namespace rot
