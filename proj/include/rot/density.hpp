// SPDX-License-Identifier: Apache-2.0
//
// Polar form of a 2D Gaussian position density. For y ~ N(y_hat, V) the joint
// density of (theta, r) is
//
//   kappa(r) * exp[ r |p,q| cos(theta - phi1) + A3 r^2 cos(2 theta + phi2) ]
//
// with [a b; b c] = V^-1 and [p q]^T = V^-1 y_hat. Shifting theta by phi2 / 2
// turns the exponent into r (A1 cos u + A2 sin u) + A3 r^2 cos 2u, which is the
// form the Bessel series below are written in.

#pragma once

#include "rot/special_functions.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rot {

struct PredictedMeasurement {
    Eigen::Vector2d y_hat = Eigen::Vector2d::Zero();
    Eigen::Matrix2d V = Eigen::Matrix2d::Identity();
};

struct PolarParams {
    double a = 0, b = 0, c = 0; // V^-1 entries, m^-2
    double p = 0, q = 0;        // V^-1 y_hat, m^-1
    double phi1 = 0;            // atan2(q, p)
    double A3 = 0;              // |(c - a)/4, b/2|, m^-2
    double phi2 = 0;            // atan2(b/2, (c - a)/4)
    double A1 = 0, A2 = 0;      // m^-1
    double D = 0;               // |A1, A2| == |p, q|
    double psi = 0;             // atan2(A2, A1)
    double yVy = 0;             // y_hat^T V^-1 y_hat
    double log_det_2pi_V = 0;   // ln |2 pi V|
};

namespace detail {

// Reduces an angle to (-pi, pi].
inline double wrap_pi(double angle)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    angle = std::remainder(angle, two_pi);
    if (angle <= -std::numbers::pi)
        angle += two_pi;
    return angle;
}

// atan2 that is defined as 0 where both arguments vanish.
inline double safe_atan2(double y, double x)
{
    if (y == 0.0 && x == 0.0)
        return 0.0;
    return wrap_pi(std::atan2(y, x));
}

} // namespace detail

inline PolarParams polar_params(const PredictedMeasurement& pm)
{
    const auto& V = pm.V;
    const double scale = V.cwiseAbs().maxCoeff();
    if (!V.allFinite() || !pm.y_hat.allFinite())
        throw std::invalid_argument("polar_params: non-finite input");
    if (std::abs(V(0, 1) - V(1, 0)) > 1e-12 * std::max(scale, 1.0))
        throw std::invalid_argument("polar_params: V is not symmetric");
    const double det = V(0, 0) * V(1, 1) - V(0, 1) * V(1, 0);
    if (!(V(0, 0) > 0.0) || !(V(1, 1) > 0.0) || !(det > 0.0)) {
        std::ostringstream msg;
        msg << "polar_params: V is not positive definite (V00=" << V(0, 0) << ", V11=" << V(1, 1)
            << ", det=" << det << ")";
        throw std::invalid_argument(msg.str());
    }

    PolarParams pp;
    pp.a = V(1, 1) / det;
    pp.b = -0.5 * (V(0, 1) + V(1, 0)) / det;
    pp.c = V(0, 0) / det;
    pp.p = pp.a * pm.y_hat.x() + pp.b * pm.y_hat.y();
    pp.q = pp.b * pm.y_hat.x() + pp.c * pm.y_hat.y();
    pp.phi1 = detail::safe_atan2(pp.q, pp.p);

    const double cos_part = 0.25 * (pp.c - pp.a);
    const double sin_part = 0.5 * pp.b;
    pp.A3 = std::hypot(cos_part, sin_part);
    pp.phi2 = detail::safe_atan2(sin_part, cos_part);

    const double norm_pq = std::hypot(pp.p, pp.q);
    pp.A1 = norm_pq * std::cos(0.5 * pp.phi2 + pp.phi1);
    pp.A2 = norm_pq * std::sin(0.5 * pp.phi2 + pp.phi1);
    pp.D = std::hypot(pp.A1, pp.A2);
    pp.psi = detail::safe_atan2(pp.A2, pp.A1);

    pp.yVy = pp.p * pm.y_hat.x() + pp.q * pm.y_hat.y();
    pp.log_det_2pi_V = std::log(4.0 * std::numbers::pi * std::numbers::pi * det);
    return pp;
}

/// theta-dependent exponent of the joint polar density.
inline double polar_exponent(const PolarParams& pp, double theta, double r)
{
    return r * pp.D * std::cos(theta - pp.phi1) + pp.A3 * r * r * std::cos(2.0 * theta + pp.phi2);
}

/// ln kappa(r); only the joint and range densities need it, the conditional
/// azimuth density does not.
inline double log_kappa(const PolarParams& pp, double r)
{
    return std::log(r) - 0.5 * pp.log_det_2pi_V - 0.5 * (0.5 * r * r * (pp.a + pp.c) + pp.yVy);
}

inline double joint_polar_density(double theta, double r, const PredictedMeasurement& pm)
{
    if (r < 0.0)
        throw std::invalid_argument("joint_polar_density: r must be >= 0");
    if (r == 0.0)
        return 0.0;
    const auto pp = polar_params(pm);
    return std::exp(log_kappa(pp, r) + polar_exponent(pp, theta, r));
}

/// ln Delta(r), where
/// Delta = 2 pi [I_0(A3 r^2) I_0(D r) + 2 sum_{k=1}^{n} I_k(A3 r^2) I_{2k}(D r) cos(2 k psi)]
/// is the integral of exp(polar_exponent) over one period. The leading product
/// is factored out so the bracket stays O(1). Throws std::domain_error if the
/// truncated bracket is not positive.
inline double log_angular_normalizer(const PolarParams& pp, double r, int n_terms)
{
    if (n_terms < 0)
        throw std::invalid_argument("log_angular_normalizer: n_terms must be >= 0");
    const double x = pp.A3 * r * r;
    const double y = pp.D * r;
    const auto rx = exact_bessel_ratio_table(n_terms, x);
    const auto ry = exact_bessel_ratio_table(2 * n_terms, y);
    double bracket = 1.0;
    for (int k = 1; k <= n_terms; ++k)
        bracket += 2.0 * rx[k] * ry[2 * k] * std::cos(2.0 * k * pp.psi);
    if (!(bracket > 0.0))
        throw std::domain_error("log_angular_normalizer: truncated series is not positive");
    return std::log(2.0 * std::numbers::pi) + log_bessel_i(0, x) + log_bessel_i(0, y) +
           std::log(bracket);
}

inline double range_density(double r, const PredictedMeasurement& pm, int n_terms = 5)
{
    if (r < 0.0)
        throw std::invalid_argument("range_density: r must be >= 0");
    if (n_terms < 1)
        throw std::invalid_argument("range_density: n_terms must be >= 1");
    if (r == 0.0)
        return 0.0;
    const auto pp = polar_params(pm);
    return std::exp(log_kappa(pp, r) + log_angular_normalizer(pp, r, n_terms));
}

inline double conditional_azimuth_density(double theta, double r, const PolarParams& pp,
                                          int n_terms = 5)
{
    if (!(r > 0.0))
        throw std::invalid_argument("conditional_azimuth_density: r must be > 0");
    if (n_terms < 1)
        throw std::invalid_argument("conditional_azimuth_density: n_terms must be >= 1");
    return std::exp(polar_exponent(pp, theta, r) - log_angular_normalizer(pp, r, n_terms));
}

inline double conditional_azimuth_density(double theta, double r, const PredictedMeasurement& pm,
                                          int n_terms = 5)
{
    return conditional_azimuth_density(theta, r, polar_params(pm), n_terms);
}

/// Rice density of |y| for y ~ N(true_range * u, sigma_r^2 I), |u| = 1.
inline double rice_range_density(double r, double true_range, double sigma_r)
{
    if (r < 0.0)
        throw std::invalid_argument("rice_range_density: r must be >= 0");
    if (!(sigma_r > 0.0))
        throw std::invalid_argument("rice_range_density: sigma_r must be > 0");
    if (r == 0.0)
        return 0.0;
    const double s2 = sigma_r * sigma_r;
    const double z = r * true_range / s2;
    // exp(-(r^2 + rho^2) / 2s^2) I_0(z) = exp(-(r - rho)^2 / 2s^2) * exp(ln I_0(z) - z)
    const double log_value = std::log(r / s2) - 0.5 * (r - true_range) * (r - true_range) / s2 +
                             (log_bessel_i(0, z) - z);
    return std::exp(log_value);
}

/// Probability that r_true + N(0, sigma_r^2) is negative.
inline double negative_range_probability(double true_range, double sigma_r)
{
    if (!(sigma_r > 0.0))
        throw std::invalid_argument("negative_range_probability: sigma_r must be > 0");
    return 0.5 * std::erfc(true_range / (sigma_r * std::numbers::sqrt2));
}

/// One-row CSV dump of the parameter set, header line included.
inline std::string polar_params_csv(const PolarParams& pp)
{
    std::ostringstream out;
    out.precision(17);
    out << "a,b,c,p,q,phi1,A3,phi2,A1,A2,D,psi\n"
        << pp.a << ',' << pp.b << ',' << pp.c << ',' << pp.p << ',' << pp.q << ',' << pp.phi1
        << ',' << pp.A3 << ',' << pp.phi2 << ',' << pp.A1 << ',' << pp.A2 << ',' << pp.D << ','
        << pp.psi << '\n';
    return out.str();
}

} // namespace rot
