// SPDX-License-Identifier: Apache-2.0

#include "rot/oracle.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace {

rot::PredictedMeasurement anisotropic_geometry()
{
    rot::PredictedMeasurement pm;
    pm.y_hat = {-11.0, 20.0};
    pm.V << 50.0, -10.0, -10.0, 50.0;
    return pm;
}

// Periodic trapezoid rule; converges geometrically for smooth periodic integrands.
template <class F>
double trapezoid(const F& f, int n)
{
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        sum += f(2.0 * std::numbers::pi * i / n);
    return sum * 2.0 * std::numbers::pi / n;
}

rot::PredictedMeasurement random_pm(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> pos(-100.0, 100.0), unit(0.0, 1.0);
    rot::PredictedMeasurement pm;
    pm.y_hat = {pos(rng), pos(rng)};
    const double lmin = 1.5 * pm.y_hat.squaredNorm() * std::pow(10.0, unit(rng));
    const double lmax = lmin * (1.0 + 49.0 * unit(rng));
    const double a = std::numbers::pi * unit(rng);
    Eigen::Matrix2d R;
    R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    pm.V = R * Eigen::Vector2d(lmin, lmax).asDiagonal() * R.transpose();
    pm.V = 0.5 * (pm.V + pm.V.transpose());
    return pm;
}

} // namespace

TEST(QuadMoment, ZerothOrderIsOne)
{
    const auto pp = rot::polar_params(anisotropic_geometry());
    const auto q = rot::quad_moment(0, rot::TrigKind::cos, pp, 23.0);
    EXPECT_NEAR(q.value, 1.0, 1e-10);
    EXPECT_TRUE(q.converged);
}

TEST(QuadMoment, UniformConfigGivesZero)
{
    rot::PredictedMeasurement pm;
    pm.V = 7.0 * Eigen::Matrix2d::Identity();
    const auto pp = rot::polar_params(pm);
    EXPECT_NEAR(rot::quad_moment(1, rot::TrigKind::cos, pp, 3.0).value, 0.0, 1e-14);
    EXPECT_NEAR(rot::quad_moment(1, rot::TrigKind::sin, pp, 3.0).value, 0.0, 1e-14);
}

TEST(QuadMoment, AnisotropicMatchesTrapezoid)
{
    const auto pp = rot::polar_params(anisotropic_geometry());
    const double r = 22.6;
    auto w = [&](double t) { return std::exp(rot::polar_exponent(pp, t, r)); };
    const double norm = trapezoid(w, 4096);
    for (int m : {1, 2, 3, 10}) {
        const double c = trapezoid([&](double t) { return std::cos(m * t) * w(t); }, 4096) / norm;
        const double s = trapezoid([&](double t) { return std::sin(m * t) * w(t); }, 4096) / norm;
        const auto q = rot::quad_moment_pair(m, pp, r);
        EXPECT_NEAR(q.c.value, c, 1e-12) << "m=" << m;
        EXPECT_NEAR(q.s.value, s, 1e-12) << "m=" << m;
        EXPECT_TRUE(q.c.converged && q.s.converged);
    }
}

TEST(QuadMoment, IsotropicCaseMatchesBesselRatio)
{
    // With V = s I the angular density is von Mises with concentration D r.
    for (double s : {40.0, 4.0, 0.5}) {
        rot::PredictedMeasurement pm;
        pm.y_hat = {-30.0, 40.0};
        pm.V = s * Eigen::Matrix2d::Identity();
        const auto pp = rot::polar_params(pm);
        const double r = 52.0;
        const double kappa = pp.D * r;
        const double mu = std::atan2(40.0, -30.0);
        for (int m : {1, 2, 5}) {
            const long double k = kappa;
            const double ratio = static_cast<double>(boost::math::cyl_bessel_i(m, k) / boost::math::cyl_bessel_i(0, k));
            const auto q = rot::quad_moment_pair(m, pp, r);
            EXPECT_NEAR(q.c.value, ratio * std::cos(m * mu), 1e-11) << "s=" << s << " m=" << m;
            EXPECT_NEAR(q.s.value, ratio * std::sin(m * mu), 1e-11) << "s=" << s << " m=" << m;
        }
    }
}

TEST(QuadMoment, TrackingScaleStaysFinite)
{
    // Concentration of order 1e6: exp of the raw exponent overflows.
    rot::PredictedMeasurement pm;
    const Eigen::Vector2d u(0.6, 0.8), t(-0.8, 0.6);
    pm.y_hat = 1e4 * u;
    pm.V = 100.0 * u * u.transpose() + 400.0 * t * t.transpose();
    const auto pp = rot::polar_params(pm);
    const double r = 1e4 - 5.0;
    const auto cm = rot::quad_moments(pp, r, 4);
    const double mu = std::atan2(0.8, 0.6);
    EXPECT_NEAR(cm[1].c, std::cos(mu), 1e-4);
    EXPECT_NEAR(cm[1].s, std::sin(mu), 1e-4);
    for (int m = 1; m <= 4; ++m)
        EXPECT_LE(cm[m].c * cm[m].c + cm[m].s * cm[m].s, 1.0 + 1e-12);
}

TEST(QuadMoment, HalvingTolerancesIsSelfConsistent)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const auto pm = random_pm(rng);
        const auto pp = rot::polar_params(pm);
        const double r = 2.0 * pm.y_hat.norm();
        rot::QuadratureSpec coarse{1e-8, 1e-8, 2000};
        rot::QuadratureSpec fine{5e-9, 5e-9, 2000};
        for (int m : {1, 3}) {
            const double a = rot::quad_moment(m, rot::TrigKind::cos, pp, r, coarse).value;
            const double b = rot::quad_moment(m, rot::TrigKind::cos, pp, r, fine).value;
            EXPECT_LT(std::abs(a - b), 1e-8);
        }
    }
}

TEST(QuadMoment, ConditionalDensityIntegratesToOne)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const auto pm = random_pm(rng);
        const auto pp = rot::polar_params(pm);
        const double r = 0.5 * pm.y_hat.norm() + 1.0;
        const auto q = rot::quad_periodic([&](double t) { return rot::conditional_azimuth_density(t, r, pp, 10); });
        EXPECT_NEAR(q.value, 1.0, 1e-8) << "config " << i;
        const auto qd = rot::quad_periodic([&](double t) { return rot::quad_azimuth_density(t, pp, r); });
        EXPECT_NEAR(qd.value, 1.0, 1e-10) << "config " << i;
    }
}

TEST(QuadMoment, PeaksAreLocalMaxima)
{
    rot::PredictedMeasurement pm;
    pm.y_hat = {-50.0, 20.0};
    pm.V = 250.0 * (Eigen::Matrix2d() << 7.0, 2.0, 2.0, 1.0).finished();
    const auto pp = rot::polar_params(pm);
    const double r = pm.y_hat.norm();
    const auto peaks = rot::detail::exponent_peaks(pp, r);
    ASSERT_EQ(peaks.size(), 2u);
    for (const auto& p : peaks) {
        const double g = rot::polar_exponent(pp, p.theta, r);
        EXPECT_GT(g, rot::polar_exponent(pp, p.theta + 1e-3, r));
        EXPECT_GT(g, rot::polar_exponent(pp, p.theta - 1e-3, r));
        EXPECT_GE(p.curvature, 0.0);
    }
}

TEST(QuadMoment, RejectsBadArguments)
{
    const auto pp = rot::polar_params(anisotropic_geometry());
    EXPECT_THROW(rot::quad_moment(-1, rot::TrigKind::cos, pp, 10.0), std::invalid_argument);
    EXPECT_THROW(rot::quad_moment(1, rot::TrigKind::cos, pp, 0.0), std::invalid_argument);
    EXPECT_THROW(rot::quad_moments(pp, std::nan(""), 3), std::invalid_argument);
}
