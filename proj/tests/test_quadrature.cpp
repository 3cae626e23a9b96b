// SPDX-License-Identifier: Apache-2.0

#include "rot/quadrature.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

TEST(QuadPeriodic, Constant)
{
    const auto res = rot::quad_periodic([](double) { return 1.0; });
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.value, 2.0 * std::numbers::pi, 1e-14);
}

TEST(QuadPeriodic, CosineIntegratesToZero)
{
    const rot::QuadratureSpec spec;
    const auto res = rot::quad_periodic([](double t) { return std::cos(t); }, spec);
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.value, 0.0, spec.abs_tol);
}

TEST(QuadPeriodic, ExpCosMatchesBessel)
{
    const auto res = rot::quad_periodic([](double t) { return std::exp(2.0 * std::cos(t)); });
    const double expected = 2.0 * std::numbers::pi * boost::math::cyl_bessel_i(0, 2.0);
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.value, expected, 1e-10 * expected);
    EXPECT_LE(res.error, std::max(1e-12, 1e-10 * std::abs(res.value)));
}

TEST(Integrate, NarrowPeakFoundThroughBreakpoints)
{
    const double w = 1e-4;
    auto f = [&](double t) { return std::exp(-0.5 * (t - 1.0) * (t - 1.0) / (w * w)); };
    const auto res = rot::integrate(f, -3.0, 3.0, {}, {1.0 - 10 * w, 1.0, 1.0 + 10 * w});
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.value, w * std::sqrt(2.0 * std::numbers::pi), 1e-12);
}

TEST(Integrate, ExhaustedBudgetReportsBestEstimate)
{
    rot::QuadratureSpec spec;
    spec.max_subdivisions = 10;
    spec.abs_tol = 1e-15;
    spec.rel_tol = 1e-15;
    const auto res = rot::integrate([](double t) { return std::sqrt(std::abs(t)); }, -1.0, 1.0, spec);
    EXPECT_FALSE(res.converged);
    EXPECT_NEAR(res.value, 4.0 / 3.0, 1e-3);
    EXPECT_GT(res.error, 0.0);
}

TEST(QuadratureSpec, Validation)
{
    rot::QuadratureSpec bad;
    bad.abs_tol = 0.0;
    EXPECT_THROW(rot::validate(bad), std::invalid_argument);
    bad = {};
    bad.max_subdivisions = 5;
    EXPECT_THROW(rot::validate(bad), std::invalid_argument);
}
