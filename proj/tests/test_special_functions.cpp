// SPDX-License-Identifier: Apache-2.0

#include "rot/special_functions.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include <cmath>

using rot::bessel_i;
using rot::bessel_ratio;
using rot::log_bessel_i;

namespace {

// Reference I_n(x) in long double; its range covers e^11356, enough for x = 1e4.
long double ref_i(int n, long double x)
{
    return boost::math::cyl_bessel_i(static_cast<long double>(n), x);
}

} // namespace

TEST(BesselI, ValuesAtZero)
{
    EXPECT_EQ(bessel_i(0, 0.0), 1.0);
    EXPECT_EQ(bessel_i(1, 0.0), 0.0);
    EXPECT_EQ(log_bessel_i(0, 0.0), 0.0);
}

TEST(BesselI, OrderZeroAtTwoMatchesPowerSeries)
{
    // sum (x/2)^{2k} / (k!)^2 at x = 2, summed independently here.
    long double sum = 0.0L, term = 1.0L;
    for (int k = 0; k < 60; ++k) {
        sum += term;
        term /= static_cast<long double>((k + 1) * (k + 1));
    }
    EXPECT_NEAR(bessel_i(0, 2.0), static_cast<double>(sum), 1e-15 * static_cast<double>(sum));
}

TEST(BesselI, TwelveDigitsAgainstReferenceInDirectRange)
{
    for (int n : {0, 1, 2, 5, 10, 25}) {
        for (double x : {1e-3, 0.1, 0.5, 1.0, 3.7, 10.0, 19.9, 20.0}) {
            const double expected = static_cast<double>(ref_i(n, x));
            if (expected == 0.0)
                continue;
            EXPECT_NEAR(bessel_i(n, x) / expected, 1.0, 1e-12) << "n=" << n << " x=" << x;
        }
    }
}

TEST(BesselI, LargeArgumentsAgainstReference)
{
    for (int n : {0, 1, 3, 10, 40}) {
        for (double x : {25.0, 60.0, 150.0, 500.0, 700.0}) {
            const double expected = static_cast<double>(std::log(ref_i(n, x)));
            EXPECT_NEAR(log_bessel_i(n, x), expected, 1e-12 * std::abs(expected)) << "n=" << n << " x=" << x;
        }
    }
}

TEST(BesselI, MonotoneInArgument)
{
    for (int n : {0, 1, 4}) {
        double prev = bessel_i(n, 0.0);
        for (double x = 0.05; x < 200.0; x *= 1.3) {
            const double v = bessel_i(n, x);
            EXPECT_GE(v, prev) << "n=" << n << " x=" << x;
            prev = v;
        }
    }
}

TEST(BesselI, OverflowSignalsLogDomain)
{
    EXPECT_THROW(bessel_i(0, 1000.0), std::overflow_error);
    EXPECT_TRUE(std::isfinite(log_bessel_i(0, 1000.0)));
}

TEST(LogBesselI, FiniteWhereDirectOverflows)
{
    const double v = log_bessel_i(0, 700.0);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(v, static_cast<double>(std::log(ref_i(0, 700.0L))), 1e-12 * v);
    EXPECT_TRUE(std::isfinite(log_bessel_i(3, 1e6)));
}

TEST(LogBesselI, MatchesDirectEvaluation)
{
    EXPECT_NEAR(log_bessel_i(2, 50.0), std::log(bessel_i(2, 50.0)), 1e-10 * std::abs(log_bessel_i(2, 50.0)));
}

TEST(LogBesselI, RejectsNegativeArgument)
{
    EXPECT_THROW(log_bessel_i(0, -1.0), std::invalid_argument);
    EXPECT_THROW(log_bessel_i(0, std::nan("")), std::invalid_argument);
}

TEST(BesselRatio, TrivialCases)
{
    EXPECT_EQ(bessel_ratio(0, 3.0), 1.0);
    EXPECT_EQ(bessel_ratio(0, 1e9), 1.0);
    EXPECT_DOUBLE_EQ(bessel_ratio(2, 1e6), std::exp(-2e-6));
}

TEST(BesselRatio, OrderThreeAtTenThousand)
{
    const double exact = std::exp(log_bessel_i(3, 1e4) - log_bessel_i(0, 1e4));
    EXPECT_NEAR(bessel_ratio(3, 1e4) / exact, 1.0, 1e-5);
    const double ref = static_cast<double>(ref_i(3, 1e4L) / ref_i(0, 1e4L));
    // Difference of two logs near 1e4: about 1e4 * eps absolute.
    EXPECT_NEAR(exact / ref, 1.0, 1e-11);
}

TEST(BesselRatio, RelativeErrorBelowOneInTenThousandAtThreshold100)
{
    for (int N = 1; N <= 12; ++N) {
        for (double factor : {100.0, 150.0, 400.0, 1e3, 1e5}) {
            const double x = factor * N * N;
            const double exact = std::exp(rot::log_bessel_ratios(N, x).back());
            EXPECT_LT(std::abs(bessel_ratio(N, x) / exact - 1.0), 1e-4) << "N=" << N << " x=" << x;
        }
    }
}

TEST(BesselRatioTable, DefaultRegimeStaysExactBelowThreshold)
{
    const auto table = rot::bessel_ratio_table(6, 50.0);
    const auto exact = rot::exact_bessel_ratio_table(6, 50.0);
    for (int n = 0; n <= 6; ++n)
        EXPECT_DOUBLE_EQ(table[n], exact[n]);
}

TEST(BesselRatioTable, ApproximationUsedOnlyInsideRegime)
{
    rot::BesselRegime regime;
    regime.threshold_ratio_validity = 100.0;
    const double x = 1e4; // approximation valid for n <= 10
    const auto table = rot::bessel_ratio_table(15, x, regime);
    const auto exact = rot::exact_bessel_ratio_table(15, x);
    for (int n = 1; n <= 10; ++n)
        EXPECT_DOUBLE_EQ(table[n], bessel_ratio(n, x));
    for (int n = 11; n <= 15; ++n)
        EXPECT_DOUBLE_EQ(table[n], exact[n]);
}

TEST(BesselRegime, Validation)
{
    rot::BesselRegime bad;
    bad.threshold_ratio_validity = 5.0;
    EXPECT_THROW(rot::validate(bad), std::invalid_argument);
    bad = {};
    bad.threshold_direct = 0.0;
    EXPECT_THROW(rot::validate(bad), std::invalid_argument);
    EXPECT_NO_THROW(rot::validate(rot::BesselRegime{}));
}

TEST(BesselProperties, NonNegativeAndOrderMonotone)
{
    for (double x : {0.01, 0.7, 3.0, 17.0, 80.0, 240.0, 500.0}) {
        double prev = bessel_i(0, x);
        for (int n = 1; n <= 50; ++n) {
            const double v = bessel_i(n, x);
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, prev) << "n=" << n << " x=" << x;
            prev = v;
        }
    }
}

TEST(BesselProperties, RecurrenceResidual)
{
    for (double x : {0.1, 0.4, 1.0, 2.5, 7.0, 15.0, 33.0, 64.0, 100.0}) {
        for (int n = 1; n <= 30; ++n) {
            const double lo = bessel_i(n - 1, x);
            const double mid = bessel_i(n, x);
            const double hi = bessel_i(n + 1, x);
            EXPECT_LT(std::abs(lo - hi - (2.0 * n / x) * mid), 1e-9 * lo) << "n=" << n << " x=" << x;
        }
    }
}

TEST(LogBesselRatios, MatchReferenceAcrossScales)
{
    for (double x : {0.3, 5.0, 80.0, 2e3, 1e4}) {
        const auto logs = rot::log_bessel_ratios(20, x);
        for (int n = 1; n <= 20; ++n) {
            const long double ref = std::log(ref_i(n, x) / ref_i(0, x));
            EXPECT_NEAR(logs[n], static_cast<double>(ref), 1e-12 * (1.0 + std::abs(static_cast<double>(ref))))
                << "n=" << n << " x=" << x;
        }
    }
}
