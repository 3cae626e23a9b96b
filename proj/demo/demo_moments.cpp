// Circular moments of the azimuth given a range measurement: series at a few
// truncation orders next to the quadrature value.

#include "rot/moments.hpp"
#include "rot/oracle.hpp"

#include <cmath>
#include <cstdio>

int main()
{
    rot::PredictedMeasurement pm;
    pm.y_hat = {-11.0, 20.0};
    pm.V << 50.0, -10.0, -10.0, 50.0;
    const auto pp = rot::polar_params(pm);
    const double r = 24.0;

    std::printf("y_hat = (%.0f, %.0f), r = %.1f\n", pm.y_hat.x(), pm.y_hat.y(), r);
    std::printf("%3s %22s %12s %12s %12s\n", "m", "quadrature E[cos m t]", "N=2", "N=5", "N=10");
    for (int m : {1, 2, 3, 10}) {
        const double q = rot::quad_moment_pair(m, pp, r).c.value;
        std::printf("%3d %22.15f", m, q);
        for (int n : {2, 5, 10})
            std::printf(" %12.2e", std::abs(rot::gen_cos(m, pp, r, n) - q));
        std::printf("\n");
    }

    const auto cm = rot::circular_moments(pp, r, 2, 10);
    const Eigen::Vector2d mean = rot::bearing_mean(cm);
    const Eigen::Matrix2d cov = rot::bearing_covariance(cm);
    std::printf("E[(cos, sin)] = (%.6f, %.6f)\n", mean.x(), mean.y());
    std::printf("Cov = [[%.6f, %.6f], [%.6f, %.6f]]\n", cov(0, 0), cov(0, 1), cov(1, 0), cov(1, 1));
}
