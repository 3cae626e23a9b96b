// One range update of a prior with a wide cross-range spread: the proposed
// mixture update next to EKF and UKF.

#include "rot/filter.hpp"

#include <cmath>
#include <cstdio>

namespace {

void print(const char* name, const rot::GaussianState& s)
{
    std::printf("%-9s pos (%8.2f, %8.2f)  vel (%6.2f, %6.2f)  pos std (%7.2f, %7.2f)\n", name, s.mean(0),
                s.mean(1), s.mean(2), s.mean(3), std::sqrt(s.cov(0, 0)), std::sqrt(s.cov(1, 1)));
}

} // namespace

int main()
{
    rot::GaussianState pred;
    pred.mean << 300.0, 400.0, -2.0, 1.0;
    const Eigen::Vector2d u(0.6, 0.8), t(-0.8, 0.6);
    pred.cov.setZero();
    pred.cov.topLeftCorner<2, 2>() = 400.0 * u * u.transpose() + 2.5e4 * t * t.transpose();
    pred.cov.bottomRightCorner<2, 2>() = 4.0 * Eigen::Matrix2d::Identity();
    const double r = 470.0;

    rot::ProposedConfig cfg;
    cfg.sigma_r = 10.0;
    const auto res = rot::proposed_update(pred, r, cfg);

    std::printf("range %.1f m, predicted range %.1f m\n", r, pred.mean.head<2>().norm());
    print("predicted", pred);
    print("proposed", res.collapsed);
    print("ekf", rot::ekf_update(pred, r, cfg.sigma_r));
    print("ukf", rot::ukf_update(pred, r, cfg.sigma_r));
    std::printf("moments from %s, fit residual %.2e\n",
                res.source == rot::MomentSource::series ? "series" : "quadrature", res.fit.residual_norm);
    std::printf("%3s %8s %9s %9s %9s\n", "l", "weight", "angle", "x", "y");
    for (int l = 0; l < res.dirac.size(); ++l) {
        const auto& c = res.mixture.components[l];
        std::printf("%3d %8.4f %9.4f %9.2f %9.2f\n", l + 1, c.weight, res.dirac.angles[l], c.state.mean(0),
                    c.state.mean(1));
    }
}
