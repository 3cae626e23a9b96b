// SPDX-License-Identifier: Apache-2.0
//
// Range-only tracking filters on the relative state x = (x, y, vx, vy): the
// Gaussian-mixture update driven by wrapped Dirac azimuth samples, EKF and UKF
// baselines, and the posterior CRLB recursion.

#pragma once

#include "rot/density.hpp"
#include "rot/moments.hpp"
#include "rot/oracle.hpp"
#include "rot/sampling.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rot {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Mat24 = Eigen::Matrix<double, 2, 4>;
using Mat42 = Eigen::Matrix<double, 4, 2>;

struct GaussianState {
    Vec4 mean = Vec4::Zero();
    Mat4 cov = Mat4::Identity();
};

struct MixtureComponent {
    double weight = 0.0;
    GaussianState state;
};

struct MixtureState {
    std::vector<MixtureComponent> components;
};

struct MotionModel {
    Mat4 F = Mat4::Identity();
    Mat4 Q = Mat4::Zero();
    double T = 0.0;
    double q_tilde = 0.0;
};

/// Nearly-constant-velocity model with white acceleration of intensity q_tilde.
inline MotionModel ncv_model(double T, double q_tilde)
{
    if (!(T > 0.0))
        throw std::invalid_argument("ncv_model: T must be > 0");
    if (!(q_tilde >= 0.0))
        throw std::invalid_argument("ncv_model: q_tilde must be >= 0");
    MotionModel mm;
    mm.T = T;
    mm.q_tilde = q_tilde;
    mm.F.topRightCorner<2, 2>() = T * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    mm.Q.topLeftCorner<2, 2>() = (T * T * T / 3.0) * q_tilde * I;
    mm.Q.topRightCorner<2, 2>() = (T * T / 2.0) * q_tilde * I;
    mm.Q.bottomLeftCorner<2, 2>() = (T * T / 2.0) * q_tilde * I;
    mm.Q.bottomRightCorner<2, 2>() = T * q_tilde * I;
    return mm;
}

inline Mat24 position_selector()
{
    Mat24 H = Mat24::Zero();
    H(0, 0) = 1.0;
    H(1, 1) = 1.0;
    return H;
}

/// Symmetrizes and floors eigenvalues at zero. Throws if an eigenvalue is below
/// -1e-9 * trace, which indicates a genuinely indefinite matrix.
inline Mat4 clamp_psd(const Mat4& P)
{
    const Mat4 S = 0.5 * (P + P.transpose());
    Eigen::SelfAdjointEigenSolver<Mat4> eig(S);
    const double tol = 1e-9 * std::max(std::abs(S.trace()), std::numeric_limits<double>::min());
    Vec4 lam = eig.eigenvalues();
    if (lam.minCoeff() < -tol)
        throw std::domain_error("clamp_psd: covariance is indefinite");
    if (lam.minCoeff() >= 0.0)
        return S;
    lam = lam.cwiseMax(0.0);
    Mat4 out = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

inline GaussianState predict(const GaussianState& prior, const MotionModel& model,
                             const Vec4& observer_prev, const Vec4& observer_now)
{
    GaussianState out;
    out.mean = model.F * prior.mean + model.F * observer_prev - observer_now;
    out.cov = model.F * prior.cov * model.F.transpose() + model.Q;
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

struct KalmanGain {
    Mat42 K;
    Eigen::Matrix2d V;
};

inline KalmanGain kalman_gain(const GaussianState& pred, const Mat24& H, const Eigen::Matrix2d& R)
{
    KalmanGain out;
    out.V = H * pred.cov * H.transpose() + R;
    out.V = 0.5 * (out.V + out.V.transpose());
    Eigen::LDLT<Eigen::Matrix2d> ldlt(out.V);
    const double det = out.V.determinant();
    if (ldlt.info() != Eigen::Success || !(det > 1e-300) || !std::isfinite(det))
        throw std::domain_error("kalman_gain: innovation covariance is singular");
    out.K = (ldlt.solve(H * pred.cov)).transpose();
    return out;
}

/// Linear Kalman update with a direct position measurement z.
inline GaussianState linear_position_update(const GaussianState& pred, const Eigen::Vector2d& z,
                                            const Eigen::Matrix2d& R)
{
    const Mat24 H = position_selector();
    const auto g = kalman_gain(pred, H, R);
    GaussianState out;
    out.mean = pred.mean + g.K * (z - H * pred.mean);
    out.cov = (Mat4::Identity() - g.K * H) * pred.cov;
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

/// Mean and covariance of a Gaussian mixture (within-component plus spread of means).
inline GaussianState collapse(const MixtureState& mix)
{
    GaussianState out;
    out.mean.setZero();
    out.cov.setZero();
    for (const auto& c : mix.components)
        out.mean += c.weight * c.state.mean;
    for (const auto& c : mix.components) {
        const Vec4 d = c.state.mean - out.mean;
        out.cov += c.weight * (c.state.cov + d * d.transpose());
    }
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

/// Components x_l = (I - K H) x + r K (cos t_l, sin t_l) with the shared covariance
/// (I - K H) P + r^2 K P_b K^T, weighted by the Dirac weights.
inline MixtureState mixture_from_dirac(const GaussianState& pred, double r, const KalmanGain& gain,
                                       const WrappedDirac& dirac, const Eigen::Matrix2d& P_b)
{
    const Mat24 H = position_selector();
    const Mat4 IKH = Mat4::Identity() - gain.K * H;
    const Vec4 base = IKH * pred.mean;
    Mat4 shared = IKH * pred.cov + r * r * gain.K * P_b * gain.K.transpose();
    shared = 0.5 * (shared + shared.transpose());

    double total = 0.0;
    for (double w : dirac.weights)
        total += w;
    if (!(total > 0.0))
        throw std::invalid_argument("mixture_from_dirac: weights sum to zero");
    MixtureState mix;
    for (int l = 0; l < dirac.size(); ++l) {
        MixtureComponent c;
        c.weight = dirac.weights[l] / total;
        const Eigen::Vector2d b(std::cos(dirac.angles[l]), std::sin(dirac.angles[l]));
        c.state.mean = base + r * gain.K * b;
        c.state.cov = shared;
        mix.components.push_back(c);
    }
    return mix;
}

enum class MomentSource { series, quadrature };

/// How the proposed update obtains circular moments.
///   series_fixed: stabilized series with exactly n_terms terms.
///   automatic: series with n_terms grown until converged, switching to
///     quadrature when the series is ill-conditioned (condition * eps too large).
///   quadrature: always the adaptive-quadrature oracle.
enum class MomentMethod { series_fixed, automatic, quadrature };

struct ProposedConfig {
    double sigma_r = 10.0;
    int n_terms = 5;
    int max_order = 10;
    int components = 8;
    std::uint64_t seed = 0;
    MomentMethod method = MomentMethod::automatic;
    double max_condition = 1e5;
    FitConfig fit{};
    BesselRegime regime{};
    QuadratureSpec quad{};
};

struct ProposedResult {
    MixtureState mixture;
    GaussianState collapsed;
    WrappedDirac dirac;
    FitReport fit;
    CircularMoments moments;
    Eigen::Matrix2d P_b = Eigen::Matrix2d::Zero();
    MomentSource source = MomentSource::series;
    bool used_baseline = false;
};

inline CircularMoments update_moments(const PolarParams& pp, double r, const ProposedConfig& cfg,
                                      MomentSource* source)
{
    switch (cfg.method) {
    case MomentMethod::series_fixed:
        *source = MomentSource::series;
        return circular_moments(pp, r, cfg.max_order, cfg.n_terms, cfg.regime);
    case MomentMethod::quadrature:
        *source = MomentSource::quadrature;
        return quad_moments(pp, r, cfg.max_order, cfg.quad);
    case MomentMethod::automatic:
        break;
    }
    try {
        auto sm = converged_series_moments(pp, r, cfg.max_order, cfg.n_terms, 1e-14, 256, cfg.regime);
        if (sm.condition <= cfg.max_condition && sm.tail <= 1e-12) {
            *source = MomentSource::series;
            return sm.moments;
        }
    } catch (const std::domain_error&) {
    }
    *source = MomentSource::quadrature;
    return quad_moments(pp, r, cfg.max_order, cfg.quad);
}

inline ProposedResult proposed_update(const GaussianState& pred, double r, const ProposedConfig& cfg)
{
    if (!(r > 0.0) || !std::isfinite(r))
        throw std::invalid_argument("proposed_update: r must be finite and > 0");
    if (!(cfg.sigma_r > 0.0))
        throw std::invalid_argument("proposed_update: sigma_r must be > 0");
    if (cfg.max_order < 2 || cfg.components < 1 || cfg.n_terms < 1)
        throw std::invalid_argument("proposed_update: needs max_order >= 2, components >= 1, n_terms >= 1");

    const Mat24 H = position_selector();
    const Eigen::Matrix2d R = cfg.sigma_r * cfg.sigma_r * Eigen::Matrix2d::Identity();
    const auto gain = kalman_gain(pred, H, R);
    const PredictedMeasurement pm{H * pred.mean, gain.V};
    const auto pp = polar_params(pm);

    ProposedResult out;
    out.moments = update_moments(pp, r, cfg, &out.source);
    out.P_b = bearing_covariance(out.moments);

    FitConfig fit_cfg = cfg.fit;
    fit_cfg.seed = cfg.seed;
    auto [dirac, report] = fit_wrapped_dirac(out.moments, cfg.components, fit_cfg);
    out.fit = report;
    out.dirac = std::move(dirac);
    if (!report.converged) {
        // An unfinished fit is still kept when it beats the baseline.
        auto baseline = symmetric_sampling_baseline(out.moments, cfg.components);
        if (moment_residual(baseline, out.moments) < report.residual_norm) {
            out.dirac = std::move(baseline);
            out.used_baseline = true;
        }
    }

    out.mixture = mixture_from_dirac(pred, r, gain, out.dirac, out.P_b);
    out.collapsed = collapse(out.mixture);
    out.collapsed.cov = clamp_psd(out.collapsed.cov);
    return out;
}

/// First-order update with h(x) = |position|. A predicted position at the
/// origin has no range Jacobian; the prediction is returned unchanged.
inline GaussianState ekf_update(const GaussianState& pred, double r, double sigma_r)
{
    if (!(sigma_r > 0.0))
        throw std::invalid_argument("ekf_update: sigma_r must be > 0");
    const double rho = pred.mean.head<2>().norm();
    if (!(rho > 0.0))
        return pred;
    Eigen::RowVector4d Hj = Eigen::RowVector4d::Zero();
    Hj(0) = pred.mean(0) / rho;
    Hj(1) = pred.mean(1) / rho;
    const double S = (Hj * pred.cov * Hj.transpose())(0, 0) + sigma_r * sigma_r;
    const Vec4 K = pred.cov * Hj.transpose() / S;
    GaussianState out;
    out.mean = pred.mean + K * (r - rho);
    // Joseph form keeps the result symmetric PSD.
    const Mat4 A = Mat4::Identity() - K * Hj;
    out.cov = A * pred.cov * A.transpose() + sigma_r * sigma_r * K * K.transpose();
    out.cov = clamp_psd(out.cov);
    return out;
}

struct UkfParams {
    double alpha = 1e-3;
    double beta = 2.0;
    double kappa = 0.0;
};

/// Unscented update for a measurement z = h(x) + v, v ~ N(0, R).
template <class Measurement>
GaussianState unscented_update(const GaussianState& pred, const Eigen::VectorXd& z,
                               const Measurement& h, const Eigen::MatrixXd& R, const UkfParams& params = {})
{
    constexpr int n = 4;
    const double lambda = params.alpha * params.alpha * (n + params.kappa) - n;
    const double spread = n + lambda;
    if (!(spread > 0.0))
        throw std::invalid_argument("unscented_update: alpha^2 (n + kappa) must be > 0");

    Eigen::LLT<Mat4> llt(spread * pred.cov);
    if (llt.info() != Eigen::Success) {
        llt.compute(spread * (pred.cov + 1e-9 * Mat4::Identity()));
        if (llt.info() != Eigen::Success)
            throw std::domain_error("unscented_update: covariance is not positive definite");
    }
    const Mat4 S = llt.matrixL();

    std::vector<Vec4> chi(2 * n + 1, pred.mean);
    for (int i = 0; i < n; ++i) {
        chi[1 + i] = pred.mean + S.col(i);
        chi[1 + n + i] = pred.mean - S.col(i);
    }
    const double wm0 = lambda / spread;
    const double wc0 = wm0 + 1.0 - params.alpha * params.alpha + params.beta;
    const double wi = 0.5 / spread;

    std::vector<Eigen::VectorXd> zeta;
    zeta.reserve(chi.size());
    for (const auto& c : chi)
        zeta.push_back(h(c));
    const auto dim = zeta.front().size();

    // Weighted mean as offsets from the centre point to limit cancellation.
    Eigen::VectorXd z_hat = zeta[0];
    for (std::size_t i = 1; i < zeta.size(); ++i)
        z_hat += wi * (zeta[i] - zeta[0]);

    Eigen::MatrixXd Pzz = R;
    Eigen::MatrixXd Pxz = Eigen::MatrixXd::Zero(n, dim);
    for (std::size_t i = 0; i < zeta.size(); ++i) {
        const double w = i == 0 ? wc0 : wi;
        const Eigen::VectorXd dz = zeta[i] - z_hat;
        Pzz += w * dz * dz.transpose();
        Pxz += w * (chi[i] - pred.mean) * dz.transpose();
    }
    Pzz = 0.5 * (Pzz + Pzz.transpose());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Pzz);
    if (ldlt.info() != Eigen::Success)
        throw std::domain_error("unscented_update: innovation covariance is singular");
    const Eigen::MatrixXd K = ldlt.solve(Pxz.transpose()).transpose();

    GaussianState out;
    out.mean = pred.mean + K * (z - z_hat);
    out.cov = clamp_psd(pred.cov - K * Pzz * K.transpose());
    return out;
}

inline GaussianState ukf_update(const GaussianState& pred, double r, double sigma_r, const UkfParams& params = {})
{
    if (!(sigma_r > 0.0))
        throw std::invalid_argument("ukf_update: sigma_r must be > 0");
    auto h = [](const Vec4& x) {
        Eigen::VectorXd z(1);
        z(0) = x.head<2>().norm();
        return z;
    };
    Eigen::VectorXd z(1);
    z(0) = r;
    const Eigen::MatrixXd R = Eigen::MatrixXd::Constant(1, 1, sigma_r * sigma_r);
    return unscented_update(pred, z, h, R, params);
}

/// e^T P^-1 e.
inline double nees(const Vec4& error, const Mat4& P)
{
    Eigen::LDLT<Mat4> ldlt(P);
    if (ldlt.info() != Eigen::Success)
        throw std::domain_error("nees: covariance is not invertible");
    return error.dot(ldlt.solve(error));
}

struct CrlbResult {
    std::vector<Mat4> information; // J_k, k = 0..K
    std::vector<double> position_bound;
    std::vector<double> velocity_bound;
    int pseudo_inverse_steps = 0;
};

namespace detail {

inline Mat4 robust_inverse(const Mat4& J, bool* used_pinv)
{
    Eigen::SelfAdjointEigenSolver<Mat4> eig(0.5 * (J + J.transpose()));
    const Vec4 lam = eig.eigenvalues();
    const double cutoff = 1e-12 * std::max(lam.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    Vec4 inv;
    *used_pinv = false;
    for (int i = 0; i < 4; ++i) {
        if (lam(i) > cutoff) {
            inv(i) = 1.0 / lam(i);
        } else {
            inv(i) = 0.0;
            *used_pinv = true;
        }
    }
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

} // namespace detail

/// Posterior CRLB for the relative state under range measurements:
///   J_k = (Q + F J_{k-1}^-1 F^T)^-1 + E[H_k^T H_k] / sigma_r^2,
/// H_k the range Jacobian at the true relative position, the expectation being
/// the average over the supplied truth trajectories. A singular information
/// matrix is inverted through its pseudo-inverse and counted.
/// `truths[run][k]` for k = 0..K; J0 is the information at k = 0.
inline CrlbResult crlb_recursion(const std::vector<std::vector<Vec4>>& truths, const MotionModel& model,
                                 double sigma_r, const Mat4& J0, bool with_measurements = true)
{
    if (truths.empty() || truths.front().empty())
        throw std::invalid_argument("crlb_recursion: no trajectories");
    if (!(sigma_r > 0.0))
        throw std::invalid_argument("crlb_recursion: sigma_r must be > 0");
    const std::size_t steps = truths.front().size();
    for (const auto& t : truths)
        if (t.size() != steps)
            throw std::invalid_argument("crlb_recursion: trajectories differ in length");

    CrlbResult out;
    out.information.push_back(J0);
    for (std::size_t k = 1; k < steps; ++k) {
        bool pinv = false;
        const Mat4 Jinv = detail::robust_inverse(out.information.back(), &pinv);
        out.pseudo_inverse_steps += pinv ? 1 : 0;
        Mat4 prior_cov = model.Q + model.F * Jinv * model.F.transpose();
        Mat4 J = detail::robust_inverse(prior_cov, &pinv);
        out.pseudo_inverse_steps += pinv ? 1 : 0;
        if (with_measurements) {
            Mat4 info = Mat4::Zero();
            for (const auto& t : truths) {
                const double rho = t[k].head<2>().norm();
                if (!(rho > 0.0))
                    continue;
                Vec4 Hk = Vec4::Zero();
                Hk(0) = t[k](0) / rho;
                Hk(1) = t[k](1) / rho;
                info += Hk * Hk.transpose();
            }
            J += info / (static_cast<double>(truths.size()) * sigma_r * sigma_r);
        }
        out.information.push_back(0.5 * (J + J.transpose()));
    }
    for (const auto& J : out.information) {
        bool pinv = false;
        const Mat4 P = detail::robust_inverse(J, &pinv);
        out.position_bound.push_back(std::sqrt(std::max(P(0, 0) + P(1, 1), 0.0)));
        out.velocity_bound.push_back(std::sqrt(std::max(P(2, 2) + P(3, 3), 0.0)));
    }
    return out;
}

} // namespace rot
