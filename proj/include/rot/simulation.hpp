// SPDX-License-Identifier: Apache-2.0
//
// Maneuvering-observer range-only scenario, prior construction from one
// range/azimuth pair, and the paired Monte-Carlo comparison of the proposed
// filter against EKF and UKF.

#pragma once

#include "rot/filter.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rot {

inline constexpr double kKnot = 0.514444; // m/s

struct ScenarioConfig {
    double T = 60.0;     // s
    int duration = 30;   // steps
    Eigen::Vector2d target_init_pos{7072.1, 7072.1};
    double target_heading = 225.0;          // deg, counter-clockwise from x
    double target_speed = 15.0;             // kn
    double observer_speed = 5.0;            // kn
    double observer_heading_initial = 170.0; // deg
    double observer_heading_final = 304.0;   // deg
    double maneuver_time = 15.0;            // min
    double q_tilde = 1e-3;                  // m^2/s^3
    double sigma_r = 10.0;                  // m
    double sigma_theta = 1.0;               // deg
    int N = 5;
    int M = 10;
    int L = 8;
    int runs = 100;
    std::uint64_t master_seed = 1;
    // Moment source used by the proposed filter.
    MomentMethod moment_method = MomentMethod::automatic;

    [[nodiscard]] int maneuver_step() const
    {
        return static_cast<int>(std::lround(maneuver_time * 60.0 / T));
    }
};

inline void validate(const ScenarioConfig& cfg)
{
    if (!(cfg.T > 0.0) || cfg.duration < 1)
        throw std::invalid_argument("ScenarioConfig: T and duration must be positive");
    if (!(cfg.target_speed >= 0.0) || !(cfg.observer_speed >= 0.0))
        throw std::invalid_argument("ScenarioConfig: speeds must be >= 0");
    if (!(cfg.maneuver_time > 0.0) || cfg.maneuver_step() >= cfg.duration)
        throw std::invalid_argument("ScenarioConfig: maneuver must happen before the end");
    if (!(cfg.q_tilde >= 0.0) || !(cfg.sigma_r >= 0.0) || !(cfg.sigma_theta >= 0.0))
        throw std::invalid_argument("ScenarioConfig: noise levels must be >= 0");
    if (cfg.N < 1 || cfg.M < 2 || cfg.L < 1 || cfg.runs < 1)
        throw std::invalid_argument("ScenarioConfig: N, L, runs must be >= 1 and M >= 2");
    if (!cfg.target_init_pos.allFinite())
        throw std::invalid_argument("ScenarioConfig: target position must be finite");
}

struct ScenarioDraw {
    std::vector<Vec4> truth;    // relative target state, k = 0..duration
    std::vector<Vec4> observer; // absolute observer state
    std::vector<double> ranges; // noisy range, k = 0..duration
    double azimuth0 = 0.0;      // noisy azimuth at k = 0, rad
};

namespace detail {

inline Eigen::Vector2d heading_velocity(double speed_knots, double heading_deg)
{
    const double a = heading_deg * std::numbers::pi / 180.0;
    return speed_knots * kKnot * Eigen::Vector2d(std::cos(a), std::sin(a));
}

inline std::mt19937_64 seeded_rng(std::uint64_t master, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(master & 0xffffffffu),
                      static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(index & 0xffffffffu),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

} // namespace detail

/// Observer legs: heading_initial up to the maneuver step, heading_final after.
inline std::vector<Vec4> observer_track(const ScenarioConfig& cfg)
{
    const Eigen::Vector2d v1 = detail::heading_velocity(cfg.observer_speed, cfg.observer_heading_initial);
    const Eigen::Vector2d v2 = detail::heading_velocity(cfg.observer_speed, cfg.observer_heading_final);
    const int km = cfg.maneuver_step();
    std::vector<Vec4> out;
    Vec4 s;
    s << 0.0, 0.0, v1;
    out.push_back(s);
    for (int k = 1; k <= cfg.duration; ++k) {
        const Eigen::Vector2d v = k <= km ? v1 : v2;
        s.head<2>() += cfg.T * v;
        s.tail<2>() = v;
        out.push_back(s);
    }
    return out;
}

inline ScenarioDraw generate_scenario(const ScenarioConfig& cfg, std::uint64_t run_seed)
{
    validate(cfg);
    auto rng = detail::seeded_rng(cfg.master_seed, run_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto model = ncv_model(cfg.T, cfg.q_tilde);
    Mat4 Lq = Mat4::Zero();
    if (cfg.q_tilde > 0.0)
        Lq = model.Q.llt().matrixL();

    ScenarioDraw out;
    out.observer = observer_track(cfg);
    Vec4 target;
    target << cfg.target_init_pos, detail::heading_velocity(cfg.target_speed, cfg.target_heading);
    for (int k = 0; k <= cfg.duration; ++k) {
        if (k > 0) {
            Vec4 w;
            for (int i = 0; i < 4; ++i)
                w(i) = normal(rng);
            target = model.F * target + Lq * w;
        }
        const Vec4 rel = target - out.observer[k];
        out.truth.push_back(rel);
        out.ranges.push_back(rel.head<2>().norm() + cfg.sigma_r * normal(rng));
    }
    out.azimuth0 = std::atan2(out.truth[0](1), out.truth[0](0)) +
                   cfg.sigma_theta * std::numbers::pi / 180.0 * normal(rng);
    return out;
}

/// Prior from one range/azimuth pair: linearized polar-to-Cartesian position
/// covariance, zero velocity with variance speed_prior^2 per axis.
inline GaussianState initialize_prior(double r0, double theta0, double sigma_r, double sigma_theta,
                                      double speed_prior)
{
    if (!(r0 > 0.0))
        throw std::invalid_argument("initialize_prior: r0 must be > 0");
    GaussianState out;
    out.mean << r0 * std::cos(theta0), r0 * std::sin(theta0), 0.0, 0.0;
    Eigen::Matrix2d J;
    J << std::cos(theta0), -r0 * std::sin(theta0), std::sin(theta0), r0 * std::cos(theta0);
    const Eigen::Matrix2d polar = Eigen::Vector2d(sigma_r * sigma_r, sigma_theta * sigma_theta).asDiagonal();
    out.cov.setZero();
    out.cov.topLeftCorner<2, 2>() = J * polar * J.transpose();
    out.cov.bottomRightCorner<2, 2>() = speed_prior * speed_prior * Eigen::Matrix2d::Identity();
    return out;
}

enum class FilterKind { proposed = 0, ekf = 1, ukf = 2 };
inline constexpr int kFilterCount = 3;

inline const char* filter_name(FilterKind kind)
{
    switch (kind) {
    case FilterKind::proposed:
        return "proposed";
    case FilterKind::ekf:
        return "ekf";
    case FilterKind::ukf:
        return "ukf";
    }
    return "?";
}

struct FilterMetrics {
    std::vector<double> pos_rmse; // k = 0..duration
    std::vector<double> vel_rmse;
    std::vector<double> nees;
    int failures = 0;
    int quadrature_updates = 0; // proposed filter only
    int baseline_updates = 0;   // proposed filter only
};

struct MonteCarloResult {
    FilterMetrics filters[kFilterCount];
    std::vector<double> crlb_pos;
    std::vector<double> crlb_vel;
    int crlb_pseudo_inverse_steps = 0;
    ScenarioDraw sample;                 // run 0
    std::vector<Vec4> sample_estimate;   // proposed filter on run 0

    [[nodiscard]] const FilterMetrics& operator[](FilterKind kind) const
    {
        return filters[static_cast<int>(kind)];
    }
};

struct FilterRun {
    std::vector<GaussianState> estimates; // k = 0..duration
    int quadrature_updates = 0;
    int baseline_updates = 0;
};

inline GaussianState scenario_prior(const ScenarioConfig& cfg, const ScenarioDraw& draw)
{
    return initialize_prior(draw.ranges[0], draw.azimuth0, cfg.sigma_r,
                            cfg.sigma_theta * std::numbers::pi / 180.0, 2.0 * cfg.target_speed * kKnot);
}

/// One filter over one scenario draw. Throws on numerical failure.
inline FilterRun run_filter(const ScenarioConfig& cfg, const ScenarioDraw& draw, FilterKind kind,
                            std::uint64_t run_seed)
{
    const auto model = ncv_model(cfg.T, cfg.q_tilde);
    ProposedConfig pc;
    pc.sigma_r = cfg.sigma_r;
    pc.n_terms = cfg.N;
    pc.max_order = cfg.M;
    pc.components = cfg.L;
    pc.seed = run_seed;
    pc.method = cfg.moment_method;

    FilterRun out;
    GaussianState x = scenario_prior(cfg, draw);
    out.estimates.push_back(x);
    for (int k = 1; k <= cfg.duration; ++k) {
        const auto pred = predict(x, model, draw.observer[k - 1], draw.observer[k]);
        const double r = draw.ranges[k];
        switch (kind) {
        case FilterKind::proposed: {
            const auto upd = proposed_update(pred, r, pc);
            out.quadrature_updates += upd.source == MomentSource::quadrature ? 1 : 0;
            out.baseline_updates += upd.used_baseline ? 1 : 0;
            x = upd.collapsed;
            break;
        }
        case FilterKind::ekf:
            x = ekf_update(pred, r, cfg.sigma_r);
            break;
        case FilterKind::ukf:
            x = ukf_update(pred, r, cfg.sigma_r);
            break;
        }
        if (!x.mean.allFinite() || !x.cov.allFinite())
            throw std::runtime_error("run_filter: non-finite estimate");
        out.estimates.push_back(x);
    }
    return out;
}

/// Information at k = 0: inverse of the prior covariance built at the true
/// initial range and bearing.
inline Mat4 crlb_initial_information(const ScenarioConfig& cfg, const Vec4& truth0)
{
    const auto P0 = initialize_prior(truth0.head<2>().norm(), std::atan2(truth0(1), truth0(0)), cfg.sigma_r,
                                     cfg.sigma_theta * std::numbers::pi / 180.0, 2.0 * cfg.target_speed * kKnot);
    return P0.cov.inverse();
}

/// Paired Monte-Carlo study: every filter sees the same draw in each run. Runs
/// whose filter throws or diverges to non-finite values are excluded from that
/// filter's metrics and counted; more than 5% failures for any filter throws.
inline MonteCarloResult run_monte_carlo(const ScenarioConfig& cfg)
{
    validate(cfg);
    if (!(cfg.sigma_r > 0.0))
        throw std::invalid_argument("run_monte_carlo: sigma_r must be > 0");
    const int steps = cfg.duration + 1;

    MonteCarloResult out;
    std::vector<double> sum_pos[kFilterCount], sum_vel[kFilterCount], sum_nees[kFilterCount];
    for (int f = 0; f < kFilterCount; ++f) {
        sum_pos[f].assign(steps, 0.0);
        sum_vel[f].assign(steps, 0.0);
        sum_nees[f].assign(steps, 0.0);
    }
    std::vector<std::vector<Vec4>> truths;

    for (int run = 0; run < cfg.runs; ++run) {
        const auto draw = generate_scenario(cfg, static_cast<std::uint64_t>(run));
        truths.push_back(draw.truth);
        for (int f = 0; f < kFilterCount; ++f) {
            const auto kind = static_cast<FilterKind>(f);
            auto& metrics = out.filters[f];
            FilterRun fr;
            std::vector<double> pos(steps), vel(steps), ne(steps);
            try {
                fr = run_filter(cfg, draw, kind, static_cast<std::uint64_t>(run));
                for (int k = 0; k < steps; ++k) {
                    const Vec4 e = draw.truth[k] - fr.estimates[k].mean;
                    pos[k] = e.head<2>().squaredNorm();
                    vel[k] = e.tail<2>().squaredNorm();
                    ne[k] = nees(e, fr.estimates[k].cov);
                    if (!std::isfinite(ne[k]))
                        throw std::runtime_error("run_monte_carlo: non-finite NEES");
                }
            } catch (const std::exception&) {
                ++metrics.failures;
                continue;
            }
            for (int k = 0; k < steps; ++k) {
                sum_pos[f][k] += pos[k];
                sum_vel[f][k] += vel[k];
                sum_nees[f][k] += ne[k];
            }
            metrics.quadrature_updates += fr.quadrature_updates;
            metrics.baseline_updates += fr.baseline_updates;
            if (run == 0 && kind == FilterKind::proposed) {
                out.sample = draw;
                for (const auto& est : fr.estimates)
                    out.sample_estimate.push_back(est.mean);
            }
        }
    }

    for (int f = 0; f < kFilterCount; ++f) {
        auto& metrics = out.filters[f];
        if (metrics.failures > 0.05 * cfg.runs)
            throw std::runtime_error(std::string("run_monte_carlo: too many failed runs for ") +
                                     filter_name(static_cast<FilterKind>(f)));
        const double used = cfg.runs - metrics.failures;
        for (int k = 0; k < steps; ++k) {
            metrics.pos_rmse.push_back(std::sqrt(sum_pos[f][k] / used));
            metrics.vel_rmse.push_back(std::sqrt(sum_vel[f][k] / used));
            metrics.nees.push_back(sum_nees[f][k] / used);
        }
    }

    const auto model = ncv_model(cfg.T, cfg.q_tilde);
    const auto crlb = crlb_recursion(truths, model, cfg.sigma_r, crlb_initial_information(cfg, truths[0][0]));
    out.crlb_pos = crlb.position_bound;
    out.crlb_vel = crlb.velocity_bound;
    out.crlb_pseudo_inverse_steps = crlb.pseudo_inverse_steps;
    return out;
}

} // namespace rot
