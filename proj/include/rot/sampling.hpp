// SPDX-License-Identifier: Apache-2.0
//
// Wrapped Dirac approximations of a circular density from its first M
// trigonometric moments.

#pragma once

#include "rot/moments.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rot {

struct WrappedDirac {
    std::vector<double> weights;
    std::vector<double> angles; // [0, 2 pi)

    [[nodiscard]] int size() const { return static_cast<int>(weights.size()); }
};

struct FitReport {
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_history;
};

struct FitConfig {
    int max_iterations = 5000;
    int restarts = 4;
    std::uint64_t seed = 0;
    double objective_tol = 1e-26; // 0.5 |res|^2 below this stops immediately
    double step_tol = 1e-13;
    // Stationarity: stop once the objective improved by less than this fraction
    // over the last `window` iterations.
    int window = 100;
    double window_rel_drop = 1e-3;
    // A start ending at or below accept_objective skips the remaining starts.
    // One that settles above it gets up to `exchanges` rounds in which the
    // lightest point moves to where the residual is largest, then refits.
    double accept_objective = 1e-14;
    int exchanges = 16;
};

inline void validate(const FitConfig& cfg)
{
    if (cfg.max_iterations < 1)
        throw std::invalid_argument("FitConfig: max_iterations must be >= 1");
    if (cfg.restarts < 0)
        throw std::invalid_argument("FitConfig: restarts must be >= 0");
    if (cfg.window < 1 || !(cfg.window_rel_drop >= 0.0))
        throw std::invalid_argument("FitConfig: window must be >= 1 and window_rel_drop >= 0");
    if (cfg.exchanges < 0 || !(cfg.accept_objective >= 0.0))
        throw std::invalid_argument("FitConfig: exchanges and accept_objective must be >= 0");
}

namespace detail {

inline double wrap_two_pi(double angle)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double out = std::fmod(angle, two_pi);
    if (out < 0.0)
        out += two_pi;
    if (out >= two_pi)
        out = 0.0;
    return out;
}

} // namespace detail

inline void validate(const WrappedDirac& d)
{
    if (d.weights.empty() || d.weights.size() != d.angles.size())
        throw std::invalid_argument("WrappedDirac: weights and angles must be non-empty and equal length");
    double sum = 0.0;
    for (double w : d.weights) {
        if (!(w >= 0.0 && w <= 1.0))
            throw std::invalid_argument("WrappedDirac: weight outside [0, 1]");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("WrappedDirac: weights do not sum to 1");
    for (double a : d.angles)
        if (!(a >= 0.0 && a < 2.0 * std::numbers::pi))
            throw std::invalid_argument("WrappedDirac: angle outside [0, 2 pi)");
}

inline MomentPair dirac_moments(const WrappedDirac& d, int m)
{
    if (m < 1)
        throw std::invalid_argument("dirac_moments: m must be >= 1");
    validate(d);
    MomentPair out;
    for (int l = 0; l < d.size(); ++l) {
        out.c += d.weights[l] * std::cos(m * d.angles[l]);
        out.s += d.weights[l] * std::sin(m * d.angles[l]);
    }
    return out;
}

inline CircularMoments dirac_moments_upto(const WrappedDirac& d, int max_order)
{
    CircularMoments out;
    for (int m = 1; m <= max_order; ++m)
        out.orders.push_back(dirac_moments(d, m));
    return out;
}

/// Euclidean norm of the stacked (c_m, s_m) differences over m = 1..M.
inline double moment_residual(const WrappedDirac& d, const CircularMoments& target)
{
    double sq = 0.0;
    for (int m = 1; m <= target.M(); ++m) {
        const auto got = dirac_moments(d, m);
        sq += (target[m].c - got.c) * (target[m].c - got.c) + (target[m].s - got.s) * (target[m].s - got.s);
    }
    return std::sqrt(sq);
}

namespace detail {

// Variables z = [gamma_1..gamma_L, theta_1..theta_L]. Row 0 of the residual is
// 1 - sum(gamma) so that the post-fit renormalization leaves the fit intact;
// rows 2m-1 and 2m hold the cosine and sine mismatch of order m.
class DiracProblem {
public:
    DiracProblem(const CircularMoments& target, int L) : target_(target), L_(L) {}

    [[nodiscard]] int rows() const { return 1 + 2 * target_.M(); }
    [[nodiscard]] int cols() const { return 2 * L_; }
    [[nodiscard]] int weights() const { return L_; }

    [[nodiscard]] Eigen::VectorXd residual(const Eigen::VectorXd& z) const
    {
        Eigen::VectorXd res(rows());
        res(0) = 1.0 - z.head(L_).sum();
        for (int m = 1; m <= target_.M(); ++m) {
            double c = 0.0, s = 0.0;
            for (int l = 0; l < L_; ++l) {
                c += z(l) * std::cos(m * z(L_ + l));
                s += z(l) * std::sin(m * z(L_ + l));
            }
            res(2 * m - 1) = target_[m].c - c;
            res(2 * m) = target_[m].s - s;
        }
        return res;
    }

    [[nodiscard]] Eigen::MatrixXd jacobian(const Eigen::VectorXd& z) const
    {
        Eigen::MatrixXd J(rows(), cols());
        J.row(0).head(L_).setConstant(-1.0);
        J.row(0).tail(L_).setZero();
        for (int m = 1; m <= target_.M(); ++m) {
            for (int l = 0; l < L_; ++l) {
                const double cm = std::cos(m * z(L_ + l));
                const double sm = std::sin(m * z(L_ + l));
                J(2 * m - 1, l) = -cm;
                J(2 * m - 1, L_ + l) = z(l) * m * sm;
                J(2 * m, l) = -sm;
                J(2 * m, L_ + l) = -z(l) * m * cm;
            }
        }
        return J;
    }

    void project(Eigen::VectorXd& z) const
    {
        for (int l = 0; l < L_; ++l)
            z(l) = std::clamp(z(l), 0.0, 1.0);
    }

private:
    const CircularMoments& target_;
    int L_;
};

struct LmOutcome {
    Eigen::VectorXd z;
    double objective;
    int iterations;
    bool converged;
    std::vector<double> history;
};

// Projected Levenberg-Marquardt with box constraints on the weights.
inline LmOutcome projected_lm(const DiracProblem& prob, Eigen::VectorXd z, const FitConfig& cfg)
{
    prob.project(z);
    Eigen::VectorXd res = prob.residual(z);
    double f = 0.5 * res.squaredNorm();
    LmOutcome out{z, f, 0, false, {f}};
    double lambda = 1e-3;

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        out.iterations = it;
        if (f <= cfg.objective_tol) {
            out.converged = true;
            break;
        }
        const Eigen::MatrixXd J = prob.jacobian(z);
        Eigen::MatrixXd A = J.transpose() * J;
        Eigen::VectorXd g = J.transpose() * res;
        // Weights held at a bound by the gradient are frozen for this step.
        for (int l = 0; l < prob.weights(); ++l) {
            if ((z(l) <= 0.0 && g(l) > 0.0) || (z(l) >= 1.0 && g(l) < 0.0)) {
                A.row(l).setZero();
                A.col(l).setZero();
                A(l, l) = 1.0;
                g(l) = 0.0;
            }
        }
        const Eigen::VectorXd scale = A.diagonal().cwiseMax(1e-12);

        bool accepted = false;
        bool stalled = false;
        while (!accepted) {
            Eigen::MatrixXd damped = A;
            damped.diagonal() += lambda * scale;
            const Eigen::VectorXd delta = damped.ldlt().solve(-g);
            Eigen::VectorXd trial = z + delta;
            prob.project(trial);
            const Eigen::VectorXd step = trial - z;
            if (!step.allFinite() || step.norm() <= cfg.step_tol * (1.0 + z.norm())) {
                stalled = true;
                break;
            }
            const Eigen::VectorXd trial_res = prob.residual(trial);
            const double trial_f = 0.5 * trial_res.squaredNorm();
            if (trial_f < f) {
                const double drop = f - trial_f;
                z = trial;
                res = trial_res;
                f = trial_f;
                lambda = std::max(lambda / 3.0, 1e-15);
                accepted = true;
                out.history.push_back(f);
                if (drop <= 1e-16 * f && step.norm() <= 1e-10 * (1.0 + z.norm()))
                    stalled = true;
            } else {
                lambda *= 4.0;
                if (lambda > 1e16) {
                    stalled = true;
                    break;
                }
            }
        }
        if (stalled) {
            out.converged = true;
            break;
        }
        const auto& h = out.history;
        if (static_cast<int>(h.size()) > cfg.window &&
            h[h.size() - 1 - cfg.window] - f < cfg.window_rel_drop * f) {
            out.converged = true;
            break;
        }
    }
    if (f <= cfg.objective_tol)
        out.converged = true;
    out.z = z;
    out.objective = f;
    return out;
}

// Relocates the lightest point to the angle whose atom best correlates with the
// residual, with its weight set by a one-dimensional least-squares fit. Returns
// false when no relocation lowers the objective.
inline bool exchange_point(const DiracProblem& prob, Eigen::VectorXd& z, double f)
{
    const int L = prob.weights();
    const int M = (prob.rows() - 1) / 2;
    auto atom = [&](double t) {
        Eigen::VectorXd e(prob.rows());
        e(0) = 1.0;
        for (int m = 1; m <= M; ++m) {
            e(2 * m - 1) = std::cos(m * t);
            e(2 * m) = std::sin(m * t);
        }
        return e;
    };
    int light = 0;
    for (int l = 1; l < L; ++l)
        if (z(l) < z(light))
            light = l;
    // Residual with the lightest point removed.
    const Eigen::VectorXd base = prob.residual(z) + z(light) * atom(z(L + light));

    constexpr int grid = 720;
    double best_corr = -std::numeric_limits<double>::infinity(), best_t = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double t = 2.0 * std::numbers::pi * i / grid;
        const double corr = base.dot(atom(t));
        if (corr > best_corr) {
            best_corr = corr;
            best_t = t;
        }
    }
    if (!(best_corr > 0.0))
        return false;
    const Eigen::VectorXd e = atom(best_t);
    const double w = std::clamp(best_corr / e.squaredNorm(), 0.0, 1.0);
    Eigen::VectorXd trial = z;
    trial(light) = w;
    trial(L + light) = best_t;
    if (!(0.5 * prob.residual(trial).squaredNorm() < f))
        return false;
    z = std::move(trial);
    return true;
}

inline WrappedDirac dirac_from_variables(const Eigen::VectorXd& z, int L)
{
    WrappedDirac d;
    d.weights.resize(L);
    d.angles.resize(L);
    double sum = 0.0;
    for (int l = 0; l < L; ++l)
        sum += z(l);
    for (int l = 0; l < L; ++l) {
        d.weights[l] = sum > 0.0 ? z(l) / sum : 1.0 / L;
        d.angles[l] = wrap_two_pi(z(L + l));
    }
    return d;
}

inline double circular_mean_direction(const CircularMoments& cm)
{
    return std::atan2(cm[1].s, cm[1].c);
}

} // namespace detail

/// Least-squares fit of an L-point wrapped Dirac to target moments 1..M under
/// 0 <= gamma <= 1, followed by weight renormalization. Starts: equal spacing
/// anchored at the circular mean, a cluster spanning +-2 circular standard
/// deviations, then `restarts` random draws from the seeded generator. The best
/// residual wins.
inline std::pair<WrappedDirac, FitReport> fit_wrapped_dirac(const CircularMoments& target, int L,
                                                            const FitConfig& cfg = {})
{
    if (target.M() < 1)
        throw std::invalid_argument("fit_wrapped_dirac: target needs at least one moment");
    if (L < 1)
        throw std::invalid_argument("fit_wrapped_dirac: L must be >= 1");
    validate(cfg);

    const detail::DiracProblem prob(target, L);
    const double mu = detail::circular_mean_direction(target);
    const double resultant = std::hypot(target[1].c, target[1].s);

    std::vector<Eigen::VectorXd> starts;
    {
        Eigen::VectorXd z(2 * L);
        for (int l = 0; l < L; ++l) {
            z(l) = 1.0 / L;
            z(L + l) = mu + 2.0 * std::numbers::pi * l / L;
        }
        starts.push_back(z);
    }
    if (L > 1 && resultant > 1e-12 && resultant < 1.0) {
        const double spread = std::sqrt(-2.0 * std::log(resultant));
        Eigen::VectorXd z(2 * L);
        for (int l = 0; l < L; ++l) {
            z(l) = 1.0 / L;
            z(L + l) = mu + spread * (-2.0 + 4.0 * l / (L - 1));
        }
        starts.push_back(z);
    }
    for (int k = 0; k < cfg.restarts; ++k) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu),
                          static_cast<std::uint32_t>(cfg.seed >> 32), static_cast<std::uint32_t>(k)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Eigen::VectorXd z(2 * L);
        double sum = 0.0;
        for (int l = 0; l < L; ++l) {
            z(l) = unit(rng) + 1e-3;
            sum += z(l);
            z(L + l) = 2.0 * std::numbers::pi * unit(rng);
        }
        z.head(L) /= sum;
        starts.push_back(z);
    }

    detail::LmOutcome best{};
    best.objective = std::numeric_limits<double>::infinity();
    int total_iterations = 0;
    for (const auto& z0 : starts) {
        auto run = detail::projected_lm(prob, z0, cfg);
        total_iterations += run.iterations;
        // Only a start that settled (rather than ran out of iterations) is
        // treated as stuck in a local minimum.
        for (int k = 0; k < cfg.exchanges && run.converged && run.objective > cfg.accept_objective && L > 1; ++k) {
            Eigen::VectorXd z = run.z;
            if (!detail::exchange_point(prob, z, run.objective))
                break;
            auto next = detail::projected_lm(prob, z, cfg);
            total_iterations += next.iterations;
            if (!(next.objective < run.objective))
                break;
            run.history.insert(run.history.end(), next.history.begin(), next.history.end());
            run.z = std::move(next.z);
            run.objective = next.objective;
            run.converged = next.converged;
        }
        if (run.objective < best.objective)
            best = std::move(run);
        if (best.objective <= cfg.accept_objective)
            break;
    }

    auto dirac = detail::dirac_from_variables(best.z, L);
    FitReport report;
    report.residual_norm = moment_residual(dirac, target);
    report.iterations = total_iterations;
    report.converged = best.converged;
    report.objective_history = std::move(best.history);
    return {std::move(dirac), std::move(report)};
}

namespace detail {

inline WrappedDirac uniform_dirac(int L, double start)
{
    WrappedDirac d;
    for (int l = 0; l < L; ++l) {
        d.weights.push_back(1.0 / L);
        d.angles.push_back(wrap_two_pi(start + 2.0 * std::numbers::pi * l / L));
    }
    return d;
}

} // namespace detail

/// Equal-weight points symmetric about the circular mean mu: one at mu when L is
/// odd, and the remaining pairs on two shells mu +- alpha, mu +- beta. The
/// shell angles and the split of pairs between them are chosen to reproduce the
/// mean resultant length and the order-2 moment along the mean axis; when that
/// is not attainable the resultant is kept and the order-2 mismatch minimized. A vanishing resultant gives an
/// evenly spread set.
inline WrappedDirac symmetric_sampling_baseline(const CircularMoments& target, int L)
{
    if (target.M() < 2)
        throw std::invalid_argument("symmetric_sampling_baseline: needs moments up to order 2");
    if (L < 1)
        throw std::invalid_argument("symmetric_sampling_baseline: L must be >= 1");

    const double rho1 = std::hypot(target[1].c, target[1].s);
    if (rho1 < 1e-12 || L == 1) {
        const double mu = rho1 < 1e-12 ? 0.0 : detail::circular_mean_direction(target);
        return detail::uniform_dirac(L, mu);
    }
    const double mu = detail::circular_mean_direction(target);
    const double rho2 = target[2].c * std::cos(2.0 * mu) + target[2].s * std::sin(2.0 * mu);

    const int centre = L % 2;
    const int pairs = L / 2;
    const double Ld = static_cast<double>(L);
    const double u = Ld * rho1 - centre;                // sum over pairs of 2 cos(offset)
    const double target_h = Ld * rho2 - centre + 2.0 * pairs; // sum over pairs of 4 cos^2(offset)

    struct Shells {
        int n_a;
        double X, Y, mismatch; // X = cos(alpha), Y = cos(beta)
    };
    // n_a pairs at +-alpha and n_b = pairs - n_a at +-beta. Y follows from X via
    // the resultant; h(X) is a convex quadratic whose level target_h is sought,
    // preferring the root with the inner shell closer to the mean.
    auto solve_split = [&](int n_a) -> Shells {
        const int n_b = pairs - n_a;
        if (n_b == 0) {
            const double X = std::clamp(u / (2.0 * n_a), -1.0, 1.0);
            return {n_a, X, X, std::abs(4.0 * n_a * X * X - target_h)};
        }
        auto y_of = [&](double xv) { return (u - 2.0 * n_a * xv) / (2.0 * n_b); };
        auto h = [&](double xv) {
            const double yv = y_of(xv);
            return 4.0 * n_a * xv * xv + 4.0 * n_b * yv * yv;
        };
        const double lo = std::max(-1.0, (u - 2.0 * n_b) / (2.0 * n_a));
        const double hi = std::min(1.0, (u + 2.0 * n_b) / (2.0 * n_a));
        if (lo > hi) {
            const double X = std::clamp(u / (2.0 * pairs), -1.0, 1.0);
            return {n_a, X, X, std::numeric_limits<double>::infinity()};
        }
        const double vertex = std::clamp(u / (2.0 * pairs), lo, hi);
        auto bisect = [&](double a, double b) {
            const bool rising = h(b) > h(a);
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                ((h(mid) < target_h) == rising ? a : b) = mid;
            }
            return 0.5 * (a + b);
        };
        double X;
        if (target_h <= h(vertex))
            X = vertex;
        else if (h(hi) >= target_h)
            X = bisect(vertex, hi);
        else if (h(lo) >= target_h)
            X = bisect(lo, vertex);
        else
            X = h(lo) > h(hi) ? lo : hi;
        const double Y = std::clamp(y_of(X), -1.0, 1.0);
        return {n_a, X, Y, std::abs(h(X) - target_h)};
    };

    Shells best = solve_split(pairs);
    for (int n_a = pairs - 1; n_a >= 1; --n_a) {
        const auto cand = solve_split(n_a);
        if (cand.mismatch < best.mismatch - 1e-14)
            best = cand;
    }
    const int n_a = best.n_a;
    const int n_b = pairs - n_a;
    const double X = best.X, Y = best.Y;

    const double alpha = std::acos(std::clamp(X, -1.0, 1.0));
    const double beta = std::acos(std::clamp(Y, -1.0, 1.0));
    WrappedDirac d;
    auto push = [&](double angle) {
        d.weights.push_back(1.0 / Ld);
        d.angles.push_back(detail::wrap_two_pi(angle));
    };
    if (centre)
        push(mu);
    for (int k = 0; k < n_a; ++k) {
        push(mu - alpha);
        push(mu + alpha);
    }
    for (int k = 0; k < n_b; ++k) {
        push(mu - beta);
        push(mu + beta);
    }
    return d;
}

} // namespace rot
