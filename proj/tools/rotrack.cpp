// SPDX-License-Identifier: Apache-2.0
//
// rotrack: circular moments, wrapped Dirac sampling, the tracking study and a
// series-vs-quadrature benchmark from the command line.

#include "rot/config.hpp"
#include "rot/filter.hpp"
#include "rot/oracle.hpp"
#include "rot/sampling.hpp"
#include "rot/simulation.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct GeometryArgs {
    std::vector<double> yhat{-11.0, 20.0};
    std::vector<double> cov{50.0, -10.0, -10.0, 50.0};
    double range = -1.0; // defaults to |yhat|
};

void add_geometry(CLI::App* cmd, GeometryArgs& g)
{
    cmd->add_option("--yhat", g.yhat, "predicted position x y [m]")->expected(2);
    cmd->add_option("--cov", g.cov, "innovation covariance V, row-major 4 values [m^2]")->expected(4);
    cmd->add_option("--range", g.range, "measured range r [m]; defaults to |yhat|");
}

rot::PredictedMeasurement measurement(const GeometryArgs& g)
{
    rot::PredictedMeasurement pm;
    pm.y_hat = {g.yhat[0], g.yhat[1]};
    pm.V << g.cov[0], g.cov[1], g.cov[2], g.cov[3];
    return pm;
}

double range_of(const GeometryArgs& g, const rot::PredictedMeasurement& pm)
{
    const double r = g.range > 0.0 ? g.range : pm.y_hat.norm();
    if (!(r > 0.0))
        throw std::invalid_argument("range must be > 0 (|yhat| is zero; pass --range)");
    return r;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.precision(17);
    return out;
}

void write_step_csv(const fs::path& path, const rot::ScenarioConfig& cfg, const rot::MonteCarloResult& res,
                    std::vector<double> rot::FilterMetrics::*field)
{
    auto out = open_out(path);
    out << "step,time_s,proposed,ekf,ukf\n";
    for (int k = 0; k <= cfg.duration; ++k) {
        out << k << ',' << k * cfg.T;
        for (int f = 0; f < rot::kFilterCount; ++f)
            out << ',' << (res.filters[f].*field)[k];
        out << '\n';
    }
}

int cmd_moments(const GeometryArgs& g, int order, int terms, const std::string& params_path)
{
    const auto pm = measurement(g);
    const auto pp = rot::polar_params(pm);
    const double r = range_of(g, pm);
    if (!params_path.empty())
        open_out(params_path) << rot::polar_params_csv(pp);

    const auto series = rot::series_moments(pp, r, order, terms);
    const auto oracle = rot::quad_moments(pp, r, order);
    std::cout.precision(17);
    std::cout << "m,c_m,s_m,oracle_c_m,oracle_s_m,abs_err\n";
    for (int m = 1; m <= order; ++m) {
        const auto& s = series.moments[m];
        const auto& q = oracle[m];
        std::cout << m << ',' << s.c << ',' << s.s << ',' << q.c << ',' << q.s << ','
                  << std::max(std::abs(s.c - q.c), std::abs(s.s - q.s)) << '\n';
    }
    if (series.condition * 1e-16 > 1e-10 || series.tail > 1e-8)
        std::cerr << "warning: series condition " << series.condition << ", first omitted term " << series.tail
                  << "; compare with the oracle columns\n";
    return 0;
}

int cmd_sample(const GeometryArgs& g, int components, int order, std::uint64_t seed, const std::string& out_dir)
{
    const auto pm = measurement(g);
    const auto pp = rot::polar_params(pm);
    const double r = range_of(g, pm);

    rot::ProposedConfig pc;
    pc.max_order = order;
    rot::MomentSource source{};
    const auto target = rot::update_moments(pp, r, pc, &source);
    rot::FitConfig fc;
    fc.seed = seed;
    const auto [dirac, report] = rot::fit_wrapped_dirac(target, components, fc);

    fs::create_directories(out_dir);
    {
        auto out = open_out(fs::path(out_dir) / "dirac.csv");
        out << "l,gamma_l,theta_l\n";
        for (int l = 0; l < dirac.size(); ++l)
            out << l + 1 << ',' << dirac.weights[l] << ',' << dirac.angles[l] << '\n';
    }
    {
        const auto lay = rot::detail::quad_layout(pp, r);
        auto weight = [&](double t) { return std::exp(rot::polar_exponent(pp, t, r) - lay.gmax); };
        const double norm = rot::quad_periodic(weight, {}, lay.offset, lay.breaks).value;
        auto out = open_out(fs::path(out_dir) / "density.csv");
        out << "theta,p\n";
        constexpr int samples = 720;
        for (int i = 0; i <= samples; ++i) {
            const double t = 2.0 * std::numbers::pi * i / samples;
            out << t << ',' << weight(t) / norm << '\n';
        }
    }
    std::cout << "moments: " << (source == rot::MomentSource::series ? "series" : "quadrature")
              << "\nresidual_norm: " << report.residual_norm << "\niterations: " << report.iterations
              << "\nconverged: " << (report.converged ? "true" : "false") << '\n';
    return 0;
}

int cmd_track(const std::string& config_path, int runs, long long seed, const std::string& method,
              const std::string& out_dir)
{
    rot::ScenarioConfig cfg = config_path.empty() ? rot::ScenarioConfig{} : rot::load_scenario(config_path);
    if (runs > 0)
        cfg.runs = runs;
    if (seed >= 0)
        cfg.master_seed = static_cast<std::uint64_t>(seed);
    if (!method.empty())
        cfg.moment_method = rot::parse_moment_method(method);
    rot::validate(cfg);

    const auto t0 = std::chrono::steady_clock::now();
    const auto res = rot::run_monte_carlo(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_step_csv(dir / "pos_rmse.csv", cfg, res, &rot::FilterMetrics::pos_rmse);
    write_step_csv(dir / "vel_rmse.csv", cfg, res, &rot::FilterMetrics::vel_rmse);
    write_step_csv(dir / "nees.csv", cfg, res, &rot::FilterMetrics::nees);
    {
        auto out = open_out(dir / "crlb.csv");
        out << "step,time_s,position_bound,velocity_bound\n";
        for (int k = 0; k <= cfg.duration; ++k)
            out << k << ',' << k * cfg.T << ',' << res.crlb_pos[k] << ',' << res.crlb_vel[k] << '\n';
    }
    {
        auto out = open_out(dir / "trajectory.csv");
        out << "step,truth_x,truth_y,est_x,est_y,observer_x,observer_y\n";
        const auto& s = res.sample;
        for (std::size_t k = 0; k < res.sample_estimate.size(); ++k) {
            const auto& o = s.observer[k];
            out << k << ',' << s.truth[k](0) + o(0) << ',' << s.truth[k](1) + o(1) << ','
                << res.sample_estimate[k](0) + o(0) << ',' << res.sample_estimate[k](1) + o(1) << ',' << o(0)
                << ',' << o(1) << '\n';
        }
    }
    {
        auto out = open_out(dir / "config.json");
        out << rot::scenario_to_json(cfg).dump(2) << '\n';
    }

    const int last = cfg.duration;
    std::cout << "runs: " << cfg.runs << " (" << secs << " s)\n";
    for (int f = 0; f < rot::kFilterCount; ++f) {
        const auto& m = res.filters[f];
        std::cout << rot::filter_name(static_cast<rot::FilterKind>(f)) << ": final pos RMSE " << m.pos_rmse[last]
                  << " m, final vel RMSE " << m.vel_rmse[last] << " m/s, final NEES " << m.nees[last]
                  << ", failed runs " << m.failures << '\n';
    }
    const auto& p = res.filters[0];
    std::cout << "proposed: quadrature moment updates " << p.quadrature_updates << ", baseline sampler updates "
              << p.baseline_updates << '\n';
    std::cout << "crlb: final position bound " << res.crlb_pos[last] << " m\n";
    if (res.crlb_pseudo_inverse_steps > 0)
        std::cerr << "warning: CRLB used a pseudo-inverse at " << res.crlb_pseudo_inverse_steps << " steps\n";
    return 0;
}

template <class F>
double time_ns(const F& f, int reps)
{
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i)
        f();
    return std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0).count() / reps;
}

int cmd_bench(const GeometryArgs& g, int reps, double quad_tol, const std::string& out_dir)
{
    const auto pm = measurement(g);
    const auto pp = rot::polar_params(pm);
    const double r = range_of(g, pm);

    rot::QuadratureSpec fast;
    fast.abs_tol = quad_tol;
    fast.rel_tol = quad_tol;
    const auto reference = rot::quad_moment_pair(1, pp, r);
    volatile double sink = 0.0;
    const double quad_ns = time_ns([&] { sink = sink + rot::quad_moment_pair(1, pp, r, fast).c.value; }, reps);

    fs::create_directories(out_dir);
    auto out = open_out(fs::path(out_dir) / "bench.csv");
    out << "n_terms,series_ns,quad_ns,abs_err_cos,abs_err_sin\n";
    std::cout << "quadrature (tol " << quad_tol << "): " << quad_ns << " ns\n";
    for (int n = 1; n <= 20; ++n) {
        const double series_ns =
            time_ns([&] { sink = sink + rot::stabilized_gen_moments(1, pp, r, n).first; }, reps);
        const auto [c, s] = rot::stabilized_gen_moments(1, pp, r, n);
        out << n << ',' << series_ns << ',' << quad_ns << ',' << std::abs(c - reference.c.value) << ','
            << std::abs(s - reference.s.value) << '\n';
        std::cout << "n_terms " << n << ": " << series_ns << " ns, speedup " << quad_ns / series_ns << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Range-only tracking with circular-moment wrapped Dirac sampling"};
    app.require_subcommand(1);

    GeometryArgs mg;
    int m_order = 10, m_terms = 5;
    std::string m_params;
    auto* moments = app.add_subcommand("moments", "series vs quadrature circular moments (CSV on stdout)");
    add_geometry(moments, mg);
    moments->add_option("--order", m_order, "highest moment order M")->check(CLI::PositiveNumber);
    moments->add_option("--terms", m_terms, "series terms N")->check(CLI::NonNegativeNumber);
    moments->add_option("--params", m_params, "also write the polar parameter set to this CSV file");

    GeometryArgs sg;
    int s_components = 8, s_order = 10;
    std::uint64_t s_seed = 0;
    std::string s_out = "sample_out";
    auto* sample = app.add_subcommand("sample", "fit a wrapped Dirac to the conditional azimuth density");
    add_geometry(sample, sg);
    sample->add_option("--components", s_components, "Dirac points L")->check(CLI::PositiveNumber);
    sample->add_option("--moments", s_order, "moment orders M used in the fit")->check(CLI::PositiveNumber);
    sample->add_option("--seed", s_seed, "restart seed");
    sample->add_option("--out", s_out, "output directory for dirac.csv and density.csv");

    std::string t_config, t_method, t_out = "track_out";
    int t_runs = 0;
    long long t_seed = -1;
    auto* track = app.add_subcommand("track", "Monte-Carlo filter comparison on the maneuvering-observer scenario");
    track->add_option("--config", t_config, "JSON scenario config (defaults to the built-in scenario)");
    track->add_option("--runs", t_runs, "Monte-Carlo runs (overrides config)")->check(CLI::PositiveNumber);
    track->add_option("--seed", t_seed, "master seed (overrides config)")->check(CLI::NonNegativeNumber);
    track->add_option("--moment-method", t_method, "automatic | series | quadrature");
    track->add_option("--out", t_out, "output directory for the CSV files");

    GeometryArgs bg;
    int b_reps = 2000;
    double b_tol = 1e-8;
    std::string b_out = "bench_out";
    auto* bench = app.add_subcommand("bench", "time series vs quadrature for n_terms 1..20");
    add_geometry(bench, bg);
    bench->add_option("--reps", b_reps, "repetitions per timing")->check(CLI::PositiveNumber);
    bench->add_option("--quad-tol", b_tol, "abs/rel tolerance of the timed quadrature")->check(CLI::PositiveNumber);
    bench->add_option("--out", b_out, "output directory for bench.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (moments->parsed())
            return cmd_moments(mg, m_order, m_terms, m_params);
        if (sample->parsed())
            return cmd_sample(sg, s_components, s_order, s_seed, s_out);
        if (track->parsed())
            return cmd_track(t_config, t_runs, t_seed, t_method, t_out);
        if (bench->parsed())
            return cmd_bench(bg, b_reps, b_tol, b_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
