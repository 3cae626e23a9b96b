// SPDX-License-Identifier: Apache-2.0
//
// JSON form of ScenarioConfig. Every key is optional; missing keys keep the
// defaults. Unknown keys are rejected so that typos do not pass silently.
//
//   {
//     "T": 60, "duration": 30,
//     "target_init_pos": [7072.1, 7072.1], "target_heading": 225, "target_speed": 15,
//     "observer_speed": 5, "observer_heading_initial": 170, "observer_heading_final": 304,
//     "maneuver_time": 15, "q_tilde": 1e-3, "sigma_r": 10, "sigma_theta": 1,
//     "N": 5, "M": 10, "L": 8, "runs": 100, "master_seed": 1,
//     "moment_method": "automatic"        // or "series", "quadrature"
//   }

#pragma once

#include "rot/simulation.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

namespace rot {

inline MomentMethod parse_moment_method(const std::string& name)
{
    if (name == "automatic")
        return MomentMethod::automatic;
    if (name == "series")
        return MomentMethod::series_fixed;
    if (name == "quadrature")
        return MomentMethod::quadrature;
    throw std::invalid_argument("unknown moment_method '" + name + "'");
}

inline const char* moment_method_name(MomentMethod m)
{
    switch (m) {
    case MomentMethod::automatic:
        return "automatic";
    case MomentMethod::series_fixed:
        return "series";
    case MomentMethod::quadrature:
        return "quadrature";
    }
    return "?";
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j)
{
    static const std::set<std::string> known = {
        "T", "duration", "target_init_pos", "target_heading", "target_speed", "observer_speed",
        "observer_heading_initial", "observer_heading_final", "maneuver_time", "q_tilde", "sigma_r",
        "sigma_theta", "N", "M", "L", "runs", "master_seed", "moment_method"};
    if (!j.is_object())
        throw std::invalid_argument("scenario config: top level must be an object");
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            throw std::invalid_argument("scenario config: unknown key '" + item.key() + "'");

    ScenarioConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key))
            j.at(key).get_to(field);
    };
    try {
        get("T", cfg.T);
        get("duration", cfg.duration);
        if (j.contains("target_init_pos")) {
            const auto& p = j.at("target_init_pos");
            if (!p.is_array() || p.size() != 2)
                throw std::invalid_argument("scenario config: target_init_pos must be [x, y]");
            cfg.target_init_pos = {p[0].get<double>(), p[1].get<double>()};
        }
        get("target_heading", cfg.target_heading);
        get("target_speed", cfg.target_speed);
        get("observer_speed", cfg.observer_speed);
        get("observer_heading_initial", cfg.observer_heading_initial);
        get("observer_heading_final", cfg.observer_heading_final);
        get("maneuver_time", cfg.maneuver_time);
        get("q_tilde", cfg.q_tilde);
        get("sigma_r", cfg.sigma_r);
        get("sigma_theta", cfg.sigma_theta);
        get("N", cfg.N);
        get("M", cfg.M);
        get("L", cfg.L);
        get("runs", cfg.runs);
        get("master_seed", cfg.master_seed);
        if (j.contains("moment_method"))
            cfg.moment_method = parse_moment_method(j.at("moment_method").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("scenario config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& cfg)
{
    return {{"T", cfg.T},
            {"duration", cfg.duration},
            {"target_init_pos", {cfg.target_init_pos.x(), cfg.target_init_pos.y()}},
            {"target_heading", cfg.target_heading},
            {"target_speed", cfg.target_speed},
            {"observer_speed", cfg.observer_speed},
            {"observer_heading_initial", cfg.observer_heading_initial},
            {"observer_heading_final", cfg.observer_heading_final},
            {"maneuver_time", cfg.maneuver_time},
            {"q_tilde", cfg.q_tilde},
            {"sigma_r", cfg.sigma_r},
            {"sigma_theta", cfg.sigma_theta},
            {"N", cfg.N},
            {"M", cfg.M},
            {"L", cfg.L},
            {"runs", cfg.runs},
            {"master_seed", cfg.master_seed},
            {"moment_method", moment_method_name(cfg.moment_method)}};
}

inline ScenarioConfig load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config file '" + path + "': " + e.what());
    }
    return scenario_from_json(j);
}

} // namespace rot
