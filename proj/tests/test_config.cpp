#include "rot/config.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace rot;
using nlohmann::json;

TEST(Config, EmptyObjectGivesDefaults)
{
    const auto cfg = scenario_from_json(json::object());
    const ScenarioConfig def;
    EXPECT_EQ(scenario_to_json(cfg), scenario_to_json(def));
}

TEST(Config, RoundTrip)
{
    ScenarioConfig cfg;
    cfg.T = 30.0;
    cfg.duration = 50;
    cfg.target_init_pos = {1000.5, -2000.25};
    cfg.q_tilde = 0.0;
    cfg.L = 3;
    cfg.runs = 7;
    cfg.master_seed = 12345678901ull;
    cfg.moment_method = MomentMethod::quadrature;
    const auto back = scenario_from_json(json::parse(scenario_to_json(cfg).dump()));
    EXPECT_EQ(scenario_to_json(back), scenario_to_json(cfg));
    EXPECT_EQ(back.target_init_pos, cfg.target_init_pos);
    EXPECT_EQ(back.master_seed, cfg.master_seed);
    EXPECT_EQ(back.moment_method, MomentMethod::quadrature);
}

TEST(Config, PartialOverride)
{
    const auto cfg = scenario_from_json(json{{"runs", 3}, {"moment_method", "series"}});
    EXPECT_EQ(cfg.runs, 3);
    EXPECT_EQ(cfg.moment_method, MomentMethod::series_fixed);
    EXPECT_EQ(cfg.L, ScenarioConfig{}.L);
}

TEST(Config, Rejections)
{
    EXPECT_THROW(scenario_from_json(json{{"run", 3}}), std::invalid_argument);
    EXPECT_THROW(scenario_from_json(json{{"moment_method", "magic"}}), std::invalid_argument);
    EXPECT_THROW(scenario_from_json(json{{"runs", "three"}}), std::invalid_argument);
    EXPECT_THROW(scenario_from_json(json{{"target_init_pos", {1.0}}}), std::invalid_argument);
    EXPECT_THROW(scenario_from_json(json{{"target_init_pos", 5.0}}), std::invalid_argument);
    EXPECT_THROW(scenario_from_json(json{{"runs", 0}}), std::invalid_argument);
    EXPECT_THROW(scenario_from_json(json::array()), std::invalid_argument);
}

TEST(Config, LoadScenarioFile)
{
    const auto dir = std::filesystem::temp_directory_path();
    const auto good = dir / "rot_test_config_good.json";
    const auto bad = dir / "rot_test_config_bad.json";
    std::ofstream(good) << R"({"runs": 4, "sigma_r": 5})";
    std::ofstream(bad) << R"({"runs": 4,)";
    const auto cfg = load_scenario(good.string());
    EXPECT_EQ(cfg.runs, 4);
    EXPECT_EQ(cfg.sigma_r, 5.0);
    EXPECT_THROW(load_scenario(bad.string()), std::invalid_argument);
    EXPECT_THROW(load_scenario((dir / "rot_no_such_file.json").string()), std::runtime_error);
    std::filesystem::remove(good);
    std::filesystem::remove(bad);
}

TEST(Config, MethodNames)
{
    for (auto m : {MomentMethod::automatic, MomentMethod::series_fixed, MomentMethod::quadrature})
        EXPECT_EQ(parse_moment_method(moment_method_name(m)), m);
}
