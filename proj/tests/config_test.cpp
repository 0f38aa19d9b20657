#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "vtmig/config.hpp"

namespace {

std::string write_temp(const std::string& body) {
    static int counter = 0;
    const std::string path =
        (std::filesystem::temp_directory_path() / ("vtmig_cfg_" + std::to_string(counter++) + ".cfg"))
            .string();
    std::ofstream out(path);
    out << body;
    return path;
}

TEST(Config, DefaultsMatchReferenceSetup) {
    const auto cfg = vtmig::load_config(write_temp("# empty\n"));
    EXPECT_EQ(cfg.vehicles, 100);
    EXPECT_EQ(cfg.edges, 10);
    EXPECT_EQ(cfg.clouds, 3);
    EXPECT_DOUBLE_EQ(cfg.gamma, 0.95);
    EXPECT_EQ(cfg.episodes, 3000);
    EXPECT_EQ(cfg.steps_per_episode, 100);
    EXPECT_EQ(cfg.replay_capacity, 100000);
    EXPECT_EQ(cfg.batch_size, 128);
    EXPECT_DOUBLE_EQ(cfg.actor_lr, 1e-4);
    EXPECT_DOUBLE_EQ(cfg.critic_lr, 1e-3);
    EXPECT_DOUBLE_EQ(cfg.tau, 1e-3);
    EXPECT_DOUBLE_EQ(cfg.task_size_min_mb, 10.0);
    EXPECT_DOUBLE_EQ(cfg.task_size_max_mb, 50.0);
    EXPECT_DOUBLE_EQ(cfg.task_cycles_min_gc, 0.6);
    EXPECT_DOUBLE_EQ(cfg.task_cycles_max_gc, 1.6);
    EXPECT_DOUBLE_EQ(cfg.edge_bandwidth_hz, 20e6);
    EXPECT_DOUBLE_EQ(cfg.cloud_bandwidth_hz, 100e6);
    EXPECT_DOUBLE_EQ(cfg.price_min_per_mb, 0.30);
    EXPECT_DOUBLE_EQ(cfg.price_max_per_mb, 0.50);
    // speeds 36..108 km/h in m/s
    EXPECT_DOUBLE_EQ(cfg.speed_min_mps, 10.0);
    EXPECT_DOUBLE_EQ(cfg.speed_max_mps, 30.0);
}

TEST(Config, OverridesAndLists) {
    const auto cfg = vtmig::load_config(write_temp(
        "vehicles = 10\nedges = 3\nclouds = 1\nseeds = 1, 2, 3\n"
        "sweep_task_size_mb = 10, 30, 50\nprice_mode = per_cycle\nlog_step_metrics = false\n"));
    EXPECT_EQ(cfg.vehicles, 10);
    ASSERT_EQ(cfg.seeds.size(), 3u);
    EXPECT_EQ(cfg.seeds[1], 2u);
    ASSERT_EQ(cfg.sweep_task_size_mb.size(), 3u);
    EXPECT_DOUBLE_EQ(cfg.sweep_task_size_mb[2], 50.0);
    EXPECT_EQ(cfg.price_mode, vtmig::PriceMode::PerCycle);
    EXPECT_FALSE(cfg.log_step_metrics);
}

TEST(Config, MissingFileFails) {
    EXPECT_THROW(vtmig::load_config("/nonexistent/vtmig.cfg"), vtmig::ConfigError);
}

TEST(Config, UnknownKeyNamesOffender) {
    try {
        vtmig::load_config(write_temp("vehicless = 10\n"));
        FAIL() << "expected ConfigError";
    } catch (const vtmig::ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("vehicless"), std::string::npos);
    }
}

TEST(Config, GammaRangeMessage) {
    try {
        vtmig::load_config(write_temp("gamma = 1.5\n"));
        FAIL() << "expected ConfigError";
    } catch (const vtmig::ConfigError& e) {
        EXPECT_STREQ(e.what(), "gamma out of (0,1)");
    }
}

TEST(Config, EmptyRangeRejected) {
    EXPECT_THROW(vtmig::load_config(write_temp("task_size_min_mb = 50\ntask_size_max_mb = 10\n")),
                 vtmig::ConfigError);
}

TEST(Config, HashTracksContent) {
    const auto a = vtmig::load_config(write_temp("vehicles = 10\n"));
    const auto b = vtmig::load_config(write_temp("vehicles = 10\n"));
    const auto c = vtmig::load_config(write_temp("vehicles = 11\n"));
    EXPECT_EQ(vtmig::config_hash(a), vtmig::config_hash(b));
    EXPECT_NE(vtmig::config_hash(a), vtmig::config_hash(c));
}

}  // namespace
