#include "murk/config.hpp"

#include <gtest/gtest.h>

namespace {

using murk::ConfigError;
using murk::parse_config;
using murk::PipelineConfig;

TEST(Config, ParsesKeysCommentsAndTuples) {
    const std::string text = R"(
# scene
seed = 9
world_extent = (12, 8)
rock_count = 3          # inline comment
rock_radius_range = (0.1, 0.4)
particle_drift = (0.1, -0.2, 0.05)
camera_waypoints = (0, 1, 2, -3, 0, -0.5), (4, 2, 2, -3, 0.1, -0.5)
duration = 4
theta_on = 0.3
noise_enabled = true
)";
    const PipelineConfig cfg = parse_config(text);
    EXPECT_EQ(cfg.scene.seed, 9u);
    EXPECT_DOUBLE_EQ(cfg.scene.world_extent_x, 12.0);
    EXPECT_DOUBLE_EQ(cfg.scene.world_extent_y, 8.0);
    EXPECT_EQ(cfg.scene.rock_count, 3);
    EXPECT_DOUBLE_EQ(cfg.scene.rock_radius_min, 0.1);
    EXPECT_DOUBLE_EQ(cfg.scene.rock_radius_max, 0.4);
    EXPECT_DOUBLE_EQ(cfg.scene.particle_drift.y, -0.2);
    ASSERT_EQ(cfg.scene.camera_waypoints.size(), 2u);
    EXPECT_DOUBLE_EQ(cfg.scene.camera_waypoints[1].time, 4.0);
    EXPECT_DOUBLE_EQ(cfg.scene.camera_waypoints[1].yaw, 0.1);
    EXPECT_DOUBLE_EQ(cfg.dvs.theta_on, 0.3);
    EXPECT_TRUE(cfg.dvs.noise_enabled);
}

TEST(Config, DefaultsAreValidAndWaypointsDerived) {
    const PipelineConfig cfg = parse_config("");
    EXPECT_EQ(cfg.scene.width, 320);
    EXPECT_EQ(cfg.scene.height, 240);
    ASSERT_EQ(cfg.scene.camera_waypoints.size(), 2u);
    EXPECT_DOUBLE_EQ(cfg.scene.camera_waypoints.front().time, 0.0);
    EXPECT_DOUBLE_EQ(cfg.scene.camera_waypoints.back().time, cfg.scene.duration);
    EXPECT_NO_THROW(murk::validate_config(cfg));
}

TEST(Config, UnknownKeyNamesLine) {
    try {
        parse_config("seed = 1\nbogus_key = 2\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("bogus_key"), std::string::npos);
    }
}

TEST(Config, MalformedLineAndValueErrors) {
    EXPECT_THROW(parse_config("seed\n"), ConfigError);
    EXPECT_THROW(parse_config("seed = abc\n"), ConfigError);
    EXPECT_THROW(parse_config("rock_count = 2.5\n"), ConfigError);
    EXPECT_THROW(parse_config("world_extent = (1, 2, 3)\n"), ConfigError);
    EXPECT_THROW(parse_config("camera_waypoints = (0, 1, 2)\n"), ConfigError);
    EXPECT_THROW(parse_config("noise_enabled = maybe\n"), ConfigError);
}

TEST(Config, ValidationNamesViolatedField) {
    auto expect_field = [](const std::string& text, const std::string& field) {
        try {
            parse_config(text);
            FAIL() << "expected ConfigError for " << field;
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find(field), std::string::npos)
                << e.what();
        }
    };
    expect_field("rock_radius_range = (0, 0.5)\n", "rock_radius_range");
    expect_field("rock_radius_range = (0.5, 0.2)\n", "rock_radius_range");
    expect_field("particle_scale = 0\n", "particle_scale");
    expect_field("attenuation_coeff = -1\n", "attenuation_coeff");
    expect_field("fps = 0\n", "fps");
    expect_field("width = 8\n", "width");
    expect_field("seabed_depth = 1\n", "seabed_depth");
    expect_field("duration = 5\ncamera_waypoints = (0,1,1,-3,0,0), (2,2,1,-3,0,0)\n",
                 "camera_waypoints");
    expect_field("camera_waypoints = (0,1,1,-3,0,0), (0,2,1,-3,0,0)\nduration = 0.001\n",
                 "camera_waypoints");
}

TEST(Config, CanonicalTextRoundTripsAndHashesStably) {
    PipelineConfig cfg = parse_config("seed = 77\nparticle_scale = 2.5\nfps = 12.5\n");
    const std::string canon = murk::canonical_config_text(cfg);
    const PipelineConfig reparsed = parse_config(canon);
    EXPECT_EQ(cfg, reparsed);
    EXPECT_EQ(murk::config_hash(cfg), murk::config_hash(reparsed));
}

TEST(Config, HashChangesWithAnyFieldFlip) {
    const PipelineConfig base = parse_config("");
    const std::uint64_t h0 = murk::config_hash(base);

    PipelineConfig c = base;
    c.scene.seed += 1;
    EXPECT_NE(murk::config_hash(c), h0);

    c = base;
    c.scene.particle_scale = 2.0;
    EXPECT_NE(murk::config_hash(c), h0);

    c = base;
    c.dvs.theta_off = 0.25;
    EXPECT_NE(murk::config_hash(c), h0);

    c = base;
    c.window_us += 1;
    EXPECT_NE(murk::config_hash(c), h0);

    c = base;
    c.scene.camera_waypoints[1].pitch += 0.01;
    EXPECT_NE(murk::config_hash(c), h0);

    c = base;
    EXPECT_EQ(murk::config_hash(c), h0);
}

TEST(Config, MinVisibleAreaScalesWithResolution) {
    PipelineConfig cfg = parse_config("");
    EXPECT_EQ(murk::resolved_min_visible_area(cfg), 16);
    cfg.scene.width = 1920;
    cfg.scene.height = 1080;
    EXPECT_EQ(murk::resolved_min_visible_area(cfg), 432);  // 16 * (1920*1080)/(320*240)
    cfg.min_visible_area = 5;
    EXPECT_EQ(murk::resolved_min_visible_area(cfg), 5);
}

}  // namespace
