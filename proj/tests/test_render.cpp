#include "murk/render.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using murk::CameraPose;
using murk::Scene;
using murk::SceneConfig;

SceneConfig small_config() {
    SceneConfig sc;
    sc.width = 160;
    sc.height = 120;
    sc.rock_count = 0;
    sc.particle_count = 0;
    sc.duration = 1.0;
    sc.fps = 30.0;
    sc.camera_waypoints = {{0.0, {10.0, 10.0, -3.0}, 0.0, -0.6},
                           {1.0, {10.3, 10.0, -3.0}, 0.0, -0.6}};
    return sc;
}

Scene bare_scene(const SceneConfig& sc) {
    Scene scene;
    scene.config = sc;
    return scene;
}

TEST(Attenuate, AnalyticCases) {
    EXPECT_DOUBLE_EQ(murk::attenuate(7.0, 0.4, 0.0), 7.0);
    EXPECT_DOUBLE_EQ(murk::attenuate(1.0, 0.0, 100.0), 1.0);
    EXPECT_NEAR(murk::attenuate(2.0, std::log(2.0), 1.0), 1.0, 1e-12);
}

TEST(Project, PrincipalPointOnOpticalAxis) {
    CameraPose pose{{10.0, 10.0, -3.0}, 0.0, 0.0, 0.0};
    const murk::CameraBasis basis = murk::camera_basis(pose);
    const murk::Vec3 point = pose.position + basis.forward * 2.0;
    const auto px = murk::project(point, pose, 70.0, 320, 240);
    ASSERT_TRUE(px.has_value());
    EXPECT_NEAR(px->x, 160.0, 1e-9);
    EXPECT_NEAR(px->y, 120.0, 1e-9);
}

TEST(Project, BehindCameraIsNone) {
    CameraPose pose{{0.0, 0.0, 0.0}, 0.0, 0.0, 0.0};
    const murk::CameraBasis basis = murk::camera_basis(pose);
    EXPECT_FALSE(murk::project(pose.position - basis.forward * 1.0, pose, 70.0, 320,
                               240)
                     .has_value());
}

// Point one unit right, two units ahead, 90 degree fov, 200 px wide:
// x = 100 + 100 * (1/2) = 150.
TEST(Project, HandEvaluatedTangentCase) {
    CameraPose pose{{0.0, 0.0, 0.0}, 0.0, 0.0, 0.0};
    const murk::CameraBasis basis = murk::camera_basis(pose);
    const murk::Vec3 point =
        pose.position + basis.right * 1.0 + basis.forward * 2.0;
    const auto px = murk::project(point, pose, 90.0, 200, 100);
    ASSERT_TRUE(px.has_value());
    EXPECT_NEAR(px->x, 150.0, 1e-9);
    EXPECT_NEAR(px->y, 50.0, 1e-9);
}

TEST(RenderFrame, BackgroundOnlySpotlightDisk) {
    SceneConfig sc = small_config();
    sc.spotlight_cone_deg = 30.0;
    sc.fov_deg = 90.0;
    const Scene scene = bare_scene(sc);
    const CameraPose pose = murk::camera_pose_at(sc, 0.0);
    murk::RenderParams rp;
    rp.ambient_level = 0.0;
    auto [frame, mask] = murk::render_frame(scene, pose, rp);

    for (std::uint16_t label : mask.labels) EXPECT_EQ(label, 0);
    // Center of the image looks down the cone axis at the seabed: lit.
    EXPECT_GT(frame.at(sc.width / 2, sc.height / 2), 0.0f);
    // Corners are far outside the 30 degree cone: dark.
    EXPECT_EQ(frame.at(0, 0), 0.0f);
    EXPECT_EQ(frame.at(sc.width - 1, 0), 0.0f);
    EXPECT_EQ(frame.at(0, sc.height - 1), 0.0f);
    EXPECT_EQ(frame.at(sc.width - 1, sc.height - 1), 0.0f);
    // Some pixel is nonzero but not all: the lit region is a bounded disk.
    std::size_t lit = 0;
    for (float v : frame.pixels) {
        EXPECT_GE(v, 0.0f);
        ASSERT_TRUE(std::isfinite(v));
        if (v > 0.0f) ++lit;
    }
    EXPECT_GT(lit, 0u);
    EXPECT_LT(lit, frame.pixels.size());
}

TEST(RenderFrame, AmbientFloorLiftsOutsideCone) {
    SceneConfig sc = small_config();
    sc.spotlight_cone_deg = 20.0;
    sc.fov_deg = 90.0;
    const Scene scene = bare_scene(sc);
    const CameraPose pose = murk::camera_pose_at(sc, 0.0);
    murk::RenderParams rp;
    rp.ambient_level = 0.01;
    auto [frame, mask] = murk::render_frame(scene, pose, rp);
    // Bottom corners see the seabed outside the cone; ambient keeps them lit.
    EXPECT_GT(frame.at(0, sc.height - 1), 0.0f);
    EXPECT_GT(frame.at(sc.width - 1, sc.height - 1), 0.0f);
}

TEST(RenderFrame, RockOnAxisMakesCenteredBlob) {
    SceneConfig sc = small_config();
    sc.width = 200;
    sc.height = 200;
    sc.camera_waypoints = {{0.0, {5.0, 10.0, -3.0}, 0.0, 0.0},
                           {1.0, {5.0, 10.0, -3.0}, 0.0, 0.0}};
    Scene scene = bare_scene(sc);
    murk::Rock rock;
    rock.center = {8.0, 10.0, -3.0};  // 3 m straight ahead on the optical axis
    rock.radii = {0.4, 0.4, 0.4};
    rock.albedo = 0.8;
    rock.instance_id = 7;
    scene.rocks.push_back(rock);

    const CameraPose pose = murk::camera_pose_at(sc, 0.0);
    auto [frame, mask] = murk::render_frame(scene, pose, {});

    double sum_x = 0.0, sum_y = 0.0;
    long count = 0;
    bool contiguous_center = mask.at(100, 100) == 7;
    for (int y = 0; y < sc.height; ++y) {
        for (int x = 0; x < sc.width; ++x) {
            if (mask.at(x, y) == 7) {
                sum_x += x + 0.5;
                sum_y += y + 0.5;
                ++count;
            } else {
                EXPECT_EQ(mask.at(x, y), 0);
            }
        }
    }
    ASSERT_GT(count, 0);
    EXPECT_TRUE(contiguous_center);
    EXPECT_NEAR(sum_x / count, 100.0, 1.0);
    EXPECT_NEAR(sum_y / count, 100.0, 1.0);
}

TEST(RenderFrame, DeterministicAcrossRunsAndThreads) {
    SceneConfig sc = small_config();
    sc.rock_count = 8;
    sc.particle_count = 300;
    const Scene scene = murk::generate_scene(sc);
    const CameraPose pose = murk::camera_pose_at(sc, 0.5);
    murk::RenderParams one;
    one.threads = 1;
    murk::RenderParams many;
    many.threads = 5;
    auto [fa, ma] = murk::render_frame(scene, pose, one);
    auto [fb, mb] = murk::render_frame(scene, pose, many);
    auto [fc, mc] = murk::render_frame(scene, pose, one);
    EXPECT_EQ(fa.pixels, fb.pixels);
    EXPECT_EQ(fa.pixels, fc.pixels);
    EXPECT_EQ(ma.labels, mb.labels);
}

// Doubling the attenuation coefficient can only dim pixels.
TEST(RenderFrame, EnergyMonotoneInAttenuation) {
    SceneConfig sc = small_config();
    sc.rock_count = 6;
    sc.particle_count = 200;
    Scene scene = murk::generate_scene(sc);
    const CameraPose pose = murk::camera_pose_at(sc, 0.0);
    auto [lo, _m1] = murk::render_frame(scene, pose, {});
    scene.config.attenuation_coeff *= 2.0;
    auto [hi, _m2] = murk::render_frame(scene, pose, {});
    for (std::size_t i = 0; i < lo.pixels.size(); ++i)
        ASSERT_LE(hi.pixels[i], lo.pixels[i]);
}

// Rock-labeled pixels inside the cone facing the light must be lit, even
// with no ambient floor.
TEST(RenderFrame, MaskImpliesLuminanceInsideCone) {
    SceneConfig sc = small_config();
    sc.rock_count = 10;
    sc.particle_count = 0;
    const Scene scene = murk::generate_scene(sc);
    const CameraPose pose = murk::camera_pose_at(sc, 0.0);
    murk::RenderParams rp;
    rp.ambient_level = 0.0;
    auto [frame, mask] = murk::render_frame(scene, pose, rp);

    const murk::CameraBasis basis = murk::camera_basis(pose);
    const double f = murk::focal_px(sc.fov_deg, sc.width);
    const double half_cone = murk::deg_to_rad(sc.spotlight_cone_deg) / 2.0;
    for (int y = 0; y < sc.height; ++y) {
        for (int x = 0; x < sc.width; ++x) {
            if (mask.at(x, y) == 0) continue;
            const double sx = (x + 0.5 - sc.width / 2.0) / f;
            const double sy = (y + 0.5 - sc.height / 2.0) / f;
            const murk::Vec3 dir = murk::normalized(
                basis.forward + basis.right * sx + basis.down * sy);
            const double angle = std::acos(std::clamp(dot(dir, basis.forward), -1.0, 1.0));
            if (angle < half_cone * 0.999) ASSERT_GT(frame.at(x, y), 0.0f);
        }
    }
}

TEST(MaskToBoxes, EmptyAndHandBuiltCases) {
    murk::LabelMask mask;
    mask.width = 32;
    mask.height = 24;
    mask.labels.assign(32 * 24, 0);
    EXPECT_TRUE(murk::mask_to_boxes(mask, 1).empty());

    // Label 7 occupying x in [10,20), y in [10,15): box (10,10,20,15), area 50.
    for (int y = 10; y < 15; ++y)
        for (int x = 10; x < 20; ++x) mask.at(x, y) = 7;
    const auto boxes = murk::mask_to_boxes(mask, 1);
    ASSERT_EQ(boxes.size(), 1u);
    EXPECT_EQ(boxes[0],
              (murk::GroundTruthBox{7, 10, 10, 20, 15, 50}));

    // A 3-pixel label is dropped at min area 16.
    mask.at(0, 0) = 3;
    mask.at(1, 0) = 3;
    mask.at(2, 0) = 3;
    const auto filtered = murk::mask_to_boxes(mask, 16);
    ASSERT_EQ(filtered.size(), 1u);
    EXPECT_EQ(filtered[0].instance_id, 7);
}

TEST(MaskToBoxes, BoxesAreTight) {
    SceneConfig sc = small_config();
    sc.rock_count = 10;
    const Scene scene = murk::generate_scene(sc);
    auto [frame, mask] = murk::render_frame(scene, murk::camera_pose_at(sc, 0.0), {});
    for (const murk::GroundTruthBox& b : murk::mask_to_boxes(mask, 1)) {
        bool on_left = false, on_right = false, on_top = false, on_bottom = false;
        for (int y = b.y_min; y < b.y_max; ++y) {
            if (mask.at(b.x_min, y) == b.instance_id) on_left = true;
            if (mask.at(b.x_max - 1, y) == b.instance_id) on_right = true;
        }
        for (int x = b.x_min; x < b.x_max; ++x) {
            if (mask.at(x, b.y_min) == b.instance_id) on_top = true;
            if (mask.at(x, b.y_max - 1) == b.instance_id) on_bottom = true;
        }
        EXPECT_TRUE(on_left && on_right && on_top && on_bottom);
    }
}

TEST(RenderSequence, TimestampsAndFrameCount) {
    SceneConfig sc = small_config();
    sc.duration = 1.0;
    sc.fps = 30.0;
    const Scene scene = bare_scene(sc);
    const auto seq = murk::render_sequence(scene, {});
    ASSERT_EQ(seq.size(), 30u);
    for (std::size_t k = 0; k < seq.size(); ++k)
        EXPECT_DOUBLE_EQ(seq[k].first.timestamp, static_cast<double>(k) / 30.0);
}

TEST(RenderSequence, StaticSceneFreezesFrames) {
    SceneConfig sc = small_config();
    sc.rock_count = 4;
    sc.particle_count = 50;
    sc.particle_drift = {0.0, 0.0, 0.0};
    sc.duration = 0.2;
    sc.fps = 15.0;
    sc.camera_waypoints = {{0.0, {10.0, 10.0, -3.0}, 0.0, -0.6},
                           {0.2, {10.0, 10.0, -3.0}, 0.0, -0.6}};
    const Scene scene = murk::generate_scene(sc);
    const auto seq = murk::render_sequence(scene, {});
    ASSERT_EQ(seq.size(), 3u);
    for (std::size_t k = 1; k < seq.size(); ++k) {
        EXPECT_EQ(seq[k].first.pixels, seq[0].first.pixels);
        EXPECT_EQ(seq[k].second.labels, seq[0].second.labels);
    }
}

// Frame k of a sequence must equal an independent single-frame render of the
// advected scene at the same pose.
TEST(RenderSequence, MatchesSingleFrameOracle) {
    SceneConfig sc = small_config();
    sc.rock_count = 5;
    sc.particle_count = 120;
    sc.duration = 1.0;
    sc.fps = 10.0;
    const Scene scene = murk::generate_scene(sc);
    const auto seq = murk::render_sequence(scene, {});
    ASSERT_EQ(seq.size(), 10u);
    for (std::size_t k : {1ul, 4ul, 9ul}) {
        const double t = static_cast<double>(k) / sc.fps;
        auto [frame, mask] = murk::render_frame(murk::advect_particles(scene, t),
                                                murk::camera_pose_at(sc, t), {});
        EXPECT_EQ(seq[k].first.pixels, frame.pixels);
        EXPECT_EQ(seq[k].second.labels, mask.labels);
    }
}

TEST(RenderSequence, TooFewFramesThrows) {
    SceneConfig sc = small_config();
    sc.duration = 0.02;
    sc.fps = 30.0;
    sc.camera_waypoints = {{0.0, {10.0, 10.0, -3.0}, 0.0, -0.6},
                           {0.02, {10.0, 10.0, -3.0}, 0.0, -0.6}};
    const Scene scene = bare_scene(sc);
    EXPECT_THROW(murk::render_sequence(scene, {}), std::invalid_argument);
}

}  // namespace
