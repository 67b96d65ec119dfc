#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "murk/config.hpp"
#include "murk/geom.hpp"
#include "murk/rng.hpp"

namespace murk {

// Rocks are axis-aligned ellipsoids resting on the seabed plane: analytic
// ray intersection, no meshes.
struct Rock {
    Vec3 center;       // meters
    Vec3 radii;        // semi-axes, meters
    double albedo = 0.5;
    int instance_id = 0;  // unique within a scene, > 0 (0 = background)

    friend bool operator==(const Rock&, const Rock&) = default;
};

struct Particle {
    Vec3 position;  // meters
    double radius = 0.0;
    double brightness = 0.0;

    friend bool operator==(const Particle&, const Particle&) = default;
};

struct CameraPose {
    Vec3 position;
    double yaw = 0.0;    // radians, about world +z
    double pitch = 0.0;  // radians, positive looks up
    double time = 0.0;   // seconds

    friend bool operator==(const CameraPose&, const CameraPose&) = default;
};

struct Scene {
    std::vector<Rock> rocks;
    std::vector<Particle> particles;
    SceneConfig config;
};

// The world bounding volume for particles is the half-open box
// [0, extent_x) x [0, extent_y) x [seabed_depth, 0); advection wraps on it
// with torus topology.
inline double wrap_coord(double v, double lo, double hi) {
    const double span = hi - lo;
    double r = std::fmod(v - lo, span);
    if (r < 0.0) r += span;
    return lo + r;
}

inline Scene generate_scene(const SceneConfig& config) {
    PipelineConfig wrapper;
    wrapper.scene = config;
    validate_config(wrapper);

    Scene scene;
    scene.config = config;
    scene.rocks.reserve(static_cast<std::size_t>(config.rock_count));
    for (int k = 0; k < config.rock_count; ++k) {
        CounterRng rng(config.seed, RngStream::kRocks, static_cast<std::uint64_t>(k));
        Rock rock;
        const double cx = rng.uniform(0.0, config.world_extent_x);
        const double cy = rng.uniform(0.0, config.world_extent_y);
        rock.radii.x = rng.uniform(config.rock_radius_min, config.rock_radius_max);
        rock.radii.y = rng.uniform(config.rock_radius_min, config.rock_radius_max);
        rock.radii.z = rng.uniform(config.rock_radius_min, config.rock_radius_max);
        rock.albedo = rng.uniform(0.25, 0.9);
        rock.center = {cx, cy, config.seabed_depth + rock.radii.z};
        rock.instance_id = k + 1;
        scene.rocks.push_back(rock);
    }
    scene.particles.reserve(static_cast<std::size_t>(config.particle_count));
    const double base_radius = config.particle_radius_base * config.particle_scale;
    for (int i = 0; i < config.particle_count; ++i) {
        CounterRng rng(config.seed, RngStream::kParticles,
                       static_cast<std::uint64_t>(i));
        Particle p;
        p.position.x = rng.uniform(0.0, config.world_extent_x);
        p.position.y = rng.uniform(0.0, config.world_extent_y);
        p.position.z = rng.uniform(config.seabed_depth, 0.0);
        const double jitter = rng.uniform(0.5, 1.5);
        p.radius = base_radius * jitter;
        p.brightness = rng.uniform(0.25, 1.0);
        scene.particles.push_back(p);
    }
    return scene;
}

// Piecewise-linear position, shortest-arc yaw, linear pitch. Waypoint times
// return the stored pose exactly.
inline CameraPose camera_pose_at(const SceneConfig& config, double t) {
    const auto& wp = config.camera_waypoints;
    if (wp.empty()) throw std::invalid_argument("camera_pose_at: no waypoints");
    if (t < wp.front().time - 1e-12 || t > wp.back().time + 1e-12)
        throw std::out_of_range("camera_pose_at: time " + std::to_string(t) +
                                " outside waypoint range");
    for (const Waypoint& w : wp)
        if (t == w.time) return {w.position, w.yaw, w.pitch, t};
    t = std::clamp(t, wp.front().time, wp.back().time);
    std::size_t hi = 1;
    while (hi + 1 < wp.size() && wp[hi].time < t) ++hi;
    const Waypoint& a = wp[hi - 1];
    const Waypoint& b = wp[hi];
    const double u = (t - a.time) / (b.time - a.time);
    CameraPose pose;
    pose.position = a.position + (b.position - a.position) * u;
    double dyaw = b.yaw - a.yaw;
    constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
    dyaw -= kTwoPi * std::round(dyaw / kTwoPi);  // shortest arc
    pose.yaw = a.yaw + u * dyaw;
    pose.pitch = a.pitch + u * (b.pitch - a.pitch);
    pose.time = t;
    return pose;
}

inline Scene advect_particles(const Scene& scene, double dt) {
    if (dt < 0.0) throw std::invalid_argument("advect_particles: dt must be >= 0");
    Scene out = scene;
    const SceneConfig& c = scene.config;
    const Vec3 step = c.particle_drift * dt;
    for (Particle& p : out.particles) {
        p.position.x = wrap_coord(p.position.x + step.x, 0.0, c.world_extent_x);
        p.position.y = wrap_coord(p.position.y + step.y, 0.0, c.world_extent_y);
        p.position.z = wrap_coord(p.position.z + step.z, c.seabed_depth, 0.0);
    }
    return out;
}

// Line-oriented manifest served for golden-file tests and the stage handoff.
// Floats are %.17g so a parse round-trips bit-exactly.
inline std::string scene_to_manifest(const Scene& scene,
                                     const std::string& config_hash_hex = {}) {
    using detail::fmt_double;
    std::ostringstream o;
    o << "# murk scene v1\n";
    if (!config_hash_hex.empty()) o << "# config " << config_hash_hex << "\n";
    for (const Rock& r : scene.rocks) {
        o << "rock " << r.instance_id << ' ' << fmt_double(r.center.x) << ' '
          << fmt_double(r.center.y) << ' ' << fmt_double(r.center.z) << ' '
          << fmt_double(r.radii.x) << ' ' << fmt_double(r.radii.y) << ' '
          << fmt_double(r.radii.z) << ' ' << fmt_double(r.albedo) << "\n";
    }
    for (const Particle& p : scene.particles) {
        o << "particle " << fmt_double(p.position.x) << ' ' << fmt_double(p.position.y)
          << ' ' << fmt_double(p.position.z) << ' ' << fmt_double(p.radius) << ' '
          << fmt_double(p.brightness) << "\n";
    }
    return o.str();
}

// `expected_config_hash`, when non-empty, must match the hash recorded in the
// manifest; catches stale artifacts when stages run with a different config.
inline Scene scene_from_manifest(const std::string& text, const SceneConfig& config,
                                 const std::string& expected_config_hash = {}) {
    Scene scene;
    scene.config = config;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line);
            std::string hash_tag, kind, hash;
            ls >> hash_tag >> kind >> hash;
            if (kind == "config" && !expected_config_hash.empty() &&
                hash != expected_config_hash)
                throw std::runtime_error(
                    "scene manifest was generated from a different config (hash " +
                    hash + ", expected " + expected_config_hash + ")");
            continue;
        }
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "rock") {
            Rock r;
            ls >> r.instance_id >> r.center.x >> r.center.y >> r.center.z >>
                r.radii.x >> r.radii.y >> r.radii.z >> r.albedo;
            if (!ls) throw std::runtime_error("scene manifest: bad rock at line " +
                                              std::to_string(lineno));
            scene.rocks.push_back(r);
        } else if (kind == "particle") {
            Particle p;
            ls >> p.position.x >> p.position.y >> p.position.z >> p.radius >>
                p.brightness;
            if (!ls) throw std::runtime_error("scene manifest: bad particle at line " +
                                              std::to_string(lineno));
            scene.particles.push_back(p);
        } else {
            throw std::runtime_error("scene manifest: unknown record '" + kind +
                                     "' at line " + std::to_string(lineno));
        }
    }
    return scene;
}

}  // namespace murk
