#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "murk/geom.hpp"
#include "murk/rng.hpp"

namespace murk {

struct Waypoint {
    double time = 0.0;   // seconds
    Vec3 position;       // meters
    double yaw = 0.0;    // radians
    double pitch = 0.0;  // radians

    friend constexpr bool operator==(const Waypoint&, const Waypoint&) = default;
};

struct SceneConfig {
    std::uint64_t seed = 42;
    double world_extent_x = 20.0;  // meters, seabed patch x span
    double world_extent_y = 20.0;  // meters, seabed patch y span
    double seabed_depth = -5.0;    // meters, z of the seabed plane (< 0)
    int rock_count = 25;
    double rock_radius_min = 0.2;  // meters
    double rock_radius_max = 0.8;  // meters
    int particle_count = 5000;
    double particle_radius_base = 0.01;  // meters
    double particle_scale = 1.0;         // sweep domain {1,2,4,8}
    Vec3 particle_drift{0.05, 0.02, 0.0};  // meters/second
    double attenuation_coeff = 0.4;        // 1/meter
    double spotlight_power = 100.0;        // linear radiometric scale
    double spotlight_cone_deg = 50.0;      // full cone angle
    double spotlight_falloff_exp = 1.0;
    std::vector<Waypoint> camera_waypoints;  // empty = default straight pass
    double fov_deg = 70.0;  // horizontal
    int width = 320;
    int height = 240;
    double fps = 30.0;
    double duration = 10.0;  // seconds

    friend bool operator==(const SceneConfig&, const SceneConfig&) = default;
};

// Sensor-model knobs. Thresholds are symmetric by default; the refractory
// window and the log floor keep event bursts bounded on dark pixels.
struct DvsParams {
    double theta_on = 0.2;   // log-radiance contrast threshold, ON
    double theta_off = 0.2;  // log-radiance contrast threshold, OFF
    std::uint64_t refractory_us = 1000;
    double log_eps = 1e-3;       // radiance floor inside the log
    double leak_rate_hz = 0.0;   // leak ON events per pixel per second
    std::uint64_t noise_seed = 7;
    bool noise_enabled = false;

    friend bool operator==(const DvsParams&, const DvsParams&) = default;
};

struct PipelineConfig {
    SceneConfig scene;
    DvsParams dvs;
    double exposure = 60.0;       // linear gain for 8-bit previews
    double ambient_level = 0.001;  // ambient floor relative to spotlight_power
    double seabed_albedo = 0.3;
    int min_visible_area = 0;  // 0 = auto: 16 px at 320x240, scaled by area
    std::uint64_t window_us = 33333;  // event-frame accumulation window
    double density_threshold = 3.0;   // blob detector, events per pixel
    int min_blob_area = 16;
    double split_ratio = 0.8;  // train fraction for dataset export
    double iou_threshold = 0.5;
    int threads = 0;  // 0 = hardware concurrency
    double event_gain = 64.0;  // event-frame image gain

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline int resolved_min_visible_area(const PipelineConfig& cfg) {
    if (cfg.min_visible_area > 0) return cfg.min_visible_area;
    const double scale =
        static_cast<double>(cfg.scene.width) * cfg.scene.height / (320.0 * 240.0);
    const long v = std::lround(16.0 * scale);
    return v < 1 ? 1 : static_cast<int>(v);
}

// Default camera path: a straight pass over the middle of the patch, two
// meters above the seabed, pitched down toward it.
inline std::vector<Waypoint> default_waypoints(const SceneConfig& sc) {
    const double cx = sc.world_extent_x / 2.0;
    const double cy = sc.world_extent_y / 2.0;
    const double z = sc.seabed_depth + 2.0;
    const double half_span = 0.15 * sc.duration;  // 0.3 m/s ground speed
    return {
        {0.0, {cx - half_span, cy, z}, 0.0, -0.6},
        {sc.duration, {cx + half_span, cy, z}, 0.0, -0.6},
    };
}

inline void validate_config(const PipelineConfig& cfg) {
    const SceneConfig& sc = cfg.scene;
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("invalid config: " + field + ": " + why);
    };
    if (sc.world_extent_x <= 0.0 || sc.world_extent_y <= 0.0)
        fail("world_extent", "must be positive");
    if (sc.seabed_depth >= 0.0) fail("seabed_depth", "must be below the surface (< 0)");
    if (sc.rock_count < 0) fail("rock_count", "must be >= 0");
    if (sc.rock_count > 65535) fail("rock_count", "instance ids are 16-bit");
    if (!(sc.rock_radius_min > 0.0)) fail("rock_radius_range", "min must be > 0");
    if (sc.rock_radius_min > sc.rock_radius_max)
        fail("rock_radius_range", "min must be <= max");
    if (sc.particle_count < 0) fail("particle_count", "must be >= 0");
    if (!(sc.particle_radius_base > 0.0)) fail("particle_radius_base", "must be > 0");
    if (!(sc.particle_scale > 0.0)) fail("particle_scale", "must be > 0");
    if (sc.attenuation_coeff < 0.0) fail("attenuation_coeff", "must be >= 0");
    if (sc.spotlight_power < 0.0) fail("spotlight_power", "must be >= 0");
    if (!(sc.spotlight_cone_deg > 0.0) || sc.spotlight_cone_deg > 180.0)
        fail("spotlight_cone_deg", "must be in (0, 180]");
    if (sc.spotlight_falloff_exp < 0.0) fail("spotlight_falloff_exp", "must be >= 0");
    if (!(sc.fov_deg > 0.0) || sc.fov_deg >= 180.0)
        fail("fov_deg", "must be in (0, 180)");
    if (sc.width < 16) fail("width", "must be >= 16");
    if (sc.height < 16) fail("height", "must be >= 16");
    if (sc.width > 65535 || sc.height > 65535)
        fail("width/height", "pixel coordinates are 16-bit");
    if (!(sc.fps > 0.0)) fail("fps", "must be > 0");
    if (!(sc.duration > 0.0)) fail("duration", "must be > 0");
    if (!sc.camera_waypoints.empty()) {
        const auto& wp = sc.camera_waypoints;
        if (wp.size() < 2) fail("camera_waypoints", "need at least 2 waypoints");
        for (std::size_t i = 1; i < wp.size(); ++i)
            if (!(wp[i].time > wp[i - 1].time))
                fail("camera_waypoints", "times must be strictly increasing");
        if (wp.front().time > 1e-9)
            fail("camera_waypoints", "must start at t = 0");
        if (wp.back().time < sc.duration - 1e-9)
            fail("camera_waypoints", "must cover [0, duration]");
    }
    if (!(cfg.dvs.theta_on > 0.0)) fail("theta_on", "must be > 0");
    if (!(cfg.dvs.theta_off > 0.0)) fail("theta_off", "must be > 0");
    if (!(cfg.dvs.log_eps > 0.0)) fail("log_eps", "must be > 0");
    if (cfg.dvs.leak_rate_hz < 0.0) fail("leak_rate_hz", "must be >= 0");
    if (!(cfg.exposure > 0.0)) fail("exposure", "must be > 0");
    if (cfg.ambient_level < 0.0) fail("ambient_level", "must be >= 0");
    if (cfg.seabed_albedo < 0.0 || cfg.seabed_albedo > 1.0)
        fail("seabed_albedo", "must be in [0, 1]");
    if (cfg.min_visible_area < 0) fail("min_visible_area", "must be >= 0 (0 = auto)");
    if (cfg.window_us == 0) fail("window_us", "must be >= 1");
    if (!(cfg.density_threshold > 0.0)) fail("density_threshold", "must be > 0");
    if (cfg.min_blob_area < 1) fail("min_blob_area", "must be >= 1");
    if (cfg.split_ratio < 0.0 || cfg.split_ratio > 1.0)
        fail("split_ratio", "must be in [0, 1]");
    if (!(cfg.iou_threshold > 0.0) || cfg.iou_threshold > 1.0)
        fail("iou_threshold", "must be in (0, 1]");
    if (cfg.threads < 0) fail("threads", "must be >= 0 (0 = auto)");
    if (!(cfg.event_gain > 0.0)) fail("event_gain", "must be > 0");
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s, int line, const std::string& key) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config: line " + std::to_string(line) + ": key '" + key +
                          "': expected a number, got '" + s + "'");
    }
    if (pos != s.size())
        throw ConfigError("config: line " + std::to_string(line) + ": key '" + key +
                          "': trailing characters in '" + s + "'");
    return v;
}

inline long long parse_int(const std::string& s, int line, const std::string& key) {
    const double v = parse_double(s, line, key);
    const long long i = static_cast<long long>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError("config: line " + std::to_string(line) + ": key '" + key +
                          "': expected an integer, got '" + s + "'");
    return i;
}

inline std::uint64_t parse_u64(const std::string& s, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: line " + std::to_string(line) + ": key '" + key +
                          "': expected an unsigned integer, got '" + s + "'");
    }
}

inline bool parse_bool(const std::string& s, int line, const std::string& key) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("config: line " + std::to_string(line) + ": key '" + key +
                      "': expected true/false, got '" + s + "'");
}

// Splits "(a, b, c), (d, e, f)" into vectors of numbers, one per group.
inline std::vector<std::vector<double>> parse_tuples(const std::string& s, int line,
                                                     const std::string& key) {
    std::vector<std::vector<double>> groups;
    std::size_t i = 0;
    while (i < s.size()) {
        if (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ',') {
            ++i;
            continue;
        }
        if (s[i] != '(')
            throw ConfigError("config: line " + std::to_string(line) + ": key '" + key +
                              "': expected '(' in tuple list");
        const std::size_t close = s.find(')', i);
        if (close == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line) + ": key '" + key +
                              "': unbalanced '(' in tuple list");
        std::vector<double> vals;
        std::string body = s.substr(i + 1, close - i - 1);
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty())
                throw ConfigError("config: line " + std::to_string(line) + ": key '" +
                                  key + "': empty tuple element");
            vals.push_back(parse_double(item, line, key));
        }
        groups.push_back(std::move(vals));
        i = close + 1;
    }
    if (groups.empty())
        throw ConfigError("config: line " + std::to_string(line) + ": key '" + key +
                          "': expected at least one tuple");
    return groups;
}

inline std::vector<double> parse_tuple(const std::string& s, int line,
                                       const std::string& key, std::size_t arity) {
    auto groups = parse_tuples(s, line, key);
    if (groups.size() != 1 || groups[0].size() != arity)
        throw ConfigError("config: line " + std::to_string(line) + ": key '" + key +
                          "': expected one tuple of " + std::to_string(arity) +
                          " values");
    return groups[0];
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline PipelineConfig parse_config(const std::string& text) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (const auto hash = s.find('#'); hash != std::string::npos) s.resize(hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line) +
                              ": expected 'key = value'");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config: line " + std::to_string(line) +
                              ": expected 'key = value'");
        SceneConfig& sc = cfg.scene;
        if (key == "seed") sc.seed = detail::parse_u64(val, line, key);
        else if (key == "world_extent") {
            auto t = detail::parse_tuple(val, line, key, 2);
            sc.world_extent_x = t[0];
            sc.world_extent_y = t[1];
        } else if (key == "seabed_depth") sc.seabed_depth = detail::parse_double(val, line, key);
        else if (key == "rock_count") sc.rock_count = static_cast<int>(detail::parse_int(val, line, key));
        else if (key == "rock_radius_range") {
            auto t = detail::parse_tuple(val, line, key, 2);
            sc.rock_radius_min = t[0];
            sc.rock_radius_max = t[1];
        } else if (key == "particle_count") sc.particle_count = static_cast<int>(detail::parse_int(val, line, key));
        else if (key == "particle_radius_base") sc.particle_radius_base = detail::parse_double(val, line, key);
        else if (key == "particle_scale") sc.particle_scale = detail::parse_double(val, line, key);
        else if (key == "particle_drift") {
            auto t = detail::parse_tuple(val, line, key, 3);
            sc.particle_drift = {t[0], t[1], t[2]};
        } else if (key == "attenuation_coeff") sc.attenuation_coeff = detail::parse_double(val, line, key);
        else if (key == "spotlight_power") sc.spotlight_power = detail::parse_double(val, line, key);
        else if (key == "spotlight_cone_deg") sc.spotlight_cone_deg = detail::parse_double(val, line, key);
        else if (key == "spotlight_falloff_exp") sc.spotlight_falloff_exp = detail::parse_double(val, line, key);
        else if (key == "camera_waypoints") {
            sc.camera_waypoints.clear();
            for (const auto& t : detail::parse_tuples(val, line, key)) {
                if (t.size() != 6)
                    throw ConfigError("config: line " + std::to_string(line) +
                                      ": key 'camera_waypoints': each waypoint is "
                                      "(t, x, y, z, yaw, pitch)");
                sc.camera_waypoints.push_back({t[0], {t[1], t[2], t[3]}, t[4], t[5]});
            }
        } else if (key == "fov_deg") sc.fov_deg = detail::parse_double(val, line, key);
        else if (key == "width") sc.width = static_cast<int>(detail::parse_int(val, line, key));
        else if (key == "height") sc.height = static_cast<int>(detail::parse_int(val, line, key));
        else if (key == "fps") sc.fps = detail::parse_double(val, line, key);
        else if (key == "duration") sc.duration = detail::parse_double(val, line, key);
        else if (key == "theta_on") cfg.dvs.theta_on = detail::parse_double(val, line, key);
        else if (key == "theta_off") cfg.dvs.theta_off = detail::parse_double(val, line, key);
        else if (key == "refractory_us") cfg.dvs.refractory_us = detail::parse_u64(val, line, key);
        else if (key == "log_eps") cfg.dvs.log_eps = detail::parse_double(val, line, key);
        else if (key == "leak_rate_hz") cfg.dvs.leak_rate_hz = detail::parse_double(val, line, key);
        else if (key == "noise_seed") cfg.dvs.noise_seed = detail::parse_u64(val, line, key);
        else if (key == "noise_enabled") cfg.dvs.noise_enabled = detail::parse_bool(val, line, key);
        else if (key == "exposure") cfg.exposure = detail::parse_double(val, line, key);
        else if (key == "ambient_level") cfg.ambient_level = detail::parse_double(val, line, key);
        else if (key == "seabed_albedo") cfg.seabed_albedo = detail::parse_double(val, line, key);
        else if (key == "min_visible_area") cfg.min_visible_area = static_cast<int>(detail::parse_int(val, line, key));
        else if (key == "window_us") cfg.window_us = detail::parse_u64(val, line, key);
        else if (key == "density_threshold") cfg.density_threshold = detail::parse_double(val, line, key);
        else if (key == "min_blob_area") cfg.min_blob_area = static_cast<int>(detail::parse_int(val, line, key));
        else if (key == "split_ratio") cfg.split_ratio = detail::parse_double(val, line, key);
        else if (key == "iou_threshold") cfg.iou_threshold = detail::parse_double(val, line, key);
        else if (key == "threads") cfg.threads = static_cast<int>(detail::parse_int(val, line, key));
        else if (key == "event_gain") cfg.event_gain = detail::parse_double(val, line, key);
        else
            throw ConfigError("config: line " + std::to_string(line) +
                              ": unknown key '" + key + "'");
    }
    if (cfg.scene.camera_waypoints.empty())
        cfg.scene.camera_waypoints = default_waypoints(cfg.scene);
    validate_config(cfg);
    return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

// One line per key in a fixed order, floats at full precision. Re-parseable,
// and the text is what the config hash is computed over.
inline std::string canonical_config_text(const PipelineConfig& cfg) {
    using detail::fmt_double;
    const SceneConfig& sc = cfg.scene;
    std::ostringstream o;
    o << "seed = " << sc.seed << "\n";
    o << "world_extent = (" << fmt_double(sc.world_extent_x) << ", "
      << fmt_double(sc.world_extent_y) << ")\n";
    o << "seabed_depth = " << fmt_double(sc.seabed_depth) << "\n";
    o << "rock_count = " << sc.rock_count << "\n";
    o << "rock_radius_range = (" << fmt_double(sc.rock_radius_min) << ", "
      << fmt_double(sc.rock_radius_max) << ")\n";
    o << "particle_count = " << sc.particle_count << "\n";
    o << "particle_radius_base = " << fmt_double(sc.particle_radius_base) << "\n";
    o << "particle_scale = " << fmt_double(sc.particle_scale) << "\n";
    o << "particle_drift = (" << fmt_double(sc.particle_drift.x) << ", "
      << fmt_double(sc.particle_drift.y) << ", " << fmt_double(sc.particle_drift.z)
      << ")\n";
    o << "attenuation_coeff = " << fmt_double(sc.attenuation_coeff) << "\n";
    o << "spotlight_power = " << fmt_double(sc.spotlight_power) << "\n";
    o << "spotlight_cone_deg = " << fmt_double(sc.spotlight_cone_deg) << "\n";
    o << "spotlight_falloff_exp = " << fmt_double(sc.spotlight_falloff_exp) << "\n";
    o << "camera_waypoints =";
    for (std::size_t i = 0; i < sc.camera_waypoints.size(); ++i) {
        const Waypoint& w = sc.camera_waypoints[i];
        o << (i ? ", (" : " (") << fmt_double(w.time) << ", " << fmt_double(w.position.x)
          << ", " << fmt_double(w.position.y) << ", " << fmt_double(w.position.z) << ", "
          << fmt_double(w.yaw) << ", " << fmt_double(w.pitch) << ")";
    }
    o << "\n";
    o << "fov_deg = " << fmt_double(sc.fov_deg) << "\n";
    o << "width = " << sc.width << "\n";
    o << "height = " << sc.height << "\n";
    o << "fps = " << fmt_double(sc.fps) << "\n";
    o << "duration = " << fmt_double(sc.duration) << "\n";
    o << "theta_on = " << fmt_double(cfg.dvs.theta_on) << "\n";
    o << "theta_off = " << fmt_double(cfg.dvs.theta_off) << "\n";
    o << "refractory_us = " << cfg.dvs.refractory_us << "\n";
    o << "log_eps = " << fmt_double(cfg.dvs.log_eps) << "\n";
    o << "leak_rate_hz = " << fmt_double(cfg.dvs.leak_rate_hz) << "\n";
    o << "noise_seed = " << cfg.dvs.noise_seed << "\n";
    o << "noise_enabled = " << (cfg.dvs.noise_enabled ? "true" : "false") << "\n";
    o << "exposure = " << fmt_double(cfg.exposure) << "\n";
    o << "ambient_level = " << fmt_double(cfg.ambient_level) << "\n";
    o << "seabed_albedo = " << fmt_double(cfg.seabed_albedo) << "\n";
    o << "min_visible_area = " << cfg.min_visible_area << "\n";
    o << "window_us = " << cfg.window_us << "\n";
    o << "density_threshold = " << fmt_double(cfg.density_threshold) << "\n";
    o << "min_blob_area = " << cfg.min_blob_area << "\n";
    o << "split_ratio = " << fmt_double(cfg.split_ratio) << "\n";
    o << "iou_threshold = " << fmt_double(cfg.iou_threshold) << "\n";
    o << "threads = " << cfg.threads << "\n";
    o << "event_gain = " << fmt_double(cfg.event_gain) << "\n";
    return o.str();
}

inline std::uint64_t config_hash(const PipelineConfig& cfg) {
    return fnv1a64(canonical_config_text(cfg));
}

inline std::string config_hash_hex(const PipelineConfig& cfg) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    return buf;
}

}  // namespace murk
