#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "murk/image.hpp"
#include "murk/parallel.hpp"
#include "murk/scene.hpp"

namespace murk {

// Beer-Lambert attenuation over a straight path.
inline double attenuate(double intensity_in, double coeff, double distance) {
    return intensity_in * std::exp(-coeff * distance);
}

struct CameraBasis {
    Vec3 forward;
    Vec3 right;
    Vec3 down;
};

// World frame: +z up, seabed at z = seabed_depth. Yaw rotates about +z,
// pitch tilts the view (positive = up). Image y grows downward.
inline CameraBasis camera_basis(const CameraPose& pose) {
    const double cy = std::cos(pose.yaw), sy = std::sin(pose.yaw);
    const double cp = std::cos(pose.pitch), sp = std::sin(pose.pitch);
    CameraBasis b;
    b.forward = {cp * cy, cp * sy, sp};
    const Vec3 side = cross(b.forward, Vec3{0.0, 0.0, 1.0});
    const double n = norm(side);
    if (n < 1e-12)
        throw std::invalid_argument("camera_basis: view aligned with world up");
    b.right = {side.x / n, side.y / n, side.z / n};
    b.down = cross(b.forward, b.right);
    return b;
}

inline double focal_px(double fov_deg, int width) {
    return (width / 2.0) / std::tan(deg_to_rad(fov_deg) / 2.0);
}

struct PixelCoord {
    double x = 0.0;
    double y = 0.0;
};

// Pinhole projection; none when the point is not strictly in front.
inline std::optional<PixelCoord> project(const Vec3& point, const CameraPose& pose,
                                         double fov_deg, int width, int height) {
    const CameraBasis b = camera_basis(pose);
    const Vec3 rel = point - pose.position;
    const double zc = dot(rel, b.forward);
    if (zc <= 0.0) return std::nullopt;
    const double f = focal_px(fov_deg, width);
    return PixelCoord{width / 2.0 + f * dot(rel, b.right) / zc,
                      height / 2.0 + f * dot(rel, b.down) / zc};
}

struct GroundTruthBox {
    int instance_id = 0;
    int x_min = 0, y_min = 0, x_max = 0, y_max = 0;  // inclusive-exclusive
    int pixel_area = 0;

    friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

struct RenderParams {
    double ambient_level = 0.001;  // floor relative to the spotlight term
    double seabed_albedo = 0.3;
    int threads = 1;
};

namespace detail {

constexpr double kRayEps = 1e-6;       // minimum hit distance, meters
constexpr double kParticleNear = 0.05;  // particles closer than this are skipped

struct Hit {
    double t = 0.0;
    Vec3 normal;
    double albedo = 0.0;
    int instance_id = 0;  // 0 = seabed
};

inline bool intersect_scene(const Scene& scene, const Vec3& org, const Vec3& dir,
                            double seabed_albedo, Hit& hit) {
    bool found = false;
    double best = 0.0;
    // Seabed plane z = seabed_depth.
    const double depth = scene.config.seabed_depth;
    if (dir.z < 0.0 && org.z > depth) {
        const double t = (depth - org.z) / dir.z;
        if (t > kRayEps) {
            best = t;
            hit = {t, {0.0, 0.0, 1.0}, seabed_albedo, 0};
            found = true;
        }
    }
    for (const Rock& rock : scene.rocks) {
        const Vec3 m{(org.x - rock.center.x) / rock.radii.x,
                     (org.y - rock.center.y) / rock.radii.y,
                     (org.z - rock.center.z) / rock.radii.z};
        const Vec3 n{dir.x / rock.radii.x, dir.y / rock.radii.y,
                     dir.z / rock.radii.z};
        const double a = dot(n, n);
        const double b = 2.0 * dot(m, n);
        const double c = dot(m, m) - 1.0;
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) continue;
        const double sq = std::sqrt(disc);
        const double t = (-b - sq) / (2.0 * a);  // near root only; inside hits ignored
        if (t <= kRayEps || (found && t >= best)) continue;
        const Vec3 p = org + dir * t;
        Vec3 normal{(p.x - rock.center.x) / (rock.radii.x * rock.radii.x),
                    (p.y - rock.center.y) / (rock.radii.y * rock.radii.y),
                    (p.z - rock.center.z) / (rock.radii.z * rock.radii.z)};
        best = t;
        hit = {t, normalized(normal), rock.albedo, rock.instance_id};
        found = true;
    }
    return found;
}

struct ParticleSplat {
    double u = 0.0, v = 0.0;   // projected center, pixel coords
    double r_px = 0.0;         // projected radius, pixels
    double contribution = 0.0;  // brightness after water attenuation
    double distance = 0.0;
    int index = 0;
};

}  // namespace detail

// Casts one ray per pixel against seabed plane and rock ellipsoids, shades
// with the camera-mounted spotlight (light and sensor co-located, so the
// light path is ~2x the viewing distance), then composites particles as
// additive disks in front-to-back order. Output is bit-identical for any
// thread count: pixels are written independently and per-pixel addition
// order is fixed by the global particle sort.
inline std::pair<LuminanceFrame, LabelMask> render_frame(
    const Scene& scene, const CameraPose& pose, const RenderParams& params = {}) {
    const SceneConfig& cfg = scene.config;
    const int w = cfg.width, h = cfg.height;
    const CameraBasis basis = camera_basis(pose);
    const double f = focal_px(cfg.fov_deg, w);
    const double cx = w / 2.0, cy = h / 2.0;
    const double half_cone = deg_to_rad(cfg.spotlight_cone_deg) / 2.0;
    const double falloff_exp = cfg.spotlight_falloff_exp;
    const double atten = cfg.attenuation_coeff;

    LuminanceFrame frame;
    frame.width = w;
    frame.height = h;
    frame.timestamp = pose.time;
    frame.pixels.assign(static_cast<std::size_t>(w) * h, 0.0f);
    LabelMask mask;
    mask.width = w;
    mask.height = h;
    mask.timestamp = pose.time;
    mask.labels.assign(static_cast<std::size_t>(w) * h, 0);

    const int threads = resolve_threads(params.threads);

    // Surfaces.
    std::vector<double> shade(static_cast<std::size_t>(w) * h, 0.0);
    parallel_chunks(h, threads, [&](int y0, int y1, int) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                const double sx = (x + 0.5 - cx) / f;
                const double sy = (y + 0.5 - cy) / f;
                const Vec3 dir = normalized(basis.forward + basis.right * sx +
                                            basis.down * sy);
                detail::Hit hit;
                if (!detail::intersect_scene(scene, pose.position, dir,
                                             params.seabed_albedo, hit))
                    continue;
                const double cos_surf = std::max(0.0, dot(hit.normal, dir * -1.0));
                const double angle = std::acos(std::clamp(dot(dir, basis.forward), -1.0, 1.0));
                const double cone = std::max(0.0, 1.0 - angle / half_cone);
                const double cone_term =
                    cone <= 0.0 ? 0.0
                                : (falloff_exp == 1.0 ? cone : std::pow(cone, falloff_exp));
                const double value = cfg.spotlight_power * hit.albedo *
                                     std::exp(-atten * 2.0 * hit.t) *
                                     (params.ambient_level + cone_term * cos_surf);
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                shade[i] = value;
                mask.labels[i] = static_cast<std::uint16_t>(hit.instance_id);
            }
        }
    });

    // Particles, front to back.
    std::vector<detail::ParticleSplat> splats;
    splats.reserve(scene.particles.size());
    for (std::size_t i = 0; i < scene.particles.size(); ++i) {
        const Particle& p = scene.particles[i];
        const Vec3 rel = p.position - pose.position;
        const double zc = dot(rel, basis.forward);
        if (zc < detail::kParticleNear) continue;
        const double dist = norm(rel);
        detail::ParticleSplat s;
        s.u = cx + f * dot(rel, basis.right) / zc;
        s.v = cy + f * dot(rel, basis.down) / zc;
        s.r_px = f * p.radius / zc;
        s.contribution = p.brightness * std::exp(-atten * 2.0 * dist);
        s.distance = dist;
        s.index = static_cast<int>(i);
        if (s.u + s.r_px < 0.0 || s.u - s.r_px > w || s.v + s.r_px < 0.0 ||
            s.v - s.r_px > h)
            continue;
        splats.push_back(s);
    }
    std::sort(splats.begin(), splats.end(),
              [](const detail::ParticleSplat& a, const detail::ParticleSplat& b) {
                  if (a.distance != b.distance) return a.distance < b.distance;
                  return a.index < b.index;
              });

    parallel_chunks(h, threads, [&](int y0, int y1, int) {
        for (const detail::ParticleSplat& s : splats) {
            const int ya = std::max(y0, static_cast<int>(std::floor(s.v - s.r_px)));
            const int yb = std::min(y1 - 1, static_cast<int>(std::ceil(s.v + s.r_px)));
            for (int y = ya; y <= yb; ++y) {
                const double dy = y + 0.5 - s.v;
                const double span2 = s.r_px * s.r_px - dy * dy;
                if (span2 < 0.0) continue;
                const double span = std::sqrt(span2);
                const int xa = std::max(0, static_cast<int>(std::ceil(s.u - span - 0.5)));
                const int xb = std::min(w - 1, static_cast<int>(std::floor(s.u + span - 0.5)));
                for (int x = xa; x <= xb; ++x) {
                    const double dx = x + 0.5 - s.u;
                    if (dx * dx + dy * dy <= s.r_px * s.r_px)
                        shade[static_cast<std::size_t>(y) * w + x] += s.contribution;
                }
            }
        }
    });

    for (std::size_t i = 0; i < shade.size(); ++i)
        frame.pixels[i] = static_cast<float>(shade[i]);
    return {std::move(frame), std::move(mask)};
}

// Tight boxes per instance id, dropping labels below the visibility floor.
inline std::vector<GroundTruthBox> mask_to_boxes(const LabelMask& mask,
                                                 int min_visible_area) {
    struct Acc {
        int x_min, y_min, x_max, y_max, area;
    };
    std::map<int, Acc> acc;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const int label = mask.at(x, y);
            if (label == 0) continue;
            auto [it, fresh] = acc.try_emplace(label, Acc{x, y, x, y, 0});
            Acc& a = it->second;
            a.x_min = std::min(a.x_min, x);
            a.y_min = std::min(a.y_min, y);
            a.x_max = std::max(a.x_max, x);
            a.y_max = std::max(a.y_max, y);
            a.area += 1;
        }
    }
    std::vector<GroundTruthBox> boxes;
    for (const auto& [label, a] : acc) {
        if (a.area < min_visible_area) continue;
        boxes.push_back({label, a.x_min, a.y_min, a.x_max + 1, a.y_max + 1, a.area});
    }
    return boxes;
}

// Frame k is rendered at t = k / fps from the base scene advected to t.
inline std::vector<std::pair<LuminanceFrame, LabelMask>> render_sequence(
    const Scene& scene, const RenderParams& params = {}) {
    const SceneConfig& cfg = scene.config;
    const long n = std::lround(cfg.fps * cfg.duration);
    if (n < 2) throw std::invalid_argument("render_sequence: need at least 2 frames");
    std::vector<std::pair<LuminanceFrame, LabelMask>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / cfg.fps;
        const CameraPose pose = camera_pose_at(cfg, t);
        const Scene advected = advect_particles(scene, t);
        out.push_back(render_frame(advected, pose, params));
    }
    return out;
}

}  // namespace murk
