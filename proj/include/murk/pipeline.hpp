#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "murk/config.hpp"
#include "murk/detect.hpp"
#include "murk/events.hpp"
#include "murk/image.hpp"
#include "murk/render.hpp"
#include "murk/scene.hpp"
#include "murk/streamio.hpp"

namespace murk {

class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace paths {

namespace fs = std::filesystem;

inline fs::path scene_manifest(const fs::path& out) { return out / "scene.txt"; }
inline fs::path resolved_config(const fs::path& out) { return out / "config_resolved.cfg"; }
inline fs::path frames_elum(const fs::path& out) { return out / "frames" / "frames.elum"; }
inline fs::path frame_preview(const fs::path& out, long k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%04ld.pgm", k);
    return out / "frames" / buf;
}
inline fs::path mask_image(const fs::path& out, long k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "mask_%04ld.pgm", k);
    return out / "masks" / buf;
}
inline fs::path ground_truth(const fs::path& out) { return out / "gt.txt"; }
inline fs::path events_binary(const fs::path& out) { return out / "events.erev"; }
inline fs::path events_csv(const fs::path& out) { return out / "events.csv"; }
inline fs::path dvs_frame(const fs::path& out, std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ev_%06zu.pgm", k);
    return out / "dvs" / buf;
}
inline fs::path dataset_dir(const fs::path& out) { return out / "dataset"; }
inline fs::path detections(const fs::path& out) { return out / "detections.txt"; }
inline fs::path eval_report(const fs::path& out) { return out / "eval.txt"; }
inline fs::path run_manifest(const fs::path& out) { return out / "run.txt"; }
inline fs::path sweep_table(const fs::path& out) { return out / "sweep.txt"; }

}  // namespace paths

namespace detail {

inline std::string read_stage_input(const std::string& stage,
                                    const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw PipelineError(stage + ": missing input: " + path.string());
    return read_file_bytes(path);
}

inline long frame_count(const SceneConfig& sc) {
    return std::lround(sc.fps * sc.duration);
}

inline std::vector<std::uint64_t> frame_times_us(const SceneConfig& sc, long n) {
    std::vector<std::uint64_t> t(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k)
        t[static_cast<std::size_t>(k)] = frame_time_us(static_cast<double>(k) / sc.fps);
    return t;
}

}  // namespace detail

// --- Stages -------------------------------------------------------------------
//
// Each stage reads only prior artifacts plus the config and writes only its
// own outputs, so composing the standalone subcommands reproduces a
// monolithic run byte for byte.

inline void stage_scene(const PipelineConfig& cfg, const std::filesystem::path& out) {
    validate_config(cfg);
    std::filesystem::create_directories(out);
    const Scene scene = generate_scene(cfg.scene);
    detail::write_file_bytes(paths::scene_manifest(out),
                             scene_to_manifest(scene, config_hash_hex(cfg)));
    detail::write_file_bytes(paths::resolved_config(out), canonical_config_text(cfg));
}

inline void stage_render(const PipelineConfig& cfg, const std::filesystem::path& out) {
    validate_config(cfg);
    const SceneConfig& sc = cfg.scene;
    const long n = detail::frame_count(sc);
    if (n < 2) throw PipelineError("render: need at least 2 frames (fps * duration)");
    const std::string manifest =
        detail::read_stage_input("render", paths::scene_manifest(out));
    const Scene scene = scene_from_manifest(manifest, sc, config_hash_hex(cfg));

    std::filesystem::create_directories(out / "frames");
    std::filesystem::create_directories(out / "masks");
    RenderParams rp{cfg.ambient_level, cfg.seabed_albedo, cfg.threads};
    const int min_area = resolved_min_visible_area(cfg);

    std::ofstream elum(paths::frames_elum(out), std::ios::binary);
    if (!elum)
        throw PipelineError("render: cannot write " +
                            paths::frames_elum(out).string());
    const std::string header =
        encode_elum_header(sc.width, sc.height, static_cast<std::uint32_t>(n));
    elum.write(header.data(), static_cast<std::streamsize>(header.size()));

    std::string gt = "# frame instance_id x_min y_min x_max y_max area\n";
    for (long k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / sc.fps;
        const CameraPose pose = camera_pose_at(sc, t);
        const Scene advected = advect_particles(scene, t);
        auto [frame, mask] = render_frame(advected, pose, rp);
        const std::string plane = encode_elum_plane(frame);
        elum.write(plane.data(), static_cast<std::streamsize>(plane.size()));
        detail::write_file_bytes(
            paths::frame_preview(out, k),
            encode_pgm8(sc.width, sc.height, tone_map(frame, cfg.exposure)));
        detail::write_file_bytes(paths::mask_image(out, k),
                                 encode_pgm16(sc.width, sc.height, mask.labels));
        for (const GroundTruthBox& b : mask_to_boxes(mask, min_area)) {
            gt += std::to_string(k) + " " + std::to_string(b.instance_id) + " " +
                  std::to_string(b.x_min) + " " + std::to_string(b.y_min) + " " +
                  std::to_string(b.x_max) + " " + std::to_string(b.y_max) + " " +
                  std::to_string(b.pixel_area) + "\n";
        }
    }
    if (!elum) throw PipelineError("render: write failed on frames.elum");
    elum.close();
    detail::write_file_bytes(paths::ground_truth(out), gt);
}

inline EventStream stage_events(const PipelineConfig& cfg,
                                const std::filesystem::path& out) {
    validate_config(cfg);
    const std::string bytes =
        detail::read_stage_input("events", paths::frames_elum(out));
    std::vector<LuminanceFrame> frames = decode_elum(bytes);
    for (std::size_t k = 0; k < frames.size(); ++k)
        frames[k].timestamp = static_cast<double>(k) / cfg.scene.fps;
    EventStream stream = frames_to_events(frames, cfg.dvs, cfg.threads);
    if (cfg.dvs.noise_enabled && !frames.empty()) {
        const std::uint64_t t_end = frame_time_us(frames.back().timestamp);
        stream = inject_noise(stream, cfg.dvs, 0, t_end == 0 ? 1 : t_end);
    }
    detail::write_file_bytes(paths::events_binary(out), write_binary(stream));
    detail::write_file_bytes(paths::events_csv(out), write_csv(stream));
    return stream;
}

inline std::uint64_t event_window_count(const EventStream& stream,
                                        std::uint64_t window_us) {
    if (stream.events.empty()) return 0;
    const std::uint64_t span = stream.events.back().t + 1;  // events are sorted
    return (span + window_us - 1) / window_us;
}

inline std::vector<EventFrame> build_event_frames(const EventStream& stream,
                                                  std::uint64_t window_us) {
    std::vector<EventFrame> out;
    const std::uint64_t n = event_window_count(stream, window_us);
    out.reserve(static_cast<std::size_t>(n));
    for (std::uint64_t k = 0; k < n; ++k)
        out.push_back(accumulate(stream, k * window_us, (k + 1) * window_us));
    return out;
}

inline EventStream load_events(const std::string& stage,
                               const std::filesystem::path& out) {
    return read_binary(detail::read_stage_input(stage, paths::events_binary(out)));
}

inline std::size_t stage_frames(const PipelineConfig& cfg,
                                const std::filesystem::path& out) {
    validate_config(cfg);
    const EventStream stream = load_events("frames", out);
    const std::vector<EventFrame> frames = build_event_frames(stream, cfg.window_us);
    std::filesystem::create_directories(out / "dvs");
    for (std::size_t k = 0; k < frames.size(); ++k)
        detail::write_file_bytes(
            paths::dvs_frame(out, k),
            encode_pgm8(stream.width, stream.height,
                        event_frame_to_image(frames[k], cfg.event_gain)));
    return frames.size();
}

inline std::vector<std::vector<GroundTruthBox>> parse_ground_truth(
    const std::string& text, long n_frames) {
    std::vector<std::vector<GroundTruthBox>> gt(static_cast<std::size_t>(n_frames));
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long frame = 0;
        GroundTruthBox b;
        ls >> frame >> b.instance_id >> b.x_min >> b.y_min >> b.x_max >> b.y_max >>
            b.pixel_area;
        if (!ls || frame < 0 || frame >= n_frames)
            throw PipelineError("ground truth: malformed line: " + line);
        gt[static_cast<std::size_t>(frame)].push_back(b);
    }
    return gt;
}

// Event window k covers [k*w, (k+1)*w); with the default one-render-frame
// window its events come from the pair ending at frame k+1, so that frame's
// ground truth annotates it.
inline std::size_t gt_frame_for_window(std::size_t window, long n_frames) {
    const std::size_t end_frame = window + 1;
    const std::size_t last = static_cast<std::size_t>(n_frames - 1);
    return end_frame > last ? last : end_frame;
}

inline void stage_export(const PipelineConfig& cfg, const std::filesystem::path& out) {
    validate_config(cfg);
    const EventStream stream = load_events("export", out);
    const long n_frames = detail::frame_count(cfg.scene);
    const auto gt = parse_ground_truth(
        detail::read_stage_input("export", paths::ground_truth(out)), n_frames);
    const std::vector<EventFrame> frames = build_event_frames(stream, cfg.window_us);
    if (frames.empty()) throw PipelineError("export: empty dataset (no events)");
    std::vector<std::vector<GroundTruthBox>> labels(frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k)
        labels[k] = gt[gt_frame_for_window(k, n_frames)];
    export_yolo(frames, labels, paths::dataset_dir(out), cfg.split_ratio,
                cfg.scene.seed, cfg.event_gain);
}

inline EvalReport stage_eval(const PipelineConfig& cfg,
                             const std::filesystem::path& out) {
    validate_config(cfg);
    const EventStream stream = load_events("eval", out);
    const long n_frames = detail::frame_count(cfg.scene);
    const auto gt = parse_ground_truth(
        detail::read_stage_input("eval", paths::ground_truth(out)), n_frames);
    const std::vector<EventFrame> frames = build_event_frames(stream, cfg.window_us);

    std::map<std::string, std::vector<Detection>> detections;
    std::map<std::string, std::vector<BBox>> truths;
    std::string det_text = "# window score x_min y_min x_max y_max\n";
    for (std::size_t k = 0; k < frames.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "ev_%06zu", k);
        auto dets = blob_detect(frames[k], cfg.density_threshold, cfg.min_blob_area);
        for (const Detection& d : dets) {
            char row[128];
            std::snprintf(row, sizeof(row), "%zu %.6f %ld %ld %ld %ld\n", k, d.score,
                          std::lround(d.bbox.x_min), std::lround(d.bbox.y_min),
                          std::lround(d.bbox.x_max), std::lround(d.bbox.y_max));
            det_text += row;
        }
        std::vector<BBox> tb;
        for (const GroundTruthBox& g : gt[gt_frame_for_window(k, n_frames)])
            tb.push_back(to_bbox(g));
        detections[name] = std::move(dets);
        truths[name] = std::move(tb);
    }
    const EvalReport report = evaluate_map(detections, truths, cfg.iou_threshold);
    detail::write_file_bytes(paths::detections(out), det_text);
    detail::write_file_bytes(paths::eval_report(out), eval_report_to_text(report));
    return report;
}

// --- Orchestration --------------------------------------------------------------

struct RunSummary {
    long frame_count = 0;
    std::size_t event_count = 0;
    double map = 0.0;
};

inline RunSummary run_pipeline(const PipelineConfig& cfg,
                               const std::filesystem::path& out) {
    using Clock = std::chrono::steady_clock;
    validate_config(cfg);
    std::filesystem::create_directories(out);
    RunSummary summary;
    std::string manifest = "config " + config_hash_hex(cfg) + "\n";
    const auto run_stage = [&](const char* name, auto&& fn) {
        const auto t0 = Clock::now();
        fn();
        const double ms =
            std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        char buf[64];
        std::snprintf(buf, sizeof(buf), "stage %s %.1f ms\n", name, ms);
        manifest += buf;
    };
    run_stage("scene", [&] { stage_scene(cfg, out); });
    run_stage("render", [&] { stage_render(cfg, out); });
    run_stage("events", [&] { summary.event_count = stage_events(cfg, out).events.size(); });
    run_stage("frames", [&] { stage_frames(cfg, out); });
    run_stage("export", [&] { stage_export(cfg, out); });
    run_stage("eval", [&] { summary.map = stage_eval(cfg, out).map; });
    summary.frame_count = detail::frame_count(cfg.scene);
    detail::write_file_bytes(paths::run_manifest(out), manifest);
    return summary;
}

// Fraction of events that land on background pixels, attributing each event
// to the mask of the frame pair that produced it (the pair's end frame).
inline double compute_clutter(const PipelineConfig& cfg,
                              const std::filesystem::path& out) {
    const EventStream stream = load_events("clutter", out);
    if (stream.events.empty()) return 0.0;
    const long n = detail::frame_count(cfg.scene);
    const auto t_us = detail::frame_times_us(cfg.scene, n);
    std::vector<std::vector<std::uint16_t>> masks(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) {
        int w = 0, h = 0;
        masks[static_cast<std::size_t>(k)] = decode_pgm16(
            detail::read_stage_input("clutter", paths::mask_image(out, k)), w, h);
        if (w != stream.width || h != stream.height)
            throw PipelineError("clutter: mask dimensions do not match stream");
    }
    std::size_t background = 0;
    for (const Event& e : stream.events) {
        auto it = std::lower_bound(t_us.begin(), t_us.end(), e.t);
        std::size_t j = static_cast<std::size_t>(it - t_us.begin());
        if (j == 0) j = 1;
        if (j >= static_cast<std::size_t>(n)) j = static_cast<std::size_t>(n - 1);
        const auto& mask = masks[j];
        if (mask[static_cast<std::size_t>(e.y) * stream.width + e.x] == 0)
            ++background;
    }
    return static_cast<double>(background) / static_cast<double>(stream.events.size());
}

// --- Particle sweep -------------------------------------------------------------

struct SweepRow {
    double particle_scale = 1.0;
    std::size_t total_events = 0;
    double clutter_ratio = 0.0;
    double map = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
};

inline std::string sweep_report_to_text(const SweepReport& report) {
    std::string out = "scale\tevents\tclutter\tmap\n";
    for (const SweepRow& r : report.rows) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%g\t%zu\t%.6f\t%.6f\n", r.particle_scale,
                      r.total_events, r.clutter_ratio, r.map);
        out += buf;
    }
    return out;
}

inline std::string scale_dir_name(double scale) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "scale_%g", scale);
    return buf;
}

// One pipeline run per scale: identical seed and config except
// particle_scale. Each run lands in its own subdirectory.
inline SweepReport sweep_particles(const PipelineConfig& cfg,
                                   const std::filesystem::path& out,
                                   const std::vector<double>& scales) {
    if (scales.empty())
        throw std::invalid_argument("sweep_particles: scales must be nonempty");
    for (double s : scales)
        if (!(s > 0.0))
            throw std::invalid_argument("sweep_particles: scales must be positive");
    validate_config(cfg);
    std::filesystem::create_directories(out);
    SweepReport report;
    for (double scale : scales) {
        PipelineConfig run_cfg = cfg;
        run_cfg.scene.particle_scale = scale;
        const std::filesystem::path dir = out / scale_dir_name(scale);
        try {
            const RunSummary summary = run_pipeline(run_cfg, dir);
            const double clutter = compute_clutter(run_cfg, dir);
            report.rows.push_back(
                {scale, summary.event_count, clutter, summary.map});
        } catch (const std::exception& e) {
            throw PipelineError("sweep: scale " + scale_dir_name(scale).substr(6) +
                                ": " + e.what());
        }
    }
    detail::write_file_bytes(paths::sweep_table(out), sweep_report_to_text(report));
    return report;
}

}  // namespace murk
