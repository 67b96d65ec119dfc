// Command-line front end for the underwater event-camera simulation pipeline.
//
// One executable, one subcommand per pipeline stage plus `run` (everything)
// and `sweep` (particle-scale robustness study). All stages are driven by a
// single flat config file and write into / read from one artifact directory.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "murk/config.hpp"
#include "murk/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::uint64_t window_us = 0;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "config file (key = value lines)")
        ->required();
    cmd->add_option("--out", args.out_dir, "artifact directory")->required();
    cmd->add_option("--seed", args.seed, "override the config seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--window-us", args.window_us,
                    "event-frame accumulation window in microseconds");
    cmd->add_option("--threads", args.threads, "worker threads (0 = auto)");
}

murk::PipelineConfig load(const CommonArgs& args) {
    murk::PipelineConfig cfg = murk::load_config(args.config_path);
    if (args.seed_set) cfg.scene.seed = args.seed;
    if (args.window_us > 0) cfg.window_us = args.window_us;
    if (args.threads >= 0) cfg.threads = args.threads;
    murk::validate_config(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"underwater DVS simulation pipeline"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string scales_arg = "1,2,4,8";

    CLI::App* cmd_run = app.add_subcommand("run", "full pipeline: scene through eval");
    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "run the pipeline once per particle scale");
    CLI::App* cmd_scene = app.add_subcommand("scene", "generate the scene manifest");
    CLI::App* cmd_render =
        app.add_subcommand("render", "render luminance frames, masks, ground truth");
    CLI::App* cmd_events =
        app.add_subcommand("events", "convert rendered frames to an event stream");
    CLI::App* cmd_frames =
        app.add_subcommand("frames", "accumulate the event stream into DVS video frames");
    CLI::App* cmd_export = app.add_subcommand("export", "export the YOLO dataset");
    CLI::App* cmd_eval =
        app.add_subcommand("eval", "run the blob detector and score it against truth");
    for (CLI::App* cmd : {cmd_run, cmd_sweep, cmd_scene, cmd_render, cmd_events,
                          cmd_frames, cmd_export, cmd_eval})
        add_common(cmd, args);
    cmd_sweep->add_option("--scales", scales_arg, "comma-separated particle scales");

    CLI11_PARSE(app, argc, argv);

    try {
        const murk::PipelineConfig cfg = load(args);
        const std::filesystem::path out = args.out_dir;
        if (cmd_run->parsed()) {
            const murk::RunSummary s = murk::run_pipeline(cfg, out);
            std::printf("run: %ld frames, %zu events, map %.6f -> %s\n",
                        s.frame_count, s.event_count, s.map, out.string().c_str());
        } else if (cmd_sweep->parsed()) {
            std::vector<double> scales;
            std::stringstream ss(scales_arg);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) scales.push_back(std::stod(item));
            const murk::SweepReport report = murk::sweep_particles(cfg, out, scales);
            std::fputs(murk::sweep_report_to_text(report).c_str(), stdout);
        } else if (cmd_scene->parsed()) {
            murk::stage_scene(cfg, out);
            std::printf("scene: %d rocks, %d particles -> %s\n", cfg.scene.rock_count,
                        cfg.scene.particle_count,
                        murk::paths::scene_manifest(out).string().c_str());
        } else if (cmd_render->parsed()) {
            murk::stage_render(cfg, out);
            std::printf("render: %ld frames -> %s\n",
                        murk::detail::frame_count(cfg.scene),
                        (out / "frames").string().c_str());
        } else if (cmd_events->parsed()) {
            const murk::EventStream s = murk::stage_events(cfg, out);
            std::printf("events: %zu events -> %s\n", s.events.size(),
                        murk::paths::events_binary(out).string().c_str());
        } else if (cmd_frames->parsed()) {
            const std::size_t n = murk::stage_frames(cfg, out);
            std::printf("frames: %zu event frames -> %s\n", n,
                        (out / "dvs").string().c_str());
        } else if (cmd_export->parsed()) {
            murk::stage_export(cfg, out);
            std::printf("export: dataset -> %s\n",
                        murk::paths::dataset_dir(out).string().c_str());
        } else if (cmd_eval->parsed()) {
            const murk::EvalReport report = murk::stage_eval(cfg, out);
            std::printf("eval: map %.6f -> %s\n", report.map,
                        murk::paths::eval_report(out).string().c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
