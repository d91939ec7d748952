// Command-line front end: sequence tracking, spring-system benchmarking,
// overlap evaluation and synthetic sequence generation.

#include "dpt/config.hpp"
#include "dpt/evaluation.hpp"
#include "dpt/io.hpp"
#include "dpt/spring_benchmark.hpp"
#include "dpt/synthetic.hpp"
#include "dpt/tracker.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

struct CommonOpts {
    std::string config_path;
    uint64_t seed = 42;
    int verbosity = 0;
    std::string dump_debug;
};

dpt::TrackerConfig tracker_config(const CommonOpts& opts, const std::string& topology,
                                  const std::string& parts) {
    dpt::TrackerConfig cfg;
    if (!opts.config_path.empty()) cfg = dpt::load_config(opts.config_path);
    if (!topology.empty()) cfg.topology = dpt::topology_from_string(topology);
    if (!parts.empty()) cfg.part_grid = dpt::part_grid_from_string(parts);
    return cfg;
}

void dump_frame_debug(const std::string& dir, int frame, const dpt::TrackerState& state,
                      const cv::Mat& image) {
    std::filesystem::create_directories(dir);
    char name[64];
    std::snprintf(name, sizeof(name), "%06d_posterior.pgm", frame);
    if (state.config.use_color && !state.coarse.color.empty()) {
        const cv::Point2d center = dpt::detail::rect_center(state.coarse.bbox);
        const cv::Mat patch =
            dpt::extract_patch(image, center, state.coarse.root_template_px);
        const cv::Mat posterior = dpt::regularize(dpt::backproject(
            patch, cv::Rect(0, 0, patch.cols, patch.rows), state.coarse.color));
        dpt::write_pgm(posterior, (std::filesystem::path(dir) / name).string());
    }
}

int cmd_track(const CommonOpts& opts, const std::string& frames_dir, const std::string& init_box,
              const std::string& gt_path, const std::string& out_path,
              const std::string& diag_path, const std::string& topology,
              const std::string& parts) {
    const dpt::Sequence seq = dpt::load_sequence(frames_dir, gt_path);
    const dpt::FrameProvider frames = dpt::frame_provider(seq);

    cv::Rect2d init;
    if (!init_box.empty()) {
        init = dpt::parse_box(init_box);
    } else if (!seq.ground_truth.empty()) {
        init = seq.ground_truth.front();
    } else {
        std::cerr << "track: need --init \"x,y,w,h\" or a ground-truth file\n";
        return 2;
    }

    const dpt::TrackerConfig cfg = tracker_config(opts, topology, parts);
    dpt::TrackerState state = dpt::initialize(frames(0), init, cfg);

    std::vector<cv::Rect2d> boxes{init};
    nlohmann::json diag = nlohmann::json::array();
    for (int t = 1; t < static_cast<int>(seq.frame_paths.size()); ++t) {
        cv::Mat image;
        try {
            image = frames(t);
        } catch (const std::exception& e) {
            std::cerr << "track: " << e.what() << '\n';
            return 3;
        }
        dpt::FrameResult result;
        try {
            result = dpt::track_frame(state, image);
        } catch (const std::exception& e) {
            std::cerr << "track: frame " << t << " aborted: " << e.what() << '\n';
            return 4;
        }
        boxes.push_back(result.bbox);
        if (!diag_path.empty()) {
            diag.push_back({{"frame", t},
                            {"alpha_col", result.alpha_col},
                            {"weights", result.part_weights},
                            {"updated", result.updated_parts},
                            {"energy_initial", result.map_energy_initial},
                            {"energy_final", result.map_energy_final},
                            {"low_confidence", result.low_confidence}});
        }
        if (!opts.dump_debug.empty()) dump_frame_debug(opts.dump_debug, t, state, image);
        if (opts.verbosity > 0 && t % 25 == 0)
            std::cout << "frame " << t << " box " << result.bbox.x << ',' << result.bbox.y
                      << ',' << result.bbox.width << ',' << result.bbox.height << '\n';
    }
    dpt::write_boxes(out_path, boxes);
    if (!diag_path.empty()) {
        std::ofstream out(diag_path);
        out << diag.dump(2) << '\n';
    }
    std::cout << "tracked " << boxes.size() << " frames -> " << out_path << '\n';
    return 0;
}

int cmd_bench_springs(const std::string& sizes_csv, int trials, uint64_t seed,
                      const std::string& out_path, const std::string& traces_dir) {
    std::vector<int> sizes;
    std::stringstream ss(sizes_csv);
    for (std::string item; std::getline(ss, item, ',');) sizes.push_back(std::stoi(item));
    if (sizes.empty()) {
        std::cerr << "bench-springs: empty size list\n";
        return 2;
    }

    dpt::SolverSettings settings;
    if (!traces_dir.empty()) settings.traced_trials = 3;
    const dpt::BenchmarkResult result = dpt::convergence_experiment(sizes, trials, seed, settings);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) {
            std::cerr << "bench-springs: cannot write " << out_path << '\n';
            return 3;
        }
        out = &file;
    }
    *out << "size\tsolver\tmean_iters\tstd_iters\tmean_time_s\tmean_final_energy\tdegenerate_count\n";
    for (const auto& row : result.rows)
        *out << row.size << '\t' << row.solver << '\t' << row.mean_iters << '\t'
             << row.std_iters << '\t' << row.mean_time_s << '\t' << row.mean_final_energy
             << '\t' << row.degenerate_count << '\n';

    if (!traces_dir.empty()) {
        std::filesystem::create_directories(traces_dir);
        for (const auto& trial : result.trials) {
            if (trial.ida.energy_trace.empty()) continue;
            for (const char* solver : {"ida", "cgd"}) {
                const auto& trace = std::string(solver) == "ida" ? trial.ida.energy_trace
                                                                 : trial.cgd.energy_trace;
                std::ofstream csv(std::filesystem::path(traces_dir) /
                                  (std::to_string(trial.size) + "_" + std::to_string(trial.trial) +
                                   "_" + solver + ".csv"));
                csv << "iteration,energy\n";
                for (size_t i = 0; i < trace.size(); ++i) csv << i << ',' << trace[i] << '\n';
            }
        }
    }
    return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& gt_path, const std::string& boxes_path,
             const std::string& frames_dir, const std::string& protocol,
             const std::string& out_path, const std::string& topology,
             const std::string& parts) {
    const std::vector<cv::Rect2d> gt = dpt::read_boxes(gt_path);
    dpt::RunReport report;

    if (protocol == "noreset" && !boxes_path.empty()) {
        const std::vector<cv::Rect2d> boxes = dpt::read_boxes(boxes_path);
        if (boxes.size() != gt.size()) {
            std::cerr << "eval: output has " << boxes.size() << " boxes but ground truth has "
                      << gt.size() << " lines\n";
            return 2;
        }
        double sum = 0.0;
        for (size_t i = 0; i < gt.size(); ++i) {
            const double iou = dpt::overlap(boxes[i], gt[i]);
            report.frames.push_back({static_cast<int>(i), iou, boxes[i], i > 0, true, 0.0});
            sum += iou;
        }
        report.average_overlap = sum / static_cast<double>(gt.size());
        report.accuracy = report.average_overlap;
    } else {
        if (frames_dir.empty()) {
            std::cerr << "eval: the reset protocol re-runs the tracker; pass --frames\n";
            return 2;
        }
        const dpt::Sequence seq = dpt::load_sequence(frames_dir, gt_path);
        dpt::DptTracker tracker(tracker_config(opts, topology, parts));
        const dpt::FrameProvider frames = dpt::frame_provider(seq);
        report = protocol == "reset" ? dpt::run_reset_based(tracker, frames, gt)
                                     : dpt::run_no_reset(tracker, frames, gt);
    }

    std::cout << "frames " << report.frames.size() << "  failures " << report.failure_count
              << "  accuracy " << report.accuracy << "  AO " << report.average_overlap << '\n';
    if (!out_path.empty()) dpt::write_report_json(report, out_path);
    return 0;
}

int cmd_make_synthetic(const std::string& out_dir, int frames, const std::string& size_str,
                       const std::string& velocity_str, double scale_growth, double jitter,
                       const std::string& occlude, int distractors, int retexture,
                       bool retexture_whole, bool hue_tiled, uint64_t seed) {
    dpt::SyntheticSpec spec;
    spec.frames = frames;
    spec.seed = seed;
    spec.scale_growth = scale_growth;
    spec.part_jitter = jitter;
    spec.distractors = distractors;
    spec.retexture_period = retexture;
    spec.retexture_whole = retexture_whole;
    spec.hue_tiled = hue_tiled;
    if (!size_str.empty()) {
        const auto x = size_str.find('x');
        if (x == std::string::npos) {
            std::cerr << "make-synthetic: --size expects WxH\n";
            return 2;
        }
        spec.image_size = {std::stoi(size_str.substr(0, x)), std::stoi(size_str.substr(x + 1))};
    }
    if (!velocity_str.empty()) {
        const auto c = velocity_str.find(',');
        if (c == std::string::npos) {
            std::cerr << "make-synthetic: --velocity expects vx,vy\n";
            return 2;
        }
        spec.velocity = {std::stod(velocity_str.substr(0, c)),
                         std::stod(velocity_str.substr(c + 1))};
    }
    if (!occlude.empty()) {
        const auto c = occlude.find(',');
        if (c == std::string::npos) {
            std::cerr << "make-synthetic: --occlude expects first,last\n";
            return 2;
        }
        spec.occlude_begin = std::stoi(occlude.substr(0, c));
        spec.occlude_end = std::stoi(occlude.substr(c + 1));
    }
    spec.start_center = {spec.image_size.width * 0.25, spec.image_size.height * 0.5};

    try {
        const dpt::SyntheticSequence seq(spec);
        const dpt::Sequence written = dpt::write_synthetic(seq, out_dir);
        std::cout << "wrote " << written.frame_paths.size() << " frames to " << out_dir << '\n';
    } catch (const std::exception& e) {
        std::cerr << "make-synthetic: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deformable-parts correlation-filter tracking toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonOpts opts;
    app.add_option("--config", opts.config_path, "key = value tracker configuration file");
    app.add_option("--seed", opts.seed, "root random seed");
    app.add_flag_function("-v", [&](int64_t n) { opts.verbosity = static_cast<int>(n); },
                          "increase verbosity");
    app.add_option("--dump-debug", opts.dump_debug, "directory for per-frame debug dumps");

    auto* track = app.add_subcommand("track", "track a frame directory");
    std::string frames_dir, init_box, gt_path, out_path = "boxes.txt", diag_path, topology, parts;
    track->add_option("--frames", frames_dir, "directory of image frames")->required();
    track->add_option("--init", init_box, "initial box \"x,y,w,h\"");
    track->add_option("--gt", gt_path, "ground-truth file (first line used for init)");
    track->add_option("--out", out_path, "output box file");
    track->add_option("--diag", diag_path, "per-frame diagnostics JSON");
    track->add_option("--topology", topology, "full|local|star");
    track->add_option("--parts", parts, "2x2|3x3|3x3ov");

    auto* bench = app.add_subcommand("bench-springs", "run the IDA/CGD benchmark");
    std::string sizes_csv = "4,8,16";
    int trials = 100;
    std::string bench_out, traces_dir;
    bench->add_option("--sizes", sizes_csv, "comma-separated system sizes");
    bench->add_option("--trials", trials, "trials per size");
    bench->add_option("--out", bench_out, "TSV output path (default stdout)");
    bench->add_option("--traces", traces_dir, "directory for per-iteration energy CSVs");

    auto* eval = app.add_subcommand("eval", "evaluate tracker output against ground truth");
    std::string eval_gt, eval_boxes, eval_frames, protocol = "noreset", eval_out;
    eval->add_option("--gt", eval_gt, "ground-truth box file")->required();
    eval->add_option("--boxes", eval_boxes, "tracker output boxes (noreset protocol)");
    eval->add_option("--frames", eval_frames, "frame directory (reset protocol re-runs live)");
    eval->add_option("--protocol", protocol, "reset|noreset");
    eval->add_option("--out", eval_out, "JSON report path");
    eval->add_option("--topology", topology, "full|local|star");
    eval->add_option("--parts", parts, "2x2|3x3|3x3ov");

    auto* synth = app.add_subcommand("make-synthetic", "generate a synthetic sequence");
    std::string synth_dir, size_str, velocity_str = "2,0", occlude;
    int synth_frames = 100, distractors = 0, retexture = 0;
    double growth = 0.0, jitter = 0.0;
    bool retexture_whole = false, hue_tiled = false;
    synth->add_option("--out", synth_dir, "output directory")->required();
    synth->add_option("--frames", synth_frames, "number of frames");
    synth->add_option("--size", size_str, "image size WxH");
    synth->add_option("--velocity", velocity_str, "target velocity vx,vy px/frame");
    synth->add_option("--scale-growth", growth, "relative size growth per frame");
    synth->add_option("--jitter", jitter, "quadrant jitter amplitude, px");
    synth->add_option("--occlude", occlude, "occluded frame range first,last");
    synth->add_option("--distractors", distractors, "number of grayscale distractors");
    synth->add_option("--retexture", retexture, "re-scramble period in frames");
    synth->add_flag("--retexture-whole", retexture_whole, "re-scramble all quadrants at once");
    synth->add_flag("--hue-tiled", hue_tiled, "gray-identical, hue-distinct quadrants");

    CLI11_PARSE(app, argc, argv);

    try {
        if (track->parsed())
            return cmd_track(opts, frames_dir, init_box, gt_path, out_path, diag_path, topology,
                             parts);
        if (bench->parsed())
            return cmd_bench_springs(sizes_csv, trials, opts.seed, bench_out, traces_dir);
        if (eval->parsed())
            return cmd_eval(opts, eval_gt, eval_boxes, eval_frames, protocol, eval_out, topology,
                            parts);
        if (synth->parsed())
            return cmd_make_synthetic(synth_dir, synth_frames, size_str, velocity_str, growth,
                                      jitter, occlude, distractors, retexture, retexture_whole,
                                      hue_tiled, opts.seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
