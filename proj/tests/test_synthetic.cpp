#include "dpt/synthetic.hpp"

#include "dpt/config.hpp"
#include "dpt/io.hpp"

#include <catch2/catch.hpp>

#include <filesystem>
#include <sstream>

TEST_CASE("zero motion keeps the ground truth fixed") {
    dpt::SyntheticSpec spec;
    spec.frames = 5;
    spec.velocity = {0.0, 0.0};
    const dpt::SyntheticSequence seq(spec);
    for (int t = 1; t < 5; ++t) REQUIRE(seq.ground_truth(t) == seq.ground_truth(0));
}

TEST_CASE("constant velocity gives an arithmetic center sequence") {
    dpt::SyntheticSpec spec;
    spec.frames = 6;
    spec.velocity = {2.0, -1.0};
    spec.start_center = {100.0, 140.0};
    const dpt::SyntheticSequence seq(spec);
    for (int t = 0; t < 6; ++t) {
        const auto gt = seq.ground_truth(t);
        REQUIRE(gt.x + gt.width / 2.0 == Approx(100.0 + 2.0 * t));
        REQUIRE(gt.y + gt.height / 2.0 == Approx(140.0 - 1.0 * t));
    }
}

TEST_CASE("same seed renders bit-identical frames") {
    dpt::SyntheticSpec spec;
    spec.frames = 3;
    spec.part_jitter = 2.0;
    spec.distractors = 2;
    const dpt::SyntheticSequence a(spec), b(spec);
    for (int t = 0; t < 3; ++t)
        REQUIRE(cv::norm(a.frame(t), b.frame(t), cv::NORM_INF) == 0.0);
}

TEST_CASE("scale growth compounds per frame") {
    dpt::SyntheticSpec spec;
    spec.frames = 50;
    spec.scale_growth = 0.002;
    spec.velocity = {0.0, 0.0};
    spec.start_center = {160.0, 120.0};
    spec.target_size = {50, 50};
    const dpt::SyntheticSequence seq(spec);
    REQUIRE(seq.ground_truth(49).width == Approx(50.0 * std::pow(1.002, 49)));
}

TEST_CASE("the occluder only changes scheduled frames") {
    dpt::SyntheticSpec spec;
    spec.frames = 10;
    spec.velocity = {0.0, 0.0};
    spec.occlude_begin = 4;
    spec.occlude_end = 6;
    const dpt::SyntheticSequence seq(spec);
    REQUIRE(cv::norm(seq.frame(1), seq.frame(2), cv::NORM_INF) == 0.0);
    REQUIRE(cv::norm(seq.frame(3), seq.frame(4), cv::NORM_INF) > 0.0);
    REQUIRE(cv::norm(seq.frame(5), seq.frame(7), cv::NORM_INF) > 0.0);
}

TEST_CASE("luminance pulsation changes intensity but keeps ground truth") {
    dpt::SyntheticSpec spec;
    spec.frames = 13;
    spec.velocity = {0.0, 0.0};
    spec.luma_pulse_amp = 0.4;
    spec.luma_pulse_period = 12;
    const dpt::SyntheticSequence seq(spec);
    REQUIRE(seq.ground_truth(3) == seq.ground_truth(9));
    const auto gt = seq.ground_truth(3);
    const cv::Rect roi(static_cast<int>(gt.x) + 8, static_cast<int>(gt.y) + 8, 16, 16);
    cv::Mat bright, dark;
    cv::cvtColor(seq.frame(3)(roi), bright, cv::COLOR_BGR2GRAY);   // sin peak
    cv::cvtColor(seq.frame(9)(roi), dark, cv::COLOR_BGR2GRAY);     // sin trough
    REQUIRE(cv::mean(bright)[0] > cv::mean(dark)[0] * 1.3);
}

TEST_CASE("hue-tiled targets share gray structure across quadrants") {
    dpt::SyntheticSpec spec;
    spec.frames = 2;
    spec.velocity = {0.0, 0.0};
    spec.hue_tiled = true;
    const dpt::SyntheticSequence seq(spec);
    const auto gt = seq.ground_truth(0);
    cv::Mat gray, hsv;
    const cv::Mat frame = seq.frame(0);
    cv::cvtColor(frame, gray, cv::COLOR_BGR2GRAY);
    cv::cvtColor(frame, hsv, cv::COLOR_BGR2HSV);
    const int qw = static_cast<int>(gt.width) / 2;
    const cv::Rect tl(static_cast<int>(gt.x) + 2, static_cast<int>(gt.y) + 2, qw - 8, qw - 8);
    const cv::Rect tr = tl + cv::Point(qw, 0);
    // near-identical grayscale, clearly different hue
    REQUIRE(cv::norm(gray(tl), gray(tr), cv::NORM_L1) / tl.area() < 3.0);
    std::vector<cv::Mat> ch_tl, ch_tr;
    cv::split(hsv(tl), ch_tl);
    cv::split(hsv(tr), ch_tr);
    REQUIRE(std::abs(cv::mean(ch_tl[0])[0] - cv::mean(ch_tr[0])[0]) > 10.0);
}

TEST_CASE("targets leaving the image are rejected at construction") {
    dpt::SyntheticSpec spec;
    spec.frames = 200;
    spec.velocity = {5.0, 0.0};
    REQUIRE_THROWS_AS(dpt::SyntheticSequence(spec), std::invalid_argument);
}

TEST_CASE("synthetic sequences round-trip through disk") {
    dpt::SyntheticSpec spec;
    spec.frames = 3;
    const dpt::SyntheticSequence seq(spec);
    const auto dir = std::filesystem::temp_directory_path() / "dpt_synth_test";
    std::filesystem::remove_all(dir);
    const auto written = dpt::write_synthetic(seq, dir.string());
    REQUIRE(written.frame_paths.size() == 3);

    const auto loaded =
        dpt::load_sequence(dir.string(), (dir / "groundtruth.txt").string());
    REQUIRE(loaded.frame_paths.size() == 3);
    REQUIRE(loaded.ground_truth.size() == 3);
    REQUIRE(loaded.ground_truth[1].x == Approx(seq.ground_truth(1).x));
    const cv::Mat reloaded = dpt::frame_provider(loaded)(2);
    REQUIRE(cv::norm(reloaded, seq.frame(2), cv::NORM_INF) == 0.0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("box files parse and serialize") {
    REQUIRE(dpt::parse_box("1.5,2,30,40.25") == cv::Rect2d(1.5, 2, 30, 40.25));
    REQUIRE_THROWS_AS(dpt::parse_box("1,2,3"), std::invalid_argument);
    REQUIRE_THROWS_AS(dpt::parse_box("a,b,c,d"), std::invalid_argument);

    const auto path = (std::filesystem::temp_directory_path() / "dpt_boxes.txt").string();
    const std::vector<cv::Rect2d> boxes{{1, 2, 3, 4}, {5.5, 6.5, 7, 8}};
    dpt::write_boxes(path, boxes);
    const auto loaded = dpt::read_boxes(path);
    REQUIRE(loaded.size() == 2);
    REQUIRE(loaded[1] == boxes[1]);
    std::filesystem::remove(path);
}

TEST_CASE("config files parse defaults and overrides") {
    std::istringstream in(R"(
# tracker settings
topology = star
parts = 3x3
alpha_spr = 0.9
use_color = false
)");
    const auto cfg = dpt::parse_config(in);
    REQUIRE(cfg.topology == dpt::Topology::kStar);
    REQUIRE(cfg.part_grid == dpt::PartGrid::k3x3);
    REQUIRE(cfg.alpha_spr == Approx(0.9));
    REQUIRE_FALSE(cfg.use_color);
    REQUIRE(cfg.alpha_sur == Approx(1.6));   // untouched default
    REQUIRE(cfg.alpha_hist == Approx(0.05));

    std::istringstream bad("no_such_key = 1\n");
    REQUIRE_THROWS_AS(dpt::parse_config(bad), std::invalid_argument);
}

TEST_CASE("JSON reports carry the summary block") {
    dpt::RunReport report;
    report.frames.push_back({0, 1.0, {0, 0, 5, 5}, false, true, 0.0});
    report.frames.push_back({1, 0.5, {1, 0, 5, 5}, true, true, 0.01});
    report.failure_count = 1;
    report.accuracy = 0.75;
    report.average_overlap = 0.75;
    const auto j = dpt::report_to_json(report);
    REQUIRE(j["summary"]["failures"] == 1);
    REQUIRE(j["summary"]["accuracy"] == Approx(0.75));
    REQUIRE(j["frames"].size() == 2);
}
