#include "dpt/evaluation.hpp"

#include <catch2/catch.hpp>

namespace {

// Echoes ground truth exactly.
class OracleTracker : public dpt::SequenceTracker {
public:
    explicit OracleTracker(std::vector<cv::Rect2d> gt) : gt_(std::move(gt)) {}
    void init(const cv::Mat&, const cv::Rect2d&) override { /* frame index advances below */ }
    cv::Rect2d track(const cv::Mat&) override { return gt_.at(static_cast<size_t>(++frame_)); }
    void seek(int frame) { frame_ = frame; }

private:
    std::vector<cv::Rect2d> gt_;
    int frame_ = 0;
};

// Always reports the same fixed box.
class FixedTracker : public dpt::SequenceTracker {
public:
    explicit FixedTracker(cv::Rect2d box) : box_(box) {}
    void init(const cv::Mat&, const cv::Rect2d&) override {}
    cv::Rect2d track(const cv::Mat&) override { return box_; }

private:
    cv::Rect2d box_;
};

// Holds whatever box it was initialized with.
class FrozenTracker : public dpt::SequenceTracker {
public:
    void init(const cv::Mat&, const cv::Rect2d& box) override { box_ = box; }
    cv::Rect2d track(const cv::Mat&) override { return box_; }

private:
    cv::Rect2d box_;
};

dpt::FrameProvider dummy_frames() {
    return [](int) { return cv::Mat::zeros(4, 4, CV_8UC3); };
}

}  // namespace

TEST_CASE("overlap is IoU") {
    const cv::Rect2d a(0, 0, 10, 10);
    REQUIRE(dpt::overlap(a, a) == Approx(1.0));
    REQUIRE(dpt::overlap(a, {20, 20, 5, 5}) == 0.0);
    REQUIRE(dpt::overlap(a, {5, 0, 10, 10}) == Approx(1.0 / 3.0));
    REQUIRE(dpt::overlap({5, 0, 10, 10}, a) == Approx(1.0 / 3.0));
}

TEST_CASE("oracle tracker scores perfectly under both protocols") {
    std::vector<cv::Rect2d> gt;
    for (int i = 0; i < 30; ++i) gt.push_back({10.0 + i, 20.0, 8, 8});

    {
        OracleTracker oracle(gt);
        const auto report = dpt::run_no_reset(oracle, dummy_frames(), gt);
        REQUIRE(report.failure_count == 0);
        REQUIRE(report.average_overlap == Approx(1.0));
    }
    {
        OracleTracker oracle(gt);
        const auto report = dpt::run_reset_based(oracle, dummy_frames(), gt);
        REQUIRE(report.failure_count == 0);
        REQUIRE(report.accuracy == Approx(1.0));
    }
}

TEST_CASE("an always-wrong tracker fails once per burn-in window") {
    std::vector<cv::Rect2d> gt(20, cv::Rect2d(0, 0, 10, 10));
    FixedTracker fixed({500, 500, 10, 10});
    // Failures land at frames 1, 7, 13, 19: one per (burn_in + 1)-frame window.
    const auto report = dpt::run_reset_based(fixed, dummy_frames(), gt);
    REQUIRE(report.failure_count == 4);
    std::vector<int> failure_frames;
    for (const auto& f : report.frames)
        if (f.tracked && f.overlap <= 0.0) failure_frames.push_back(f.frame);
    REQUIRE(failure_frames == std::vector<int>{1, 7, 13, 19});
}

TEST_CASE("losing the target halfway halves the average overlap") {
    // 2N frames; the frozen tracker overlaps fully for the static first half
    // and scores zero after the target jumps away.
    const int n = 10;
    std::vector<cv::Rect2d> gt;
    for (int i = 0; i < n; ++i) gt.push_back({0, 0, 10, 10});
    for (int i = 0; i < n; ++i) gt.push_back({100, 100, 10, 10});
    FrozenTracker frozen;
    const auto report = dpt::run_no_reset(frozen, dummy_frames(), gt);
    REQUIRE(report.average_overlap == Approx(0.5));
}

TEST_CASE("resets can only help the measured overlap") {
    std::vector<cv::Rect2d> gt;
    for (int i = 0; i < 60; ++i) gt.push_back({10.0 + 2.0 * i, 20.0, 12, 12});
    FrozenTracker a, b;
    const auto reset = dpt::run_reset_based(a, dummy_frames(), gt);
    const auto noreset = dpt::run_no_reset(b, dummy_frames(), gt);
    REQUIRE(reset.failure_count >= 1);
    REQUIRE(reset.accuracy >= noreset.average_overlap);
}

TEST_CASE("protocols are deterministic for fixed config, sequence and seed") {
    dpt::SyntheticSpec spec;
    spec.frames = 12;
    spec.image_size = {320, 240};
    spec.target_size = {64, 64};
    spec.start_center = {100.0, 120.0};
    spec.velocity = {2.0, 0.0};
    spec.seed = 77;
    const dpt::SyntheticSequence seq(spec);
    const auto gt = dpt::ground_truth_of(seq);

    dpt::DptTracker a, b;
    const auto ra = dpt::run_no_reset(a, dpt::frame_provider(seq), gt);
    const auto rb = dpt::run_no_reset(b, dpt::frame_provider(seq), gt);
    REQUIRE(ra.frames.size() == rb.frames.size());
    for (size_t i = 0; i < ra.frames.size(); ++i) {
        REQUIRE(ra.frames[i].overlap == rb.frames[i].overlap);
        REQUIRE(ra.frames[i].box == rb.frames[i].box);
    }
}

TEST_CASE("reports carry per-frame records for every frame") {
    std::vector<cv::Rect2d> gt(15, cv::Rect2d(0, 0, 10, 10));
    FrozenTracker t;
    const auto report = dpt::run_no_reset(t, dummy_frames(), gt);
    REQUIRE(report.frames.size() == 15);
    for (int i = 0; i < 15; ++i) REQUIRE(report.frames[static_cast<size_t>(i)].frame == i);
}
