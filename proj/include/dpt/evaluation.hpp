#pragma once

// Overlap metrics and the reset-based / no-reset sequence evaluation
// protocols.

#include "dpt/tracker.hpp"

#include <opencv2/core.hpp>

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dpt {

struct Sequence {
    std::vector<std::string> frame_paths;
    std::vector<cv::Rect2d> ground_truth;
    std::string name;
};

inline double overlap(const cv::Rect2d& a, const cv::Rect2d& b) {
    const double inter = (a & b).area();
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

// Minimal tracker interface the protocols run against.
class SequenceTracker {
public:
    virtual ~SequenceTracker() = default;
    virtual void init(const cv::Mat& image, const cv::Rect2d& box) = 0;
    virtual cv::Rect2d track(const cv::Mat& image) = 0;
};

// DPT behind the protocol interface. A frame-level solver failure keeps the
// state unchanged and reports the previous box.
class DptTracker : public SequenceTracker {
public:
    explicit DptTracker(const TrackerConfig& config = {}) : config_(config) {}

    void init(const cv::Mat& image, const cv::Rect2d& box) override {
        state_ = initialize(image, box, config_);
    }
    cv::Rect2d track(const cv::Mat& image) override {
        if (!state_) throw std::logic_error("DptTracker: track before init");
        try {
            return track_frame(*state_, image).bbox;
        } catch (const SolverError&) {
            return state_->coarse.bbox;
        }
    }
    const TrackerState* state() const { return state_ ? &*state_ : nullptr; }

private:
    TrackerConfig config_;
    std::optional<TrackerState> state_;
};

using FrameProvider = std::function<cv::Mat(int)>;

struct FrameRecord {
    int frame = 0;
    double overlap = 0.0;
    cv::Rect2d box;
    bool tracked = false;   // tracker produced this box (not an init or a skip)
    bool counted = false;   // contributes to the accuracy average
    double time_s = 0.0;
};

struct RunReport {
    std::vector<FrameRecord> frames;
    int failure_count = 0;
    double accuracy = 0.0;         // reset-based: mean overlap during successful tracking
    double average_overlap = 0.0;  // no-reset AO over the entire sequence
};

struct ResetProtocolOptions {
    int burn_in = 5;               // frames skipped after a failure before re-init
    int exclude_after_init = 10;   // post-init frames excluded from the accuracy mean
};

// VOT-style protocol: re-initialize from ground truth after each zero-overlap
// failure, skipping a burn-in window; accuracy averages the counted frames.
inline RunReport run_reset_based(SequenceTracker& tracker, const FrameProvider& frames,
                                 const std::vector<cv::Rect2d>& gt,
                                 const ResetProtocolOptions& opts = {}) {
    const int n = static_cast<int>(gt.size());
    RunReport report;
    int i = 0;
    while (i < n) {
        tracker.init(frames(i), gt[i]);
        report.frames.push_back({i, 1.0, gt[static_cast<size_t>(i)], false, false, 0.0});
        const int exclude_until = i + opts.exclude_after_init;
        int reinit_at = -1;
        int j = i + 1;
        for (; j < n; ++j) {
            const auto t0 = std::chrono::steady_clock::now();
            const cv::Rect2d box = tracker.track(frames(j));
            const double dt =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const double iou = overlap(box, gt[static_cast<size_t>(j)]);
            if (iou <= 0.0) {
                ++report.failure_count;
                report.frames.push_back({j, iou, box, true, false, dt});
                reinit_at = j + opts.burn_in;
                break;
            }
            report.frames.push_back({j, iou, box, true, j > exclude_until, dt});
        }
        if (reinit_at < 0) break;
        for (int k = j + 1; k < std::min(reinit_at, n); ++k)
            report.frames.push_back({k, 0.0, cv::Rect2d(), false, false, 0.0});
        i = reinit_at;
    }

    double sum = 0.0;
    int counted = 0;
    double tracked_sum = 0.0;
    int tracked = 0;
    for (const auto& f : report.frames) {
        if (f.counted) {
            sum += f.overlap;
            ++counted;
        }
        if (f.tracked) {
            tracked_sum += f.overlap;
            ++tracked;
        }
    }
    report.accuracy = counted > 0 ? sum / counted
                                  : (tracked > 0 ? tracked_sum / tracked : 0.0);
    double all = 0.0;
    for (const auto& f : report.frames) all += f.overlap;
    report.average_overlap = report.frames.empty() ? 0.0 : all / report.frames.size();
    return report;
}

// OTB-style protocol: single initialization, average overlap over the whole
// sequence.
inline RunReport run_no_reset(SequenceTracker& tracker, const FrameProvider& frames,
                              const std::vector<cv::Rect2d>& gt) {
    const int n = static_cast<int>(gt.size());
    RunReport report;
    if (n == 0) return report;
    tracker.init(frames(0), gt[0]);
    report.frames.push_back({0, 1.0, gt[0], false, true, 0.0});
    for (int j = 1; j < n; ++j) {
        const auto t0 = std::chrono::steady_clock::now();
        const cv::Rect2d box = tracker.track(frames(j));
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.frames.push_back(
            {j, overlap(box, gt[static_cast<size_t>(j)]), box, true, true, dt});
    }
    double sum = 0.0;
    for (const auto& f : report.frames) sum += f.overlap;
    report.average_overlap = sum / report.frames.size();
    report.accuracy = report.average_overlap;
    return report;
}

}  // namespace dpt
