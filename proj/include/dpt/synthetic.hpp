#pragma once

// Deterministic synthetic sequences with exact ground truth: a textured,
// distinctly colored target translating and scaling over a noisy background,
// with optional quadrant jitter (non-rigid deformation), scheduled occluders
// and grayscale distractor patches.

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace dpt {

struct SyntheticSpec {
    int frames = 100;
    cv::Size image_size{320, 240};
    cv::Size2d target_size{64, 64};
    cv::Point2d start_center{80.0, 120.0};
    cv::Point2d velocity{2.0, 0.0};     // pixels per frame
    double scale_growth = 0.0;          // relative size growth per frame
    double part_jitter = 0.0;           // quadrant jitter amplitude, pixels
    int occlude_begin = -1;             // inclusive frame range; empty when begin > end
    int occlude_end = -2;
    bool occlude_lower_half = true;     // else upper half
    int distractors = 0;                // grayscale texture patches in the background
    int retexture_period = 0;           // re-scramble one target quadrant every k frames
    bool retexture_whole = false;       // re-scramble all quadrants at once
    double luma_pulse_amp = 0.0;        // sinusoidal target intensity modulation
    int luma_pulse_period = 24;
    // Target whose quadrants share one grayscale pattern but carry distinct
    // hues: ambiguous for grayscale templates, unambiguous in color.
    bool hue_tiled = false;
    uint64_t seed = 1;
};

namespace detail {

inline double synth_uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

}  // namespace detail

class SyntheticSequence {
public:
    explicit SyntheticSequence(const SyntheticSpec& spec) : spec_(spec) {
        if (spec.frames < 1) throw std::invalid_argument("synthetic: need >= 1 frame");
        std::mt19937_64 rng(spec.seed);

        // Low-frequency bluish-gray background noise.
        background_.create(spec.image_size, CV_8UC3);
        for (int y = 0; y < background_.rows; ++y) {
            cv::Vec3b* row = background_.ptr<cv::Vec3b>(y);
            for (int x = 0; x < background_.cols; ++x) {
                const int v = static_cast<int>(detail::synth_uniform(rng, -40.0, 40.0));
                row[x] = cv::Vec3b(cv::saturate_cast<uchar>(140 + v),
                                   cv::saturate_cast<uchar>(115 + v),
                                   cv::saturate_cast<uchar>(100 + v));
            }
        }
        cv::GaussianBlur(background_, background_, cv::Size(7, 7), 2.0);

        // Target master textures: strong structure in warm colors. With a
        // retexture period, later variants reuse the palette but rearrange
        // the pattern, changing appearance while keeping the color identity.
        const int mw = std::max(32, static_cast<int>(spec.target_size.width * 2));
        const int mh = std::max(32, static_cast<int>(spec.target_size.height * 2));
        const int variants =
            spec.retexture_period > 0 ? (spec.frames - 1) / spec.retexture_period + 1 : 1;
        masters_.reserve(static_cast<size_t>(variants));
        for (int v = 0; v < variants; ++v) {
            cv::Mat master(mh, mw, CV_8UC3, cv::Vec3b(0, 80, 200));
            if (spec.hue_tiled) {
                // One gray pattern, repeated in all four quadrants, colorized
                // per quadrant with weights that leave the BGR-to-gray
                // projection untouched.
                // Pattern capped so the strongest channel weight cannot
                // saturate: the gray projection must stay bitwise comparable
                // across the four hues.
                cv::Mat pattern(mh / 2, mw / 2, CV_8UC1, cv::Scalar(90));
                for (int i = 0; i < 25; ++i) {
                    const int x = static_cast<int>(detail::synth_uniform(rng, 0, mw / 2.0));
                    const int y = static_cast<int>(detail::synth_uniform(rng, 0, mh / 2.0));
                    const int w = static_cast<int>(detail::synth_uniform(rng, 4, mw / 5.0));
                    const int h = static_cast<int>(detail::synth_uniform(rng, 4, mh / 5.0));
                    cv::rectangle(pattern,
                                  cv::Rect(x, y, w, h) & cv::Rect(0, 0, mw / 2, mh / 2),
                                  cv::Scalar(detail::synth_uniform(rng, 30, 130)), cv::FILLED);
                }
                // (b,g,r) weights with 0.114 b + 0.587 g + 0.299 r = 1.
                static const double weights[4][3] = {{0.30, 0.80, 1.70},      // orange
                                                     {0.40, 1.40, 0.43},      // green
                                                     {1.70, 0.55, 1.62},      // magenta
                                                     {1.90, 1.10, 0.46}};     // cyan
                for (int q = 0; q < 4; ++q) {
                    const int qx = q % 2, qy = q / 2;
                    for (int y = 0; y < mh / 2; ++y) {
                        for (int x = 0; x < mw / 2; ++x) {
                            const double g = pattern.at<uchar>(y, x);
                            master.at<cv::Vec3b>(qy * mh / 2 + y, qx * mw / 2 + x) =
                                cv::Vec3b(cv::saturate_cast<uchar>(g * weights[q][0]),
                                          cv::saturate_cast<uchar>(g * weights[q][1]),
                                          cv::saturate_cast<uchar>(g * weights[q][2]));
                        }
                    }
                }
            } else {
                for (int i = 0; i < 60; ++i) {
                    const int x = static_cast<int>(detail::synth_uniform(rng, 0, mw));
                    const int y = static_cast<int>(detail::synth_uniform(rng, 0, mh));
                    const int w = static_cast<int>(detail::synth_uniform(rng, 3, mw / 3.0));
                    const int h = static_cast<int>(detail::synth_uniform(rng, 3, mh / 3.0));
                    const cv::Scalar color(detail::synth_uniform(rng, 0, 90),
                                           detail::synth_uniform(rng, 40, 200),
                                           detail::synth_uniform(rng, 120, 255));
                    cv::rectangle(master, cv::Rect(x, y, w, h) & cv::Rect(0, 0, mw, mh), color,
                                  cv::FILLED);
                }
            }
            masters_.push_back(master);
        }

        // Grayscale distractors with the target's luminance structure, placed
        // along the motion path just off the target's row so they enter the
        // search window without being driven over.
        if (spec.distractors > 0) {
            cv::Mat gray;
            cv::cvtColor(masters_.front(), gray, cv::COLOR_BGR2GRAY);
            cv::Mat patch;
            cv::resize(gray, patch,
                       cv::Size(static_cast<int>(spec.target_size.width),
                                static_cast<int>(spec.target_size.height)));
            cv::Mat patch_bgr;
            cv::cvtColor(patch, patch_bgr, cv::COLOR_GRAY2BGR);
            const cv::Point2d travel = static_cast<double>(spec.frames - 1) * spec.velocity;
            for (int i = 0; i < spec.distractors; ++i) {
                const double f = static_cast<double>(i + 1) / (spec.distractors + 1);
                const cv::Point2d on_path = spec.start_center + f * travel;
                // The first distractor sits directly on the path (the target
                // drives over it); the rest flank it within the search range.
                const double side = (i == 0) ? 0.0 : ((i % 2 == 1) ? 1.0 : -1.0);
                const double gap = spec.target_size.height / 2.0 + patch.rows / 2.0 + 10.0;
                int x = static_cast<int>(on_path.x - patch.cols / 2.0 +
                                         detail::synth_uniform(rng, -8.0, 8.0));
                int y = static_cast<int>(on_path.y + side * gap - patch.rows / 2.0);
                x = std::clamp(x, 0, spec.image_size.width - patch.cols - 1);
                y = std::clamp(y, 0, spec.image_size.height - patch.rows - 1);
                patch_bgr.copyTo(background_(cv::Rect(x, y, patch.cols, patch.rows)));
            }
        }

        // Smooth bounded random walks for the quadrant jitter.
        jitter_.assign(static_cast<size_t>(spec.frames), std::vector<cv::Point2d>(4, {0, 0}));
        if (spec.part_jitter > 0.0) {
            std::vector<cv::Point2d> cur(4, {0.0, 0.0});
            for (int t = 0; t < spec.frames; ++t) {
                for (int q = 0; q < 4; ++q) {
                    cur[static_cast<size_t>(q)].x += detail::synth_uniform(rng, -1.0, 1.0);
                    cur[static_cast<size_t>(q)].y += detail::synth_uniform(rng, -1.0, 1.0);
                    cur[static_cast<size_t>(q)].x = std::clamp(cur[static_cast<size_t>(q)].x,
                                                               -spec.part_jitter, spec.part_jitter);
                    cur[static_cast<size_t>(q)].y = std::clamp(cur[static_cast<size_t>(q)].y,
                                                               -spec.part_jitter, spec.part_jitter);
                    jitter_[static_cast<size_t>(t)][static_cast<size_t>(q)] = cur[static_cast<size_t>(q)];
                }
            }
        }

        // Every ground-truth box (with jitter margin) must stay inside.
        for (int t = 0; t < spec.frames; ++t) {
            const cv::Rect2d gt = ground_truth(t);
            const double margin = spec.part_jitter + 1.0;
            if (gt.x < margin || gt.y < margin ||
                gt.x + gt.width + margin > spec.image_size.width ||
                gt.y + gt.height + margin > spec.image_size.height)
                throw std::invalid_argument("synthetic: target leaves the frame at frame " +
                                            std::to_string(t));
        }
    }

    int size() const { return spec_.frames; }
    const SyntheticSpec& spec() const { return spec_; }

    cv::Rect2d ground_truth(int t) const {
        const double s = std::pow(1.0 + spec_.scale_growth, t);
        const double w = spec_.target_size.width * s;
        const double h = spec_.target_size.height * s;
        const cv::Point2d c = spec_.start_center + t * spec_.velocity;
        return {c.x - w / 2.0, c.y - h / 2.0, w, h};
    }

    cv::Mat frame(int t) const {
        if (t < 0 || t >= spec_.frames) throw std::invalid_argument("synthetic: frame index");
        cv::Mat img = background_.clone();
        const cv::Rect2d gt = ground_truth(t);

        // Render the four quadrants of the master independently so parts can
        // move semi-independently. Each retexture event swaps ONE quadrant
        // (rotating), a localized appearance change.
        const int events =
            spec_.retexture_period > 0 ? t / spec_.retexture_period : 0;
        const int qw = static_cast<int>(std::round(gt.width / 2.0));
        const int qh = static_cast<int>(std::round(gt.height / 2.0));
        // Quadrants overlap the seams toward the center so jitter deforms the
        // target without tearing background-colored cracks into it.
        const int seam = spec_.part_jitter > 0.0
                             ? static_cast<int>(std::ceil(spec_.part_jitter)) + 2
                             : 0;
        for (int qy = 0; qy < 2; ++qy) {
            for (int qx = 0; qx < 2; ++qx) {
                const int q = qy * 2 + qx;
                // Count how many retexture events have landed on quadrant q.
                const int swaps = spec_.retexture_period > 0
                                      ? (spec_.retexture_whole ? events : (events + 3 - q) / 4)
                                      : 0;
                const cv::Mat& master = masters_[static_cast<size_t>(swaps) % masters_.size()];
                const cv::Rect src(qx * (master.cols / 2 - seam), qy * (master.rows / 2 - seam),
                                   master.cols / 2 + seam, master.rows / 2 + seam);
                cv::Mat quad;
                cv::resize(master(src), quad, cv::Size(qw + seam, qh + seam), 0, 0,
                           cv::INTER_AREA);
                if (spec_.luma_pulse_amp > 0.0) {
                    // Intensity scaling leaves hue and saturation untouched,
                    // so this stresses grayscale templates but not the color
                    // model.
                    const double gain =
                        1.0 + spec_.luma_pulse_amp *
                                  std::sin(2.0 * CV_PI * t / spec_.luma_pulse_period);
                    quad.convertTo(quad, -1, gain, 0.0);
                }
                const cv::Point2d j = jitter_[static_cast<size_t>(t)][static_cast<size_t>(q)];
                const int x = static_cast<int>(std::round(gt.x + qx * (qw - seam) + j.x));
                const int y = static_cast<int>(std::round(gt.y + qy * (qh - seam) + j.y));
                const cv::Rect dst =
                    cv::Rect(x, y, qw + seam, qh + seam) & cv::Rect(0, 0, img.cols, img.rows);
                if (dst.area() <= 0) continue;
                quad(cv::Rect(dst.x - x, dst.y - y, dst.width, dst.height)).copyTo(img(dst));
            }
        }

        if (t >= spec_.occlude_begin && t <= spec_.occlude_end) {
            const double margin = spec_.part_jitter + 2.0;
            cv::Rect2d occ = gt;
            occ.x -= margin;
            occ.width += 2.0 * margin;
            occ.height = gt.height / 2.0 + margin;
            if (spec_.occlude_lower_half)
                occ.y = gt.y + gt.height / 2.0;
            else
                occ.y = gt.y - margin;
            const cv::Rect occ_int(static_cast<int>(occ.x), static_cast<int>(occ.y),
                                   static_cast<int>(occ.width), static_cast<int>(occ.height));
            cv::rectangle(img, occ_int & cv::Rect(0, 0, img.cols, img.rows),
                          cv::Scalar(128, 128, 128), cv::FILLED);
        }
        return img;
    }

private:
    SyntheticSpec spec_;
    cv::Mat background_;
    std::vector<cv::Mat> masters_;
    std::vector<std::vector<cv::Point2d>> jitter_;
};

}  // namespace dpt
