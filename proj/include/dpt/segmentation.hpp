#pragma once

// Global color model: foreground/background HSV histograms, Bayes
// backprojection, spatial regularization of the posterior, the color
// informativeness test and gated histogram updates.

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include <stdexcept>
#include <vector>

namespace dpt {

struct ColorModel {
    int bins = 16;                 // per HSV axis
    std::vector<double> fg_hist;   // bins^3, sums to 1
    std::vector<double> bg_hist;
    double prior_fg = 0.5;

    bool empty() const { return fg_hist.empty() || bg_hist.empty(); }
};

namespace detail {

inline int hsv_bin(const cv::Vec3b& hsv, int bins) {
    // OpenCV 8-bit HSV: H in [0,180), S and V in [0,256).
    const int h = std::min(hsv[0] * bins / 180, bins - 1);
    const int s = hsv[1] * bins / 256;
    const int v = hsv[2] * bins / 256;
    return (h * bins + s) * bins + v;
}

inline cv::Mat to_hsv(const cv::Mat& image_bgr) {
    CV_Assert(image_bgr.type() == CV_8UC3);
    cv::Mat hsv;
    cv::cvtColor(image_bgr, hsv, cv::COLOR_BGR2HSV);
    return hsv;
}

}  // namespace detail

// Normalized HSV histogram of the region clipped to the image.
inline std::vector<double> build_histogram(const cv::Mat& image_bgr, cv::Rect region,
                                           int bins = 16) {
    const cv::Rect clipped = region & cv::Rect(0, 0, image_bgr.cols, image_bgr.rows);
    if (clipped.area() <= 0)
        throw std::invalid_argument("build_histogram: region does not intersect the image");
    const cv::Mat hsv = detail::to_hsv(image_bgr);
    std::vector<double> hist(static_cast<size_t>(bins) * bins * bins, 0.0);
    for (int y = clipped.y; y < clipped.y + clipped.height; ++y) {
        const cv::Vec3b* row = hsv.ptr<cv::Vec3b>(y);
        for (int x = clipped.x; x < clipped.x + clipped.width; ++x)
            hist[static_cast<size_t>(detail::hsv_bin(row[x], bins))] += 1.0;
    }
    const double total = static_cast<double>(clipped.area());
    for (double& v : hist) v /= total;
    return hist;
}

// Per-pixel foreground posterior by Bayes rule over the model histograms.
// Pixels unseen by both histograms take the prior.
inline cv::Mat backproject(const cv::Mat& image_bgr, cv::Rect region, const ColorModel& model) {
    if (model.empty()) throw std::invalid_argument("backproject: empty color model");
    const cv::Rect clipped = region & cv::Rect(0, 0, image_bgr.cols, image_bgr.rows);
    const cv::Mat hsv = detail::to_hsv(image_bgr);
    cv::Mat posterior(clipped.height, clipped.width, CV_32F);
    for (int y = 0; y < clipped.height; ++y) {
        const cv::Vec3b* row = hsv.ptr<cv::Vec3b>(clipped.y + y);
        float* out = posterior.ptr<float>(y);
        for (int x = 0; x < clipped.width; ++x) {
            const int bin = detail::hsv_bin(row[clipped.x + x], model.bins);
            const double pf = model.prior_fg * model.fg_hist[static_cast<size_t>(bin)];
            const double pb = (1.0 - model.prior_fg) * model.bg_hist[static_cast<size_t>(bin)];
            out[x] = (pf + pb) > 0.0 ? static_cast<float>(pf / (pf + pb))
                                     : static_cast<float>(model.prior_fg);
        }
    }
    return posterior;
}

// Smooths the posterior by iterated neighborhood averaging (0.5 self + 0.5
// mean of the 4-neighborhood), an approximation of the MRF regularization of
// the cited segmentation. Constant fields are fixed points; values stay in
// [0,1].
inline cv::Mat regularize(const cv::Mat& posterior, int iterations = 3) {
    CV_Assert(posterior.type() == CV_32FC1);
    static const cv::Mat kernel = (cv::Mat_<float>(3, 3) << 0.0f, 0.125f, 0.0f,
                                   0.125f, 0.5f, 0.125f,
                                   0.0f, 0.125f, 0.0f);
    cv::Mat out = posterior.clone();
    for (int i = 0; i < iterations; ++i)
        cv::filter2D(out, out, -1, kernel, cv::Point(-1, -1), 0.0, cv::BORDER_REPLICATE);
    return out;
}

// Eq.-style informativeness gate: 0.1 when the foreground pixel count is
// within the expected bounds relative to the previous object size, else 1.0.
inline double informativeness(int fg_count, double prev_size, double alpha_min = 0.2,
                              double alpha_max = 2.0) {
    if (prev_size <= 0.0) throw std::invalid_argument("informativeness: prev_size must be > 0");
    const double ratio = static_cast<double>(fg_count) / prev_size;
    return (alpha_min < ratio && ratio < alpha_max) ? 0.1 : 1.0;
}

// Mixes the posterior with a uniform component: p*(1-alpha) + alpha.
// Preserves the input depth (float or double).
inline cv::Mat color_probability(const cv::Mat& posterior, double alpha_col) {
    CV_Assert(posterior.type() == CV_32FC1 || posterior.type() == CV_64FC1);
    cv::Mat out;
    posterior.convertTo(out, posterior.depth(), 1.0 - alpha_col, alpha_col);
    return out;
}

struct SegmentationResult {
    cv::Mat posterior;   // regularized, CV_32F in [0,1]
    cv::Mat mask;        // CV_8U, posterior > 0.5
    int fg_count = 0;
    double alpha_col = 1.0;
};

// Full segmentation of a region: backprojection, regularization,
// binarization and the informativeness test against prev_size.
inline SegmentationResult segment(const cv::Mat& image_bgr, cv::Rect region,
                                  const ColorModel& model, double prev_size,
                                  double alpha_min = 0.2, double alpha_max = 2.0) {
    SegmentationResult result;
    result.posterior = regularize(backproject(image_bgr, region, model));
    cv::compare(result.posterior, 0.5, result.mask, cv::CMP_GT);
    result.fg_count = cv::countNonZero(result.mask);
    result.alpha_col = informativeness(result.fg_count, prev_size, alpha_min, alpha_max);
    return result;
}

// Grows a rectangle about its center by `factor` in each dimension.
inline cv::Rect scale_rect(cv::Rect r, double factor) {
    const double cx = r.x + r.width / 2.0;
    const double cy = r.y + r.height / 2.0;
    const double w = r.width * factor;
    const double h = r.height * factor;
    return cv::Rect(static_cast<int>(std::round(cx - w / 2.0)),
                    static_cast<int>(std::round(cy - h / 2.0)),
                    static_cast<int>(std::round(w)), static_cast<int>(std::round(h)));
}

namespace detail {

// Histogram of the annulus between `inner` and `inner` scaled by
// `surround_factor`, the background sampling region. A thin guard ring
// (inner scaled by kBgGuardFactor) is excluded as well: the object routinely
// overhangs its box by a few pixels, and those pixels would otherwise leak
// object colors into the background model.
inline constexpr double kBgGuardFactor = 1.15;

inline std::vector<double> surround_histogram(const cv::Mat& image_bgr, cv::Rect inner,
                                              double surround_factor, int bins) {
    const cv::Rect outer =
        scale_rect(inner, surround_factor) & cv::Rect(0, 0, image_bgr.cols, image_bgr.rows);
    if (outer.area() <= 0)
        throw std::invalid_argument("surround_histogram: region outside the image");
    const cv::Rect guard = scale_rect(inner, kBgGuardFactor);
    const cv::Mat hsv = to_hsv(image_bgr);
    std::vector<double> hist(static_cast<size_t>(bins) * bins * bins, 0.0);
    long count = 0;
    for (int y = outer.y; y < outer.y + outer.height; ++y) {
        const cv::Vec3b* row = hsv.ptr<cv::Vec3b>(y);
        for (int x = outer.x; x < outer.x + outer.width; ++x) {
            if (guard.contains(cv::Point(x, y))) continue;
            hist[static_cast<size_t>(hsv_bin(row[x], bins))] += 1.0;
            ++count;
        }
    }
    if (count == 0) {
        // Object fills the frame; fall back to the inner region itself.
        return build_histogram(image_bgr, inner, bins);
    }
    for (double& v : hist) v /= static_cast<double>(count);
    return hist;
}

}  // namespace detail

// Builds a fresh model: foreground from the object box, background from the
// surrounding annulus.
inline ColorModel build_model(const cv::Mat& image_bgr, cv::Rect fg_region,
                              double surround_factor = 1.6, int bins = 16) {
    ColorModel model;
    model.bins = bins;
    model.fg_hist = build_histogram(image_bgr, fg_region, bins);
    model.bg_hist = detail::surround_histogram(image_bgr, fg_region, surround_factor, bins);
    return model;
}

// Autoregressive histogram update, gated by the informativeness test result.
// When the gate is closed the model is returned unchanged.
inline ColorModel update_model(const ColorModel& model, const cv::Mat& image_bgr,
                               cv::Rect fg_region, double surround_factor, double rate,
                               bool gate) {
    if (rate < 0.0 || rate > 1.0)
        throw std::invalid_argument("update_model: rate must be in [0,1]");
    if (surround_factor <= 1.0)
        throw std::invalid_argument("update_model: surround_factor must be > 1");
    if (!gate || rate == 0.0) return model;

    const std::vector<double> fg = build_histogram(image_bgr, fg_region, model.bins);
    const std::vector<double> bg =
        detail::surround_histogram(image_bgr, fg_region, surround_factor, model.bins);
    ColorModel out = model;
    for (size_t i = 0; i < out.fg_hist.size(); ++i) {
        out.fg_hist[i] = model.fg_hist[i] * (1.0 - rate) + fg[i] * rate;
        out.bg_hist[i] = model.bg_hist[i] * (1.0 - rate) + bg[i] * rate;
    }
    return out;
}

}  // namespace dpt
