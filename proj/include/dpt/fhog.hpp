#pragma once

// 31-channel HOG (Felzenszwalb variant): 18 contrast-sensitive orientation
// channels, 9 contrast-insensitive ones and 4 texture-energy channels, built
// from soft-binned gradient histograms over square cells with four-block
// normalization and 0.2 truncation.

#include <opencv2/core.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dpt {

inline constexpr int kHogChannels = 31;

// `gray` is a CV_32F single-channel image with values in [0,1]. Returns 31
// channels of size (rows/cell_size) x (cols/cell_size).
inline std::vector<cv::Mat> fhog(const cv::Mat& gray, int cell_size) {
    CV_Assert(gray.type() == CV_32FC1);
    if (cell_size < 1) throw std::invalid_argument("fhog: cell_size must be >= 1");
    const int cells_y = gray.rows / cell_size;
    const int cells_x = gray.cols / cell_size;
    if (cells_y < 1 || cells_x < 1)
        throw std::invalid_argument("fhog: patch smaller than one cell");

    constexpr int kOrient = 18;
    // Unit vectors of the 9 contrast-insensitive orientations.
    static const float uu[9] = {1.0000f, 0.9397f, 0.7660f, 0.5000f, 0.1736f,
                                -0.1736f, -0.5000f, -0.7660f, -0.9397f};
    static const float vv[9] = {0.0000f, 0.3420f, 0.6428f, 0.8660f, 0.9848f,
                                0.9848f, 0.8660f, 0.6428f, 0.3420f};

    cv::Mat hist = cv::Mat::zeros(cells_y * cells_x, kOrient, CV_32F);
    auto hist_at = [&](int cy, int cx) { return hist.ptr<float>(cy * cells_x + cx); };

    const int usable_y = cells_y * cell_size;
    const int usable_x = cells_x * cell_size;
    for (int y = 1; y < usable_y - 1; ++y) {
        const float* row_prev = gray.ptr<float>(y - 1);
        const float* row = gray.ptr<float>(y);
        const float* row_next = gray.ptr<float>(y + 1);
        for (int x = 1; x < usable_x - 1; ++x) {
            const float dx = row[x + 1] - row[x - 1];
            const float dy = row_next[x] - row_prev[x];
            const float mag = std::sqrt(dx * dx + dy * dy);
            if (mag <= 0.0f) continue;

            int best = 0;
            float best_dot = 0.0f;
            for (int o = 0; o < 9; ++o) {
                const float dot = uu[o] * dx + vv[o] * dy;
                if (dot > best_dot) {
                    best_dot = dot;
                    best = o;
                } else if (-dot > best_dot) {
                    best_dot = -dot;
                    best = o + 9;
                }
            }

            // Bilinear soft binning into the four surrounding cells.
            const float cxf = (static_cast<float>(x) + 0.5f) / static_cast<float>(cell_size) - 0.5f;
            const float cyf = (static_cast<float>(y) + 0.5f) / static_cast<float>(cell_size) - 0.5f;
            const int cx0 = static_cast<int>(std::floor(cxf));
            const int cy0 = static_cast<int>(std::floor(cyf));
            const float wx1 = cxf - static_cast<float>(cx0);
            const float wy1 = cyf - static_cast<float>(cy0);
            const float wx0 = 1.0f - wx1;
            const float wy0 = 1.0f - wy1;
            if (cy0 >= 0 && cx0 >= 0) hist_at(cy0, cx0)[best] += wy0 * wx0 * mag;
            if (cy0 >= 0 && cx0 + 1 < cells_x) hist_at(cy0, cx0 + 1)[best] += wy0 * wx1 * mag;
            if (cy0 + 1 < cells_y && cx0 >= 0) hist_at(cy0 + 1, cx0)[best] += wy1 * wx0 * mag;
            if (cy0 + 1 < cells_y && cx0 + 1 < cells_x)
                hist_at(cy0 + 1, cx0 + 1)[best] += wy1 * wx1 * mag;
        }
    }

    // Cell gradient energy over the 9 insensitive orientations.
    cv::Mat norm = cv::Mat::zeros(cells_y, cells_x, CV_32F);
    for (int cy = 0; cy < cells_y; ++cy) {
        for (int cx = 0; cx < cells_x; ++cx) {
            const float* h = hist_at(cy, cx);
            float e = 0.0f;
            for (int o = 0; o < 9; ++o) {
                const float s = h[o] + h[o + 9];
                e += s * s;
            }
            norm.at<float>(cy, cx) = e;
        }
    }

    std::vector<cv::Mat> out(kHogChannels);
    for (auto& ch : out) ch = cv::Mat::zeros(cells_y, cells_x, CV_32F);

    constexpr float kTrunc = 0.2f;
    constexpr float kTextureScale = 0.2357f;
    auto norm_at = [&](int cy, int cx) {
        cy = std::min(std::max(cy, 0), cells_y - 1);
        cx = std::min(std::max(cx, 0), cells_x - 1);
        return norm.at<float>(cy, cx);
    };

    for (int cy = 0; cy < cells_y; ++cy) {
        for (int cx = 0; cx < cells_x; ++cx) {
            float blocks[4];
            int bi = 0;
            for (int sy : {-1, 1}) {
                for (int sx : {-1, 1}) {
                    const float sum = norm_at(cy, cx) + norm_at(cy + sy, cx) +
                                      norm_at(cy, cx + sx) + norm_at(cy + sy, cx + sx);
                    blocks[bi++] = 1.0f / std::sqrt(sum + 1e-10f);
                }
            }
            const float* h = hist_at(cy, cx);
            float texture[4] = {0, 0, 0, 0};
            for (int o = 0; o < kOrient; ++o) {
                float acc = 0.0f;
                for (int b = 0; b < 4; ++b) {
                    const float v = std::min(h[o] * blocks[b], kTrunc);
                    acc += v;
                    texture[b] += v;
                }
                out[static_cast<size_t>(o)].at<float>(cy, cx) = 0.5f * acc;
            }
            for (int o = 0; o < 9; ++o) {
                const float s = h[o] + h[o + 9];
                float acc = 0.0f;
                for (int b = 0; b < 4; ++b) acc += std::min(s * blocks[b], kTrunc);
                out[static_cast<size_t>(18 + o)].at<float>(cy, cx) = 0.5f * acc;
            }
            for (int b = 0; b < 4; ++b)
                out[static_cast<size_t>(27 + b)].at<float>(cy, cx) = kTextureScale * texture[b];
        }
    }
    return out;
}

}  // namespace dpt
