#pragma once

// Multi-channel feature patches for correlation filtering: 31 HOG channels
// plus a cell-averaged, mean-subtracted grayscale channel, optionally
// multiplied by a cosine (Hann) window.

#include "dpt/fhog.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include <stdexcept>
#include <vector>

namespace dpt {

struct FeaturePatch {
    std::vector<cv::Mat> channels;  // CV_32F, all of identical (cell-grid) size
    int cell_size = 4;
    cv::Point2d origin;             // patch center in image coordinates
    bool windowed = false;

    cv::Size grid() const { return channels.empty() ? cv::Size() : channels.front().size(); }
    int num_channels() const { return static_cast<int>(channels.size()); }
};

inline cv::Mat hann_window(int rows, int cols) {
    cv::Mat win(rows, cols, CV_32F);
    auto h1 = [](int i, int n) {
        if (n <= 1) return 1.0f;
        return 0.5f * (1.0f - std::cos(2.0f * static_cast<float>(CV_PI) *
                                       static_cast<float>(i) / static_cast<float>(n - 1)));
    };
    for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x) win.at<float>(y, x) = h1(y, rows) * h1(x, cols);
    return win;
}

// Cuts a rectangle centered at `center` out of the image, replicating border
// pixels for the out-of-image part.
inline cv::Mat extract_patch(const cv::Mat& image, cv::Point2d center, cv::Size size) {
    if (size.width < 1 || size.height < 1)
        throw std::invalid_argument("extract_patch: empty size");
    const int x0 = static_cast<int>(std::floor(center.x + 0.5)) - size.width / 2;
    const int y0 = static_cast<int>(std::floor(center.y + 0.5)) - size.height / 2;

    const cv::Rect want(x0, y0, size.width, size.height);
    const cv::Rect img_rect(0, 0, image.cols, image.rows);
    const cv::Rect inter = want & img_rect;
    if (inter.area() == 0) {
        // Fully outside: replicate the nearest border pixel.
        const int cx = std::min(std::max(x0, 0), image.cols - 1);
        const int cy = std::min(std::max(y0, 0), image.rows - 1);
        cv::Mat out;
        cv::repeat(image(cv::Rect(cx, cy, 1, 1)), size.height, size.width, out);
        return out;
    }
    cv::Mat out;
    cv::copyMakeBorder(image(inter), out, inter.y - want.y,
                       want.y + want.height - (inter.y + inter.height), inter.x - want.x,
                       want.x + want.width - (inter.x + inter.width), cv::BORDER_REPLICATE);
    return out;
}

inline FeaturePatch extract_features(const cv::Mat& image, cv::Point2d center, cv::Size size,
                                     int cell_size = 4, bool windowed = true) {
    if (image.empty()) throw std::invalid_argument("extract_features: empty image");
    if (size.width / cell_size <= 1 || size.height / cell_size <= 1)
        throw std::invalid_argument("extract_features: patch degenerates to <= 1 cell");

    cv::Mat patch = extract_patch(image, center, size);
    cv::Mat gray;
    if (patch.channels() == 3)
        cv::cvtColor(patch, gray, cv::COLOR_BGR2GRAY);
    else
        gray = patch;
    gray.convertTo(gray, CV_32F, 1.0 / 255.0);

    FeaturePatch out;
    out.cell_size = cell_size;
    out.origin = center;
    out.channels = fhog(gray, cell_size);

    const cv::Size grid = out.channels.front().size();
    cv::Mat cells_gray;
    cv::resize(gray(cv::Rect(0, 0, grid.width * cell_size, grid.height * cell_size)),
               cells_gray, grid, 0, 0, cv::INTER_AREA);
    cells_gray -= cv::mean(cells_gray)[0];
    out.channels.push_back(cells_gray);

    if (windowed) {
        const cv::Mat win = hann_window(grid.height, grid.width);
        for (auto& ch : out.channels) ch = ch.mul(win);
        out.windowed = true;
    }
    return out;
}

}  // namespace dpt
