#pragma once

// Least-squares similarity transform (rotation + isotropic scale +
// translation) between point sets, used to carry the coarse bounding box
// along with the part constellation.

#include <opencv2/core.hpp>

#include <stdexcept>
#include <vector>

namespace dpt {

struct SimilarityTransform {
    // p' = a * p + b with a acting as the complex number (a_re + i a_im).
    double a_re = 1.0;
    double a_im = 0.0;
    cv::Point2d b{0.0, 0.0};

    cv::Point2d apply(cv::Point2d p) const {
        return {a_re * p.x - a_im * p.y + b.x, a_im * p.x + a_re * p.y + b.y};
    }
    double scale() const { return std::hypot(a_re, a_im); }
    double rotation() const { return std::atan2(a_im, a_re); }
};

// Treats points as complex numbers and solves min_a,b sum |a p_i + b - q_i|^2
// in closed form. Coincident source points degrade to a pure translation.
inline SimilarityTransform fit_similarity(const std::vector<cv::Point2d>& prev,
                                          const std::vector<cv::Point2d>& next) {
    if (prev.size() != next.size() || prev.size() < 2)
        throw std::invalid_argument("fit_similarity: need >= 2 point pairs");
    const double n = static_cast<double>(prev.size());
    cv::Point2d pc(0, 0), qc(0, 0);
    for (size_t i = 0; i < prev.size(); ++i) {
        pc += prev[i];
        qc += next[i];
    }
    pc *= 1.0 / n;
    qc *= 1.0 / n;

    double denom = 0.0, num_re = 0.0, num_im = 0.0;
    for (size_t i = 0; i < prev.size(); ++i) {
        const cv::Point2d p = prev[i] - pc;
        const cv::Point2d q = next[i] - qc;
        denom += p.x * p.x + p.y * p.y;
        num_re += q.x * p.x + q.y * p.y;   // Re(q * conj(p))
        num_im += q.y * p.x - q.x * p.y;   // Im(q * conj(p))
    }

    SimilarityTransform t;
    if (denom <= 1e-12) {
        t.a_re = 1.0;
        t.a_im = 0.0;
        t.b = qc - pc;
        return t;
    }
    t.a_re = num_re / denom;
    t.a_im = num_im / denom;
    t.b = {qc.x - (t.a_re * pc.x - t.a_im * pc.y), qc.y - (t.a_im * pc.x + t.a_re * pc.y)};
    return t;
}

}  // namespace dpt
