#pragma once

// Kernelized correlation filter: Fourier-domain ridge regression over all
// circular shifts of a feature patch with a Gaussian kernel, plus response
// statistics (peak position, peak strength, weighted spatial variance).

#include "dpt/features.hpp"

#include <opencv2/core.hpp>

#include <cmath>
#include <stdexcept>

namespace dpt {

struct UninformativeResponse : std::runtime_error {
    explicit UninformativeResponse(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Filter math runs in double precision; feature storage stays float.
inline cv::Mat fft2(const cv::Mat& real) {
    cv::Mat in;
    real.convertTo(in, CV_64F);
    cv::Mat out;
    cv::dft(in, out, cv::DFT_COMPLEX_OUTPUT);
    return out;
}

inline cv::Mat ifft2(const cv::Mat& spectrum) {
    cv::Mat out;
    cv::idft(spectrum, out, cv::DFT_COMPLEX_OUTPUT | cv::DFT_SCALE);
    return out;
}

inline cv::Mat real_part(const cv::Mat& complex_mat) {
    cv::Mat planes[2];
    cv::split(complex_mat, planes);
    return planes[0];
}

inline cv::Mat complex_mul(const cv::Mat& a, const cv::Mat& b) {
    cv::Mat out;
    cv::mulSpectrums(a, b, out, 0, false);
    return out;
}

inline cv::Mat complex_mul_conj(const cv::Mat& a, const cv::Mat& b) {
    cv::Mat out;
    cv::mulSpectrums(a, b, out, 0, true);  // a .* conj(b)
    return out;
}

// Elementwise a / b for CV_32FC2 spectra.
inline cv::Mat complex_div(const cv::Mat& a, const cv::Mat& b) {
    cv::Mat num = complex_mul_conj(a, b);
    cv::Mat planes[2];
    cv::split(b, planes);
    cv::Mat mag2 = planes[0].mul(planes[0]) + planes[1].mul(planes[1]);
    cv::split(num, planes);
    cv::Mat out;
    cv::merge(std::vector<cv::Mat>{planes[0] / mag2, planes[1] / mag2}, out);
    return out;
}

// Signed circular displacement of index i on an axis of length n.
inline int wrapped_shift(int i, int n) { return i > n / 2 ? i - n : i; }

}  // namespace detail

// Periodic Gaussian regression target: maximum 1 at zero shift, symmetric
// under circular reflection.
inline cv::Mat gaussian_labels(int height, int width, double sigma) {
    if (height < 1 || width < 1)
        throw std::invalid_argument("gaussian_labels: non-positive dimensions");
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_labels: sigma must be > 0");
    cv::Mat labels(height, width, CV_64F);
    for (int m = 0; m < height; ++m) {
        const double dm = detail::wrapped_shift(m, height);
        for (int n = 0; n < width; ++n) {
            const double dn = detail::wrapped_shift(n, width);
            labels.at<double>(m, n) = std::exp(-(dm * dm + dn * dn) / (2.0 * sigma * sigma));
        }
    }
    return labels;
}

// Gaussian kernel between every circular shift of x and z, evaluated in the
// Fourier domain: u(m,n) = exp(-max(0, ||x||^2 + ||z||^2 - 2<x_{m,n}, z>) /
// numel / sigma^2), where x_{m,n}(p) = x(p + (m,n)). Sampling ahead by (m,n)
// cancels content that moved by (m,n), so a response argmax directly reads
// out the displacement present in the probed patch.
inline cv::Mat kernel_correlation(const FeaturePatch& x, const FeaturePatch& z, double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("kernel_correlation: sigma must be > 0");
    if (x.num_channels() != z.num_channels() || x.grid() != z.grid())
        throw std::invalid_argument("kernel_correlation: shape mismatch");

    const cv::Size grid = x.grid();
    cv::Mat cross = cv::Mat::zeros(grid, CV_64FC2);
    double xx = 0.0, zz = 0.0;
    for (int c = 0; c < x.num_channels(); ++c) {
        const cv::Mat& xc = x.channels[static_cast<size_t>(c)];
        const cv::Mat& zc = z.channels[static_cast<size_t>(c)];
        xx += cv::norm(xc, cv::NORM_L2SQR);
        zz += cv::norm(zc, cv::NORM_L2SQR);
        cross += detail::complex_mul_conj(detail::fft2(xc), detail::fft2(zc));
    }
    cv::Mat corr = detail::real_part(detail::ifft2(cross));

    const double numel =
        static_cast<double>(grid.area()) * static_cast<double>(x.num_channels());
    cv::Mat out(grid, CV_64F);
    for (int m = 0; m < grid.height; ++m) {
        const double* corr_row = corr.ptr<double>(m);
        double* out_row = out.ptr<double>(m);
        for (int n = 0; n < grid.width; ++n) {
            const double d2 = std::max(0.0, (xx + zz - 2.0 * corr_row[n]) / numel);
            out_row[n] = std::exp(-d2 / (sigma * sigma));
        }
    }
    return out;
}

struct Filter {
    cv::Mat num;         // F[labels], CV_32FC2
    cv::Mat den;         // F[u_zz] + lambda, CV_32FC2
    FeaturePatch tmpl;
    double lambda = 1e-4;
    double kernel_sigma = 0.5;
};

inline Filter train(const FeaturePatch& patch, const cv::Mat& labels, double lambda,
                    double kernel_sigma) {
    if (labels.size() != patch.grid())
        throw std::invalid_argument("train: labels shape must match patch grid");
    Filter f;
    f.lambda = lambda;
    f.kernel_sigma = kernel_sigma;
    f.num = detail::fft2(labels);
    f.den = detail::fft2(kernel_correlation(patch, patch, kernel_sigma));
    {
        cv::Mat planes[2];
        cv::split(f.den, planes);
        planes[0] += lambda;
        cv::merge(std::vector<cv::Mat>{planes[0], planes[1]}, f.den);
    }
    f.tmpl = patch;
    return f;
}

// Response map F^-1[A .* U_y]; index (0,0) corresponds to zero shift.
inline cv::Mat respond(const Filter& filter, const FeaturePatch& patch) {
    if (patch.grid() != filter.tmpl.grid() || patch.num_channels() != filter.tmpl.num_channels())
        throw std::invalid_argument("respond: patch shape must match template");
    const cv::Mat uy = kernel_correlation(patch, filter.tmpl, filter.kernel_sigma);
    const cv::Mat alphaf = detail::complex_div(filter.num, filter.den);
    return detail::real_part(detail::ifft2(detail::complex_mul(alphaf, detail::fft2(uy))));
}

// Autoregressive model update: denominator and template blend toward values
// recomputed from the new patch (the numerator F[labels] is patch-independent
// and therefore unchanged by the blend).
inline Filter update(const Filter& filter, const FeaturePatch& patch, double rate) {
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("update: rate must be in [0,1]");
    if (patch.grid() != filter.tmpl.grid() || patch.num_channels() != filter.tmpl.num_channels())
        throw std::invalid_argument("update: patch shape must match template");
    if (rate == 0.0) return filter;

    Filter fresh = train(patch, detail::real_part(detail::ifft2(filter.num)), filter.lambda,
                         filter.kernel_sigma);
    Filter out = filter;
    out.den = filter.den * (1.0 - rate) + fresh.den * rate;
    out.tmpl.origin = patch.origin;
    out.tmpl.windowed = patch.windowed;
    for (int c = 0; c < filter.tmpl.num_channels(); ++c) {
        // Fresh allocation: the copied channel header still aliases the input
        // filter's buffer.
        cv::Mat blended;
        cv::addWeighted(filter.tmpl.channels[static_cast<size_t>(c)], 1.0 - rate,
                        patch.channels[static_cast<size_t>(c)], rate, 0.0, blended);
        out.tmpl.channels[static_cast<size_t>(c)] = blended;
    }
    return out;
}

struct ResponseStats {
    cv::Point2d peak_pos;            // sub-pixel, image coordinates
    double peak_value = 0.0;
    double weighted_variance = 0.0;  // pixels^2
};

namespace detail {

// Vertex offset of the parabola through (-1,fm), (0,f0), (1,fp), in [-0.5,0.5].
inline double subpixel_offset(double fm, double f0, double fp) {
    const double denom = fm - 2.0 * f0 + fp;
    if (std::abs(denom) < 1e-12) return 0.0;
    const double delta = (fm - fp) / (2.0 * denom);
    return std::min(0.5, std::max(-0.5, delta));
}

}  // namespace detail

// Peak location (quadratic sub-cell fit, wrapped FFT origin), peak value and
// the response-weighted spatial variance around the peak. Negative response
// values carry no probability mass and are clamped before weighting.
inline ResponseStats response_stats(const cv::Mat& response_in, cv::Point2d patch_center,
                                    int cell_size) {
    CV_Assert(response_in.channels() == 1);
    cv::Mat response;
    response_in.convertTo(response, CV_64F);
    const int h = response.rows, w = response.cols;

    int peak_y = 0, peak_x = 0;
    double peak = response.at<double>(0, 0);
    for (int m = 0; m < h; ++m) {
        const double* row = response.ptr<double>(m);
        for (int n = 0; n < w; ++n) {
            if (row[n] > peak) {  // strict: earliest row-major index wins ties
                peak = row[n];
                peak_y = m;
                peak_x = n;
            }
        }
    }
    if (!(peak > 0.0))
        throw UninformativeResponse("response_stats: no positive response mass");

    auto at_wrapped = [&](int m, int n) {
        return response.at<double>((m % h + h) % h, (n % w + w) % w);
    };
    const double dy = detail::subpixel_offset(at_wrapped(peak_y - 1, peak_x), peak,
                                              at_wrapped(peak_y + 1, peak_x));
    const double dx = detail::subpixel_offset(at_wrapped(peak_y, peak_x - 1), peak,
                                              at_wrapped(peak_y, peak_x + 1));
    const double shift_y = detail::wrapped_shift(peak_y, h) + dy;
    const double shift_x = detail::wrapped_shift(peak_x, w) + dx;

    ResponseStats stats;
    stats.peak_value = peak;
    stats.peak_pos = patch_center + cv::Point2d(shift_x * cell_size, shift_y * cell_size);

    const double sub_y = peak_y + dy;
    const double sub_x = peak_x + dx;
    double mass = 0.0, second_moment = 0.0;
    for (int m = 0; m < h; ++m) {
        const double* row = response.ptr<double>(m);
        for (int n = 0; n < w; ++n) {
            const double v = std::max(0.0, row[n]);
            if (v <= 0.0) continue;
            double ddy = m - sub_y;
            double ddx = n - sub_x;
            ddy -= h * std::round(ddy / h);  // shortest circular distance
            ddx -= w * std::round(ddx / w);
            mass += v;
            second_moment += v * (ddy * ddy + ddx * ddx);
        }
    }
    stats.weighted_variance = second_moment / mass * cell_size * cell_size;
    return stats;
}

}  // namespace dpt
