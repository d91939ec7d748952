#include "dpt/segmentation.hpp"

#include <catch2/catch.hpp>

#include <numeric>
#include <random>

namespace {

cv::Mat two_tone_image(int rows, int cols, cv::Vec3b left, cv::Vec3b right) {
    cv::Mat img(rows, cols, CV_8UC3, left);
    img(cv::Rect(cols / 2, 0, cols - cols / 2, rows)) = right;
    return img;
}

double hist_sum(const std::vector<double>& h) {
    return std::accumulate(h.begin(), h.end(), 0.0);
}

double total_variation(const cv::Mat& m) {
    double tv = 0.0;
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) {
            if (x + 1 < m.cols) tv += std::abs(m.at<float>(y, x + 1) - m.at<float>(y, x));
            if (y + 1 < m.rows) tv += std::abs(m.at<float>(y + 1, x) - m.at<float>(y, x));
        }
    return tv;
}

const cv::Vec3b kRed{0, 0, 200};
const cv::Vec3b kBlue{200, 0, 0};

}  // namespace

TEST_CASE("single-color region concentrates the histogram in one bin") {
    const cv::Mat img(20, 20, CV_8UC3, kRed);
    const auto h = dpt::build_histogram(img, {0, 0, 20, 20});
    REQUIRE(hist_sum(h) == Approx(1.0));
    REQUIRE(*std::max_element(h.begin(), h.end()) == Approx(1.0));
}

TEST_CASE("two equal-area colors split the histogram in half") {
    const cv::Mat img = two_tone_image(20, 20, kRed, kBlue);
    const auto h = dpt::build_histogram(img, {0, 0, 20, 20});
    std::vector<double> nonzero;
    for (double v : h)
        if (v > 0.0) nonzero.push_back(v);
    REQUIRE(nonzero.size() == 2);
    REQUIRE(nonzero[0] == Approx(0.5));
    REQUIRE(nonzero[1] == Approx(0.5));
}

TEST_CASE("histogram of a region is the pixel-weighted mix of its partition") {
    cv::Mat img(24, 30, CV_8UC3);
    cv::randu(img, 0, 255);
    const cv::Rect whole(2, 3, 20, 16);
    const cv::Rect left(2, 3, 8, 16);
    const cv::Rect right(10, 3, 12, 16);
    const auto hw = dpt::build_histogram(img, whole);
    const auto hl = dpt::build_histogram(img, left);
    const auto hr = dpt::build_histogram(img, right);
    const double wl = static_cast<double>(left.area()) / whole.area();
    for (size_t i = 0; i < hw.size(); ++i)
        REQUIRE(hw[i] == Approx(wl * hl[i] + (1.0 - wl) * hr[i]).margin(1e-12));
}

TEST_CASE("empty intersection is rejected") {
    const cv::Mat img(10, 10, CV_8UC3, kRed);
    REQUIRE_THROWS_AS(dpt::build_histogram(img, {50, 50, 5, 5}), std::invalid_argument);
}

TEST_CASE("backprojection follows the Bayes rule exactly") {
    const cv::Mat img = two_tone_image(10, 10, kRed, kBlue);
    dpt::ColorModel model;
    model.bins = 16;
    model.fg_hist.assign(16 * 16 * 16, 0.0);
    model.bg_hist.assign(16 * 16 * 16, 0.0);
    cv::Mat hsv;
    cv::cvtColor(img, hsv, cv::COLOR_BGR2HSV);
    const int red_bin = dpt::detail::hsv_bin(hsv.at<cv::Vec3b>(0, 0), 16);
    const int blue_bin = dpt::detail::hsv_bin(hsv.at<cv::Vec3b>(0, 9), 16);
    model.prior_fg = 0.5;

    SECTION("foreground-only color gives posterior 1") {
        model.fg_hist[red_bin] = 0.5;
        model.fg_hist[blue_bin] = 0.5;
        model.bg_hist[blue_bin] = 1.0;
        const cv::Mat post = dpt::backproject(img, {0, 0, 10, 10}, model);
        REQUIRE(post.at<float>(0, 0) == Approx(1.0));
    }
    SECTION("equal likelihoods give the prior") {
        model.fg_hist[red_bin] = 0.3;
        model.bg_hist[red_bin] = 0.3;
        model.fg_hist[blue_bin] = 0.7;
        model.bg_hist[blue_bin] = 0.7;
        const cv::Mat post = dpt::backproject(img, {0, 0, 10, 10}, model);
        REQUIRE(post.at<float>(0, 0) == Approx(0.5));
    }
    SECTION("hand-computed posterior on both colors") {
        model.fg_hist[red_bin] = 0.8;
        model.fg_hist[blue_bin] = 0.2;
        model.bg_hist[red_bin] = 0.1;
        model.bg_hist[blue_bin] = 0.9;
        model.prior_fg = 0.4;
        const cv::Mat post = dpt::backproject(img, {0, 0, 10, 10}, model);
        const double red_expected = 0.4 * 0.8 / (0.4 * 0.8 + 0.6 * 0.1);
        const double blue_expected = 0.4 * 0.2 / (0.4 * 0.2 + 0.6 * 0.9);
        REQUIRE(post.at<float>(2, 1) == Approx(red_expected).margin(1e-6));
        REQUIRE(post.at<float>(2, 8) == Approx(blue_expected).margin(1e-6));
    }
    SECTION("colors unseen by both histograms take the prior") {
        model.prior_fg = 0.37;
        const cv::Mat post = dpt::backproject(img, {0, 0, 10, 10}, model);
        REQUIRE(post.at<float>(0, 0) == Approx(0.37));
    }
}

TEST_CASE("raising a color's foreground bin never lowers its posterior") {
    const cv::Mat img(6, 6, CV_8UC3, kRed);
    dpt::ColorModel model;
    model.bins = 16;
    model.fg_hist.assign(16 * 16 * 16, 1.0 / (16 * 16 * 16));
    model.bg_hist = model.fg_hist;
    cv::Mat hsv;
    cv::cvtColor(img, hsv, cv::COLOR_BGR2HSV);
    const int bin = dpt::detail::hsv_bin(hsv.at<cv::Vec3b>(0, 0), 16);

    double prev = -1.0;
    for (double boost : {1.0, 2.0, 8.0, 64.0}) {
        auto m = model;
        m.fg_hist[bin] *= boost;
        const double total = hist_sum(m.fg_hist);
        for (double& v : m.fg_hist) v /= total;
        const double p = dpt::backproject(img, {0, 0, 6, 6}, m).at<float>(0, 0);
        REQUIRE(p >= prev);
        prev = p;
    }
}

TEST_CASE("regularize keeps constant fields fixed") {
    cv::Mat field(8, 8, CV_32F, cv::Scalar(0.42f));
    const cv::Mat out = dpt::regularize(field, 3);
    REQUIRE(cv::norm(out, field, cv::NORM_INF) < 1e-6);
}

TEST_CASE("regularize shrinks an isolated spike") {
    cv::Mat field = cv::Mat::zeros(9, 9, CV_32F);
    field.at<float>(4, 4) = 1.0f;
    const cv::Mat out = dpt::regularize(field, 1);
    REQUIRE(out.at<float>(4, 4) < 1.0f);
    double mn, mx;
    cv::minMaxLoc(out, &mn, &mx);
    REQUIRE(mn >= 0.0);
    REQUIRE(mx <= 1.0);
}

TEST_CASE("regularize reduces the total variation of a checkerboard") {
    cv::Mat field(10, 10, CV_32F);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) field.at<float>(y, x) = static_cast<float>((x + y) % 2);
    const double before = total_variation(field);
    const cv::Mat out = dpt::regularize(field, 1);
    REQUIRE(total_variation(out) < before);
}

TEST_CASE("informativeness is a two-valued strict-inequality gate") {
    REQUIRE(dpt::informativeness(100, 100.0) == 0.1);   // ratio 1.0
    REQUIRE(dpt::informativeness(5, 100.0) == 1.0);     // ratio 0.05: too few
    REQUIRE(dpt::informativeness(200, 100.0) == 1.0);   // ratio exactly 2.0
    REQUIRE(dpt::informativeness(20, 100.0) == 1.0);    // ratio exactly 0.2
    REQUIRE(dpt::informativeness(21, 100.0) == 0.1);    // just inside
    REQUIRE(dpt::informativeness(199, 100.0) == 0.1);   // just inside
    REQUIRE(dpt::informativeness(1000, 100.0) == 1.0);  // too many
    REQUIRE_THROWS_AS(dpt::informativeness(10, 0.0), std::invalid_argument);
}

TEST_CASE("color probability mixes in the uniform component") {
    cv::Mat post(2, 2, CV_32F);
    post.at<float>(0, 0) = 0.0f;
    post.at<float>(0, 1) = 0.6f;
    post.at<float>(1, 0) = 1.0f;
    post.at<float>(1, 1) = 0.25f;

    const cv::Mat full = dpt::color_probability(post, 1.0);
    REQUIRE(cv::norm(full, cv::Mat::ones(2, 2, CV_32F), cv::NORM_INF) < 1e-6);

    const cv::Mat weak = dpt::color_probability(post, 0.1);
    REQUIRE(weak.at<float>(0, 0) == Approx(0.1));
    REQUIRE(weak.at<float>(0, 1) == Approx(0.64));
}

TEST_CASE("model updates are gated and normalized") {
    cv::Mat img(40, 40, CV_8UC3);
    cv::randu(img, 0, 255);
    const cv::Rect box(12, 12, 16, 16);
    auto model = dpt::build_model(img, box);
    REQUIRE(hist_sum(model.fg_hist) == Approx(1.0).margin(1e-9));
    REQUIRE(hist_sum(model.bg_hist) == Approx(1.0).margin(1e-9));

    cv::Mat img2(40, 40, CV_8UC3);
    cv::randu(img2, 0, 255);

    SECTION("closed gate returns the identical model") {
        const auto same = dpt::update_model(model, img2, box, 1.6, 0.05, false);
        REQUIRE(same.fg_hist == model.fg_hist);
        REQUIRE(same.bg_hist == model.bg_hist);
    }
    SECTION("zero rate returns the identical model") {
        const auto same = dpt::update_model(model, img2, box, 1.6, 0.0, true);
        REQUIRE(same.fg_hist == model.fg_hist);
    }
    SECTION("rate 1 replaces the foreground histogram") {
        const auto fresh = dpt::update_model(model, img2, box, 1.6, 1.0, true);
        const auto expected = dpt::build_histogram(img2, box, model.bins);
        for (size_t i = 0; i < expected.size(); ++i)
            REQUIRE(fresh.fg_hist[i] == Approx(expected[i]).margin(1e-12));
    }
    SECTION("histograms stay normalized through many updates") {
        std::mt19937 rng(17);
        auto m = model;
        for (int i = 0; i < 10000; ++i)
            m.fg_hist[rng() % m.fg_hist.size()] += 0.0;  // no-op drift guard
        for (int i = 0; i < 200; ++i) {
            cv::randu(img2, 0, 255);
            m = dpt::update_model(m, img2, box, 1.6, 0.05, true);
        }
        REQUIRE(hist_sum(m.fg_hist) == Approx(1.0).margin(1e-6));
        REQUIRE(hist_sum(m.bg_hist) == Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("segment produces a mask consistent with its posterior") {
    cv::Mat img = two_tone_image(30, 30, kRed, kBlue);
    auto model = dpt::build_model(img, {0, 0, 15, 30});
    model.prior_fg = 0.5;
    const auto seg = dpt::segment(img, {0, 0, 30, 30}, model, 15.0 * 30.0);
    REQUIRE(seg.fg_count == cv::countNonZero(seg.mask));
    int manual = 0;
    for (int y = 0; y < seg.posterior.rows; ++y)
        for (int x = 0; x < seg.posterior.cols; ++x)
            if (seg.posterior.at<float>(y, x) > 0.5f) ++manual;
    REQUIRE(manual == seg.fg_count);
    REQUIRE((seg.alpha_col == 0.1 || seg.alpha_col == 1.0));
}
