#include "dpt/features.hpp"

#include <catch2/catch.hpp>

#include <random>

namespace {

cv::Mat solid_image(int rows, int cols, cv::Vec3b color) {
    return cv::Mat(rows, cols, CV_8UC3, color);
}

}  // namespace

TEST_CASE("constant patch produces near-zero features") {
    const cv::Mat img = solid_image(64, 64, {128, 128, 128});
    const auto p = dpt::extract_features(img, {32.0, 32.0}, {32, 32}, 4, false);
    REQUIRE(p.num_channels() == dpt::kHogChannels + 1);
    for (const auto& ch : p.channels) {
        double mx;
        cv::minMaxLoc(cv::abs(ch), nullptr, &mx);
        REQUIRE(mx < 1e-5);
    }
}

TEST_CASE("vertical step edge concentrates energy in the horizontal-gradient bin") {
    cv::Mat img(64, 64, CV_8UC3, cv::Vec3b(0, 0, 0));
    img(cv::Rect(32, 0, 32, 64)) = cv::Vec3b(255, 255, 255);
    const auto p = dpt::extract_features(img, {32.0, 32.0}, {48, 48}, 4, false);

    // Sum each contrast-insensitive orientation channel (18..26); bin 0 is the
    // horizontal gradient direction (perpendicular to a vertical edge).
    std::vector<double> orientation_energy(9, 0.0);
    for (int o = 0; o < 9; ++o)
        orientation_energy[o] = cv::sum(p.channels[18 + o])[0];
    const int strongest = static_cast<int>(
        std::max_element(orientation_energy.begin(), orientation_energy.end()) -
        orientation_energy.begin());
    REQUIRE(strongest == 0);
    REQUIRE(orientation_energy[0] > 5.0 * orientation_energy[4]);
}

TEST_CASE("feature extraction is deterministic") {
    cv::Mat img(80, 80, CV_8UC3);
    cv::randu(img, 0, 255);
    const auto a = dpt::extract_features(img, {40.0, 40.0}, {40, 40}, 4, true);
    const auto b = dpt::extract_features(img, {40.0, 40.0}, {40, 40}, 4, true);
    REQUIRE(a.num_channels() == b.num_channels());
    for (int c = 0; c < a.num_channels(); ++c)
        REQUIRE(cv::norm(a.channels[c], b.channels[c], cv::NORM_INF) == 0.0);
}

TEST_CASE("patches reaching outside the image replicate the border") {
    cv::Mat img = solid_image(20, 20, {10, 10, 10});
    img(cv::Rect(0, 0, 10, 20)) = cv::Vec3b(200, 200, 200);
    const cv::Mat patch = dpt::extract_patch(img, {0.0, 10.0}, {16, 16});
    REQUIRE(patch.size() == cv::Size(16, 16));
    REQUIRE(patch.at<cv::Vec3b>(8, 0) == cv::Vec3b(200, 200, 200));
    const cv::Mat far = dpt::extract_patch(img, {-50.0, -50.0}, {4, 4});
    REQUIRE(far.at<cv::Vec3b>(0, 0) == cv::Vec3b(200, 200, 200));
}

TEST_CASE("degenerate patch sizes are rejected") {
    const cv::Mat img = solid_image(32, 32, {0, 0, 0});
    REQUIRE_THROWS_AS(dpt::extract_features(img, {16.0, 16.0}, {4, 4}, 4, false),
                      std::invalid_argument);
}

TEST_CASE("windowed features vanish at the patch border") {
    cv::Mat img(64, 64, CV_8UC3);
    cv::randu(img, 0, 255);
    const auto p = dpt::extract_features(img, {32.0, 32.0}, {40, 40}, 4, true);
    REQUIRE(p.windowed);
    const cv::Mat& gray = p.channels.back();
    REQUIRE(std::abs(gray.at<float>(0, 0)) < 1e-7);
    REQUIRE(std::abs(gray.at<float>(gray.rows - 1, gray.cols - 1)) < 1e-7);
}

TEST_CASE("hann window is separable and peaks centrally") {
    const cv::Mat w = dpt::hann_window(5, 5);
    REQUIRE(w.at<float>(2, 2) == Approx(1.0));
    REQUIRE(w.at<float>(0, 2) == Approx(0.0).margin(1e-7));
    REQUIRE(dpt::hann_window(1, 1).at<float>(0, 0) == Approx(1.0));
}
