#pragma once

// File plumbing: "x,y,w,h" box lists, sequence loading from a frame
// directory, synthetic sequence materialization and JSON run reports.

#include "dpt/evaluation.hpp"
#include "dpt/synthetic.hpp"

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpt {

inline cv::Rect2d parse_box(const std::string& line) {
    std::istringstream iss(line);
    double v[4];
    char comma;
    for (int i = 0; i < 4; ++i) {
        if (!(iss >> v[i])) throw std::invalid_argument("malformed box line: " + line);
        if (i < 3 && !(iss >> comma && comma == ','))
            throw std::invalid_argument("malformed box line: " + line);
    }
    return {v[0], v[1], v[2], v[3]};
}

inline std::vector<cv::Rect2d> read_boxes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open box file: " + path);
    std::vector<cv::Rect2d> boxes;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        boxes.push_back(parse_box(line));
    }
    return boxes;
}

inline void write_boxes(const std::string& path, const std::vector<cv::Rect2d>& boxes) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write box file: " + path);
    for (const auto& b : boxes)
        out << b.x << ',' << b.y << ',' << b.width << ',' << b.height << '\n';
}

// Frames ordered by filename; ground truth attached when a path is given.
inline Sequence load_sequence(const std::string& frames_dir, const std::string& gt_path = "") {
    Sequence seq;
    seq.name = std::filesystem::path(frames_dir).filename().string();
    for (const auto& entry : std::filesystem::directory_iterator(frames_dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
        if (ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".jpg" || ext == ".jpeg")
            seq.frame_paths.push_back(entry.path().string());
    }
    std::sort(seq.frame_paths.begin(), seq.frame_paths.end());
    if (seq.frame_paths.empty())
        throw std::invalid_argument("no frames found in " + frames_dir);
    if (!gt_path.empty()) seq.ground_truth = read_boxes(gt_path);
    return seq;
}

inline FrameProvider frame_provider(const Sequence& seq) {
    return [paths = seq.frame_paths](int index) {
        const cv::Mat img = cv::imread(paths.at(static_cast<size_t>(index)), cv::IMREAD_COLOR);
        if (img.empty())
            throw std::runtime_error("cannot read frame " + std::to_string(index) + ": " +
                                     paths.at(static_cast<size_t>(index)));
        return img;
    };
}

inline FrameProvider frame_provider(const SyntheticSequence& seq) {
    return [&seq](int index) { return seq.frame(index); };
}

inline std::vector<cv::Rect2d> ground_truth_of(const SyntheticSequence& seq) {
    std::vector<cv::Rect2d> gt;
    gt.reserve(static_cast<size_t>(seq.size()));
    for (int t = 0; t < seq.size(); ++t) gt.push_back(seq.ground_truth(t));
    return gt;
}

// Materializes a synthetic sequence as numbered PNG frames plus
// groundtruth.txt inside `dir`.
inline Sequence write_synthetic(const SyntheticSequence& seq, const std::string& dir) {
    std::filesystem::create_directories(dir);
    Sequence out;
    out.name = std::filesystem::path(dir).filename().string();
    char name[32];
    for (int t = 0; t < seq.size(); ++t) {
        std::snprintf(name, sizeof(name), "%06d.png", t);
        const std::string path = (std::filesystem::path(dir) / name).string();
        if (!cv::imwrite(path, seq.frame(t)))
            throw std::runtime_error("cannot write frame: " + path);
        out.frame_paths.push_back(path);
        out.ground_truth.push_back(seq.ground_truth(t));
    }
    write_boxes((std::filesystem::path(dir) / "groundtruth.txt").string(), out.ground_truth);
    return out;
}

inline nlohmann::json report_to_json(const RunReport& report) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : report.frames) {
        frames.push_back({{"frame", f.frame},
                          {"overlap", f.overlap},
                          {"box", {f.box.x, f.box.y, f.box.width, f.box.height}},
                          {"tracked", f.tracked},
                          {"counted", f.counted},
                          {"time_s", f.time_s}});
    }
    return {{"frames", frames},
            {"summary",
             {{"failures", report.failure_count},
              {"accuracy", report.accuracy},
              {"average_overlap", report.average_overlap},
              {"frame_count", report.frames.size()}}}};
}

inline void write_report_json(const RunReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << report_to_json(report).dump(2) << '\n';
}

// Debug dump of a single-channel float map as an 8-bit PGM, values scaled by
// 255.
inline void write_pgm(const cv::Mat& map01, const std::string& path) {
    cv::Mat img8;
    map01.convertTo(img8, CV_8U, 255.0);
    if (!cv::imwrite(path, img8)) throw std::runtime_error("cannot write " + path);
}

}  // namespace dpt
