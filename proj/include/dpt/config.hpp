#pragma once

// Tracker configuration with the published defaults, plus a key = value
// config-file loader covering every parameter.

#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dpt {

enum class Topology { kFull, kLocal, kStar };
enum class PartGrid { k2x2, k3x3, k3x3Overlap };

struct TrackerConfig {
    Topology topology = Topology::kFull;
    PartGrid part_grid = PartGrid::k2x2;

    // coarse layer
    double search_padding = 2.0;  // search region = bbox scaled by this factor
    double alpha_sur = 1.6;       // background annulus scale
    double alpha_hist = 0.05;     // color histogram update rate
    double alpha_min = 0.2;       // informativeness lower bound
    double alpha_max = 2.0;       // informativeness upper bound
    int hsv_bins = 16;

    // correlation filters
    int cell_size = 4;
    double lambda = 1e-4;
    double kernel_sigma = 0.5;
    double label_sigma_factor = 0.1;  // label sigma = cell-grid diagonal * this
    double learn_rate = 0.02;

    // constellation
    double alpha_spr = 0.95;   // preferred-distance update rate
    double sigma2_min = 0.25;  // px^2 floor for the response variance
    double part_padding = 2.0;

    // spring solver
    double ida_tol = 1e-3;
    int ida_max_iter = 100;

    // ablation switches
    bool use_color = true;
    bool use_constellation = true;
};

inline const char* to_string(Topology t) {
    switch (t) {
        case Topology::kFull: return "full";
        case Topology::kLocal: return "local";
        case Topology::kStar: return "star";
    }
    return "full";
}

inline const char* to_string(PartGrid g) {
    switch (g) {
        case PartGrid::k2x2: return "2x2";
        case PartGrid::k3x3: return "3x3";
        case PartGrid::k3x3Overlap: return "3x3ov";
    }
    return "2x2";
}

inline Topology topology_from_string(const std::string& s) {
    if (s == "full") return Topology::kFull;
    if (s == "local") return Topology::kLocal;
    if (s == "star") return Topology::kStar;
    throw std::invalid_argument("unknown topology: " + s);
}

inline PartGrid part_grid_from_string(const std::string& s) {
    if (s == "2x2") return PartGrid::k2x2;
    if (s == "3x3") return PartGrid::k3x3;
    if (s == "3x3ov") return PartGrid::k3x3Overlap;
    throw std::invalid_argument("unknown part grid: " + s);
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("expected a boolean, got: " + v);
}

}  // namespace detail

inline TrackerConfig parse_config(std::istream& in) {
    TrackerConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = detail::trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));

        if (key == "topology") cfg.topology = topology_from_string(value);
        else if (key == "parts") cfg.part_grid = part_grid_from_string(value);
        else if (key == "search_padding") cfg.search_padding = std::stod(value);
        else if (key == "alpha_sur") cfg.alpha_sur = std::stod(value);
        else if (key == "alpha_hist") cfg.alpha_hist = std::stod(value);
        else if (key == "alpha_min") cfg.alpha_min = std::stod(value);
        else if (key == "alpha_max") cfg.alpha_max = std::stod(value);
        else if (key == "hsv_bins") cfg.hsv_bins = std::stoi(value);
        else if (key == "cell_size") cfg.cell_size = std::stoi(value);
        else if (key == "lambda") cfg.lambda = std::stod(value);
        else if (key == "kernel_sigma") cfg.kernel_sigma = std::stod(value);
        else if (key == "label_sigma_factor") cfg.label_sigma_factor = std::stod(value);
        else if (key == "learn_rate") cfg.learn_rate = std::stod(value);
        else if (key == "alpha_spr") cfg.alpha_spr = std::stod(value);
        else if (key == "sigma2_min") cfg.sigma2_min = std::stod(value);
        else if (key == "part_padding") cfg.part_padding = std::stod(value);
        else if (key == "ida_tol") cfg.ida_tol = std::stod(value);
        else if (key == "ida_max_iter") cfg.ida_max_iter = std::stoi(value);
        else if (key == "use_color") cfg.use_color = detail::parse_bool(value);
        else if (key == "use_constellation") cfg.use_constellation = detail::parse_bool(value);
        else
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
    }
    return cfg;
}

inline TrackerConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    return parse_config(in);
}

}  // namespace dpt
