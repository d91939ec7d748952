#pragma once

// Two-layer deformable-parts tracker: a coarse layer (root correlation
// filter x global color model) proposes a translation, a fully-connected
// constellation of part filters refines it by MAP inference on the dual
// spring system, and the models are updated bottom-up with per-part gating.

#include "dpt/config.hpp"
#include "dpt/correlation_filter.hpp"
#include "dpt/segmentation.hpp"
#include "dpt/spring_system.hpp"
#include "dpt/transform.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dpt {

struct Part {
    cv::Point2d position;   // part center, image pixels
    cv::Size size;          // part region; constant over the whole track
    cv::Size template_px;   // search window fed to the filter; constant
    cv::Point grid_pos;     // position in the part layout grid
    Filter filter;
};

struct Constellation {
    std::vector<Part> parts;
    std::vector<std::pair<int, int>> links;
    std::vector<double> preferred_dist;  // one per link, > 0
};

struct CoarseLayer {
    Filter root;
    cv::Size root_template_px;  // fixed search-window size
    ColorModel color;
    cv::Rect2d bbox;
    double prev_size = 0.0;     // previous object area M_siz, pixels^2
};

struct TrackerState {
    CoarseLayer coarse;
    Constellation constellation;
    TrackerConfig config;
    int frame_index = 0;
};

struct FrameResult {
    cv::Rect2d bbox;
    std::vector<cv::Point2d> part_positions;
    std::vector<double> part_weights;
    std::vector<char> updated_parts;
    double alpha_col = 1.0;
    double map_energy_initial = 0.0;
    double map_energy_final = 0.0;
    bool low_confidence = false;
};

struct CoarseResult {
    cv::Point2d translation{0.0, 0.0};
    SegmentationResult seg;     // empty mats when color is disabled
    cv::Point seg_origin;       // top-left of the segmented patch, image coords
    double alpha_col = 1.0;
    bool low_confidence = false;
};

namespace detail {

inline cv::Point2d rect_center(const cv::Rect2d& r) {
    return {r.x + r.width / 2.0, r.y + r.height / 2.0};
}

inline cv::Rect2d rect_from_center(cv::Point2d c, double w, double h) {
    return {c.x - w / 2.0, c.y - h / 2.0, w, h};
}

inline cv::Rect rect_to_int(const cv::Rect2d& r) {
    const int x = static_cast<int>(std::round(r.x));
    const int y = static_cast<int>(std::round(r.y));
    return {x, y, static_cast<int>(std::round(r.width)),
            static_cast<int>(std::round(r.height))};
}

// Label bandwidth relative to the object's extent inside the padded search
// window (the KCF convention), not the window itself.
inline double label_sigma_for(cv::Size grid, double factor, double padding) {
    return factor *
           std::hypot(static_cast<double>(grid.width), static_cast<double>(grid.height)) /
           padding;
}

inline Filter train_filter(const cv::Mat& image, cv::Point2d center, cv::Size template_px,
                           const TrackerConfig& cfg, double padding) {
    const FeaturePatch patch =
        extract_features(image, center, template_px, cfg.cell_size, true);
    const cv::Mat labels =
        gaussian_labels(patch.grid().height, patch.grid().width,
                        label_sigma_for(patch.grid(), cfg.label_sigma_factor, padding));
    return train(patch, labels, cfg.lambda, cfg.kernel_sigma);
}

inline std::vector<std::pair<int, int>> build_links(const std::vector<Part>& parts,
                                                    Topology topology,
                                                    cv::Point2d bbox_center) {
    std::vector<std::pair<int, int>> links;
    const int n = static_cast<int>(parts.size());
    switch (topology) {
        case Topology::kFull:
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) links.emplace_back(i, j);
            break;
        case Topology::kLocal:
            // Grid 4-neighborhood; a ring for the 2x2 layout.
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    const int d = std::abs(parts[static_cast<size_t>(i)].grid_pos.x -
                                           parts[static_cast<size_t>(j)].grid_pos.x) +
                                  std::abs(parts[static_cast<size_t>(i)].grid_pos.y -
                                           parts[static_cast<size_t>(j)].grid_pos.y);
                    if (d == 1) links.emplace_back(i, j);
                }
            break;
        case Topology::kStar: {
            int hub = 0;
            double best = std::numeric_limits<double>::max();
            for (int i = 0; i < n; ++i) {
                const double d = cv::norm(parts[static_cast<size_t>(i)].position - bbox_center);
                if (d < best - 1e-12) {
                    best = d;
                    hub = i;
                }
            }
            for (int i = 0; i < n; ++i)
                if (i != hub) links.emplace_back(std::min(hub, i), std::max(hub, i));
            break;
        }
    }
    return links;
}

}  // namespace detail

// Splits the box into the configured part layout and trains one filter per
// part and the root filter.
inline TrackerState initialize(const cv::Mat& image, cv::Rect2d bbox,
                               const TrackerConfig& config = {}) {
    if (image.empty()) throw std::invalid_argument("initialize: empty image");
    if (bbox.width * bbox.height < 16.0 * 16.0)
        throw std::invalid_argument("initialize: bounding box smaller than 16x16");
    const cv::Rect2d image_rect(0, 0, image.cols, image.rows);
    if ((bbox & image_rect).area() < bbox.area() * 0.5)
        throw std::invalid_argument("initialize: bounding box mostly outside the image");

    TrackerState state;
    state.config = config;
    state.coarse.bbox = bbox;
    state.coarse.prev_size = bbox.area();
    state.coarse.root_template_px = {
        static_cast<int>(std::round(bbox.width * config.search_padding)),
        static_cast<int>(std::round(bbox.height * config.search_padding))};
    const cv::Point2d center = detail::rect_center(bbox);
    state.coarse.root = detail::train_filter(image, center, state.coarse.root_template_px,
                                             config, config.search_padding);
    if (config.use_color) {
        state.coarse.color =
            build_model(image, detail::rect_to_int(bbox), config.alpha_sur, config.hsv_bins);
        state.coarse.color.prior_fg = std::clamp(
            bbox.area() / (static_cast<double>(state.coarse.root_template_px.width) *
                           state.coarse.root_template_px.height),
            0.05, 0.95);
    }

    if (config.use_constellation) {
        const int grid_n = config.part_grid == PartGrid::k2x2 ? 2 : 3;
        const bool overlap = config.part_grid == PartGrid::k3x3Overlap;
        const double part_w = overlap ? bbox.width / 2.0 : bbox.width / grid_n;
        const double part_h = overlap ? bbox.height / 2.0 : bbox.height / grid_n;
        for (int gy = 0; gy < grid_n; ++gy) {
            for (int gx = 0; gx < grid_n; ++gx) {
                Part part;
                part.grid_pos = {gx, gy};
                part.position = {bbox.x + bbox.width * (2.0 * gx + 1.0) / (2.0 * grid_n),
                                 bbox.y + bbox.height * (2.0 * gy + 1.0) / (2.0 * grid_n)};
                part.size = {static_cast<int>(std::round(part_w)),
                             static_cast<int>(std::round(part_h))};
                part.template_px = {
                    static_cast<int>(std::round(part_w * config.part_padding)),
                    static_cast<int>(std::round(part_h * config.part_padding))};
                part.filter =
                    detail::train_filter(image, part.position, part.template_px, config,
                                         config.part_padding);
                state.constellation.parts.push_back(std::move(part));
            }
        }
        state.constellation.links =
            detail::build_links(state.constellation.parts, config.topology, center);
        for (const auto& [i, j] : state.constellation.links)
            state.constellation.preferred_dist.push_back(
                cv::norm(state.constellation.parts[static_cast<size_t>(i)].position -
                         state.constellation.parts[static_cast<size_t>(j)].position));
    }
    return state;
}

// Coarse localization: root filter response times the (regularized,
// informativeness-weighted) color probability, argmax as a translation.
inline CoarseResult coarse_localize(const TrackerState& state, const cv::Mat& image) {
    const TrackerConfig& cfg = state.config;
    const cv::Point2d center = detail::rect_center(state.coarse.bbox);
    const cv::Size region_px = state.coarse.root_template_px;

    const FeaturePatch patch = extract_features(image, center, region_px, cfg.cell_size, true);
    cv::Mat response = respond(state.coarse.root, patch);

    CoarseResult out;
    cv::Mat product;
    response.convertTo(product, CV_32F);
    cv::threshold(product, product, 0.0, 0.0, cv::THRESH_TOZERO);

    if (cfg.use_color) {
        const cv::Mat patch_bgr = extract_patch(image, center, region_px);
        ColorModel model = state.coarse.color;
        model.prior_fg =
            std::clamp(state.coarse.bbox.area() /
                           (static_cast<double>(region_px.width) * region_px.height),
                       0.05, 0.95);
        out.seg = segment(patch_bgr, cv::Rect(0, 0, region_px.width, region_px.height), model,
                          state.coarse.prev_size, cfg.alpha_min, cfg.alpha_max);
        out.seg_origin = {static_cast<int>(std::round(center.x)) - region_px.width / 2,
                          static_cast<int>(std::round(center.y)) - region_px.height / 2};
        out.alpha_col = out.seg.alpha_col;
        cv::Mat prob = color_probability(out.seg.posterior, out.alpha_col);
        // Box-filter down to the response grid. Response cell s covers patch
        // pixels centered at center + s*cell, so the posterior is first
        // shifted by half a cell to center each averaging window.
        const double half_cell = cfg.cell_size / 2.0;
        const cv::Mat shift_half =
            (cv::Mat_<double>(2, 3) << 1, 0, half_cell, 0, 1, half_cell);
        cv::warpAffine(prob, prob, shift_half, prob.size(), cv::INTER_LINEAR,
                       cv::BORDER_REPLICATE);
        cv::Mat prob_cells;
        cv::resize(prob, prob_cells, product.size(), 0, 0, cv::INTER_AREA);
        cv::GaussianBlur(prob_cells, prob_cells, cv::Size(3, 3), 0.0);
        // The response is shift-indexed (cell (0,0) = zero displacement =
        // patch center); rotate the spatially indexed color map to match.
        const int gh = prob_cells.rows, gw = prob_cells.cols;
        cv::Mat prob_shifted(prob_cells.size(), CV_32F);
        for (int m = 0; m < gh; ++m)
            for (int n = 0; n < gw; ++n)
                prob_shifted.at<float>(m, n) =
                    prob_cells.at<float>((m + gh / 2) % gh, (n + gw / 2) % gw);
        product = product.mul(prob_shifted);
    } else {
        out.alpha_col = 1.0;
    }

    double mn = 0.0, mx = 0.0;
    cv::Point peak;
    cv::minMaxLoc(product, &mn, &mx, nullptr, &peak);
    if (!(mx > 0.0) || mx - mn < 1e-12 * std::max(std::abs(mx), 1e-30)) {
        out.low_confidence = true;
        return out;
    }
    // Cell-level argmax on the product; sub-cell refinement on the template
    // response alone, so the color blob's gradient cannot tilt the peak.
    const int gh = product.rows, gw = product.cols;
    auto resp_at = [&](int m, int n) {
        return response.at<double>((m % gh + gh) % gh, (n % gw + gw) % gw);
    };
    const double dy = detail::subpixel_offset(resp_at(peak.y - 1, peak.x),
                                              resp_at(peak.y, peak.x),
                                              resp_at(peak.y + 1, peak.x));
    const double dx = detail::subpixel_offset(resp_at(peak.y, peak.x - 1),
                                              resp_at(peak.y, peak.x),
                                              resp_at(peak.y, peak.x + 1));
    out.translation = {(detail::wrapped_shift(peak.x, gw) + dx) * cfg.cell_size,
                       (detail::wrapped_shift(peak.y, gh) + dy) * cfg.cell_size};
    return out;
}

struct SpringBuildResult {
    SpringSystem system;
    std::vector<ResponseStats> stats;       // per part; peak_value 0 when uninformative
    std::vector<cv::Point2d> start_positions;
};

// Applies the coarse translation to every part, reads each part filter's
// response statistics and assembles the dual spring system (anchors at the
// response peaks, static stiffness w/sigma^2, dynamic stiffness from the
// anchor-distance deviation).
inline SpringBuildResult build_spring_system(const TrackerState& state, const cv::Mat& image,
                                             cv::Point2d translation) {
    const TrackerConfig& cfg = state.config;
    const auto& parts = state.constellation.parts;

    SpringBuildResult out;
    out.stats.resize(parts.size());
    out.start_positions.resize(parts.size());
    out.system.dynamic_positions.resize(parts.size());
    out.system.anchor_positions.resize(parts.size());

    std::vector<char> informative(parts.size(), 1);
    for (size_t i = 0; i < parts.size(); ++i) {
        const cv::Point2d pos = parts[i].position + translation;
        out.start_positions[i] = pos;
        out.system.dynamic_positions[i] = {pos.x, pos.y};
        const FeaturePatch patch =
            extract_features(image, pos, parts[i].template_px, cfg.cell_size, true);
        const cv::Mat response = respond(parts[i].filter, patch);
        double weight = 0.0;
        cv::Point2d anchor = pos;
        double variance = cfg.sigma2_min;
        try {
            const ResponseStats stats = response_stats(response, pos, cfg.cell_size);
            weight = std::max(0.0, stats.peak_value);
            anchor = stats.peak_pos;
            variance = std::max(stats.weighted_variance, cfg.sigma2_min);
            out.stats[i] = stats;
        } catch (const UninformativeResponse&) {
            informative[i] = 0;  // k = 0; the part rides on its springs
        }
        out.stats[i].peak_value = weight;
        out.stats[i].peak_pos = anchor;
        out.stats[i].weighted_variance = variance;
        out.system.anchor_positions[i] = {anchor.x, anchor.y};
        out.system.static_springs.push_back(
            {static_cast<int>(i), static_cast<int>(i), weight / variance});
    }

    const auto& links = state.constellation.links;
    for (size_t l = 0; l < links.size(); ++l) {
        const int i = links[l].first, j = links[l].second;
        const double mu = state.constellation.preferred_dist[l];
        const double da = cv::norm(out.stats[static_cast<size_t>(i)].peak_pos -
                                   out.stats[static_cast<size_t>(j)].peak_pos);
        double k = ((mu - da) / mu) * ((mu - da) / mu);
        // A part without measurement support must still be carried by its
        // springs; keep a minimal geometric constraint on its links.
        if (!informative[static_cast<size_t>(i)] || !informative[static_cast<size_t>(j)])
            k = std::max(k, 1e-4);
        out.system.dynamic_springs.push_back({i, j, k, mu});
    }
    return out;
}

// MAP inference over the constellation posterior = energy minimization of the
// dual spring system.
inline std::vector<cv::Point2d> map_inference(const SpringSystem& system, SolveReport* report,
                                              const TrackerConfig& cfg) {
    const SolveReport r = solve_ida(system, cfg.ida_tol, cfg.ida_max_iter);
    if (report) *report = r;
    std::vector<cv::Point2d> out;
    out.reserve(r.final_positions.size());
    for (const auto& p : r.final_positions) out.emplace_back(p.x(), p.y());
    return out;
}

// Euclidean-transform bounding-box carry: rotation is dropped when resizing
// the axis-aligned box.
inline cv::Rect2d transform_bbox(const cv::Rect2d& bbox, const SimilarityTransform& t) {
    const cv::Point2d c = t.apply(detail::rect_center(bbox));
    const double s = t.scale();
    return detail::rect_from_center(c, bbox.width * s, bbox.height * s);
}

namespace detail {

// Fraction of a part's region covered by foreground mask pixels. Pixels
// outside the segmented patch count as background.
inline double mask_coverage(const SegmentationResult& seg, cv::Point seg_origin,
                            cv::Point2d part_center, cv::Size part_size) {
    if (seg.mask.empty()) return 0.0;
    const cv::Rect part_rect(
        static_cast<int>(std::round(part_center.x - part_size.width / 2.0)),
        static_cast<int>(std::round(part_center.y - part_size.height / 2.0)),
        part_size.width, part_size.height);
    const cv::Rect patch_rect(seg_origin, seg.mask.size());
    const cv::Rect inter = part_rect & patch_rect;
    if (inter.area() <= 0 || part_rect.area() <= 0) return 0.0;
    const cv::Rect local(inter.x - seg_origin.x, inter.y - seg_origin.y, inter.width,
                         inter.height);
    return static_cast<double>(cv::countNonZero(seg.mask(local))) / part_rect.area();
}

}  // namespace detail

// Bottom-up part update: a part's filter adapts only when its response is at
// least half of the strongest one and (when the segmentation is trusted) at
// least 20% of its pixels are foreground. Preferred distances always follow
// the MAP estimate autoregressively.
inline std::vector<char> update_parts(TrackerState& state, const cv::Mat& image,
                                      const std::vector<cv::Point2d>& map_positions,
                                      const std::vector<ResponseStats>& stats,
                                      const CoarseResult& coarse) {
    const TrackerConfig& cfg = state.config;
    auto& parts = state.constellation.parts;
    std::vector<char> updated(parts.size(), 0);

    double w_max = 0.0;
    for (const auto& s : stats) w_max = std::max(w_max, s.peak_value);

    for (size_t i = 0; i < parts.size(); ++i) {
        parts[i].position = map_positions[i];
        const bool weight_ok = w_max > 0.0 && stats[i].peak_value >= 0.5 * w_max;
        bool mask_ok = true;
        if (cfg.use_color && coarse.alpha_col != 1.0)
            mask_ok = detail::mask_coverage(coarse.seg, coarse.seg_origin, map_positions[i],
                                            parts[i].size) >= 0.2;
        if (weight_ok && mask_ok) {
            const FeaturePatch patch = extract_features(image, map_positions[i],
                                                        parts[i].template_px, cfg.cell_size, true);
            parts[i].filter = update(parts[i].filter, patch, cfg.learn_rate);
            updated[i] = 1;
        }
    }

    for (size_t l = 0; l < state.constellation.links.size(); ++l) {
        const auto [i, j] = state.constellation.links[l];
        const double d = cv::norm(map_positions[static_cast<size_t>(i)] -
                                  map_positions[static_cast<size_t>(j)]);
        double& mu = state.constellation.preferred_dist[l];
        mu = mu * (1.0 - cfg.alpha_spr) + d * cfg.alpha_spr;
    }
    return updated;
}

// Coarse model update at the new box: root filter always (at the learn rate),
// color histograms only when the segmentation passed the informativeness
// test.
inline void update_coarse(TrackerState& state, const cv::Mat& image, double alpha_col) {
    const TrackerConfig& cfg = state.config;
    const cv::Point2d center = detail::rect_center(state.coarse.bbox);
    const FeaturePatch patch =
        extract_features(image, center, state.coarse.root_template_px, cfg.cell_size, true);
    state.coarse.root = update(state.coarse.root, patch, cfg.learn_rate);
    if (cfg.use_color) {
        state.coarse.color =
            update_model(state.coarse.color, image, detail::rect_to_int(state.coarse.bbox),
                         cfg.alpha_sur, cfg.alpha_hist, alpha_col == 0.1);
    }
    state.coarse.prev_size = state.coarse.bbox.area();
}

// One full tracking iteration (top-down localization, MAP refinement,
// bottom-up updates). Throws on unrecoverable solver/feature errors, leaving
// the state unchanged.
inline FrameResult track_frame(TrackerState& state, const cv::Mat& image) {
    TrackerState work = state;
    const CoarseResult coarse = coarse_localize(work, image);

    FrameResult result;
    result.alpha_col = coarse.alpha_col;
    result.low_confidence = coarse.low_confidence;

    if (!work.config.use_constellation || work.constellation.parts.empty()) {
        work.coarse.bbox.x += coarse.translation.x;
        work.coarse.bbox.y += coarse.translation.y;
        update_coarse(work, image, coarse.alpha_col);
    } else {
        SpringBuildResult springs = build_spring_system(work, image, coarse.translation);
        SolveReport report;
        const std::vector<cv::Point2d> map_positions =
            map_inference(springs.system, &report, work.config);
        result.map_energy_initial = report.initial_energy;
        result.map_energy_final = report.final_energy;

        std::vector<cv::Point2d> prev_positions;
        for (const auto& p : work.constellation.parts) prev_positions.push_back(p.position);
        const SimilarityTransform t = fit_similarity(prev_positions, map_positions);
        work.coarse.bbox = transform_bbox(work.coarse.bbox, t);

        result.updated_parts = update_parts(work, image, map_positions, springs.stats, coarse);
        for (const auto& s : springs.stats) result.part_weights.push_back(s.peak_value);
        result.part_positions = map_positions;
        update_coarse(work, image, coarse.alpha_col);
    }

    ++work.frame_index;
    result.bbox = work.coarse.bbox;
    state = std::move(work);
    return result;
}

}  // namespace dpt
