#pragma once

// Randomized spring-system generator and the IDA-vs-CGD convergence
// experiment. Systems live in the unit square; every trial derives its own
// RNG stream from (seed, size, trial) so results do not depend on execution
// order.

#include "dpt/spring_system.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dpt {

namespace detail {

// splitmix64; used to mix substream identifiers into seeds.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic across standard library implementations, unlike
// std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

}  // namespace detail

// Fully connected random system. Dynamic nodes are initialized at uniform
// positions in [0,1]^2 and nominal lengths taken from that geometry; each
// node is then displaced by U([-0.5,0.5]^2) and its anchor placed at the
// displaced position plus U([-0.25,0.25]^2), so the optimizer starts at the
// rest shape and is pulled toward the anchor configuration. Dynamic stiffness
// k = (sigma * mu)^-2 with sigma = 0.1; static stiffness
// k = 1/2 + u * mean(dynamic stiffness), u ~ U[0,1].
inline SpringSystem generate_random_system(int n_dyn, uint64_t seed) {
    if (n_dyn < 2) throw std::invalid_argument("generate_random_system: n_dyn must be >= 2");
    std::mt19937_64 rng(seed);

    std::vector<Eigen::Vector2d> base(static_cast<size_t>(n_dyn));
    for (auto& p : base) {
        p.x() = detail::uniform01(rng);
        p.y() = detail::uniform01(rng);
    }

    SpringSystem system;
    system.dynamic_positions = base;
    system.anchor_positions.resize(static_cast<size_t>(n_dyn));
    std::vector<Eigen::Vector2d> displaced(static_cast<size_t>(n_dyn));
    for (int i = 0; i < n_dyn; ++i) {
        const Eigen::Vector2d displacement(detail::uniform(rng, -0.5, 0.5),
                                           detail::uniform(rng, -0.5, 0.5));
        displaced[static_cast<size_t>(i)] = base[static_cast<size_t>(i)] + displacement;
    }
    for (int i = 0; i < n_dyn; ++i) {
        const Eigen::Vector2d offset(detail::uniform(rng, -0.25, 0.25),
                                     detail::uniform(rng, -0.25, 0.25));
        system.anchor_positions[static_cast<size_t>(i)] =
            displaced[static_cast<size_t>(i)] + offset;
    }

    constexpr double sigma = 0.1;
    double stiffness_sum = 0.0;
    for (int i = 0; i < n_dyn; ++i) {
        for (int j = i + 1; j < n_dyn; ++j) {
            const double mu = (base[static_cast<size_t>(i)] - base[static_cast<size_t>(j)]).norm();
            const double k = 1.0 / ((sigma * mu) * (sigma * mu));
            system.dynamic_springs.push_back({i, j, k, mu});
            stiffness_sum += k;
        }
    }
    const double mean_dynamic_k = stiffness_sum / static_cast<double>(system.dynamic_springs.size());
    for (int i = 0; i < n_dyn; ++i) {
        const double u = detail::uniform01(rng);
        system.static_springs.push_back({i, i, 0.5 + u * mean_dynamic_k});
    }
    return system;
}

struct SolverSettings {
    double ida_tol = 1e-3;
    int ida_max_iter = 100;
    double ida_energy_rel_tol = 2e-3;  // energy-plateau stop; 0 disables
    double cgd_tol = 1e-3;
    int cgd_max_iter = 5000;
    // A trial is flagged degenerate when CGD stalls far above the IDA energy,
    // mirroring the manual removal of pathological CGD runs.
    double degenerate_factor = 10.0;
    int traced_trials = 0;  // record per-iteration energy for the first k trials per size
};

struct TrialRecord {
    int size = 0;
    int trial = 0;
    SolveReport ida;
    SolveReport cgd;
    bool degenerate = false;
};

struct BenchmarkRow {
    int size = 0;
    std::string solver;
    double mean_iters = 0.0;
    double std_iters = 0.0;
    double mean_time_s = 0.0;
    double mean_final_energy = 0.0;
    int degenerate_count = 0;
};

struct BenchmarkResult {
    std::vector<TrialRecord> trials;
    std::vector<BenchmarkRow> rows;  // two rows (ida, cgd) per size
};

inline bool is_degenerate_pair(const SolveReport& ida, const SolveReport& cgd,
                               double factor) {
    return cgd.final_energy > factor * ida.final_energy + 1e-12;
}

inline BenchmarkResult convergence_experiment(const std::vector<int>& sizes, int trials,
                                              uint64_t seed,
                                              const SolverSettings& settings = {}) {
    if (trials < 1) throw std::invalid_argument("convergence_experiment: trials must be >= 1");
    BenchmarkResult result;
    for (int size : sizes) {
        std::vector<double> ida_iters, cgd_iters, ida_times, cgd_times, ida_energy, cgd_energy;
        int degenerate_count = 0;
        for (int trial = 0; trial < trials; ++trial) {
            const uint64_t trial_seed =
                detail::mix_seed(seed, detail::mix_seed(static_cast<uint64_t>(size),
                                                        static_cast<uint64_t>(trial)));
            const SpringSystem system = generate_random_system(size, trial_seed);
            const bool trace = trial < settings.traced_trials;

            TrialRecord record;
            record.size = size;
            record.trial = trial;
            record.ida = solve_ida(system, settings.ida_tol, settings.ida_max_iter, trace,
                                   settings.ida_energy_rel_tol);
            record.cgd = solve_cgd(system, settings.cgd_tol, settings.cgd_max_iter, trace);
            record.degenerate =
                is_degenerate_pair(record.ida, record.cgd, settings.degenerate_factor);

            if (record.degenerate) {
                ++degenerate_count;
            } else {
                ida_iters.push_back(record.ida.iterations);
                cgd_iters.push_back(record.cgd.iterations);
                ida_times.push_back(record.ida.wall_time_s);
                cgd_times.push_back(record.cgd.wall_time_s);
                ida_energy.push_back(record.ida.final_energy);
                cgd_energy.push_back(record.cgd.final_energy);
            }
            result.trials.push_back(std::move(record));
        }

        auto mean = [](const std::vector<double>& v) {
            if (v.empty()) return 0.0;
            double s = 0.0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        auto stddev = [&mean](const std::vector<double>& v) {
            if (v.size() < 2) return 0.0;
            const double m = mean(v);
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            return std::sqrt(s / static_cast<double>(v.size() - 1));
        };

        result.rows.push_back({size, "ida", mean(ida_iters), stddev(ida_iters),
                               mean(ida_times), mean(ida_energy), degenerate_count});
        result.rows.push_back({size, "cgd", mean(cgd_iters), stddev(cgd_iters),
                               mean(cgd_times), mean(cgd_energy), degenerate_count});
    }
    return result;
}

}  // namespace dpt
