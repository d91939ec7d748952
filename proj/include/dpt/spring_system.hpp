#pragma once

// 2D spring systems with dynamic nodes, fixed anchors and two spring kinds:
// zero-rest-length springs tying a dynamic node to an anchor ("static") and
// finite-rest-length springs between dynamic nodes ("dynamic"). The system
// energy is
//
//   E = 1/2 sum_i k_i ||x_i - a_i||^2  +  sum_(i,j) k_ij (mu_ij - ||x_i - x_j||)^2
//
// Two minimizers are provided: the iterative direct approach (IDA), which
// alternates exact per-axis equilibrium solves, and a Polak-Ribiere nonlinear
// conjugate gradient reference (CGD).

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpt {

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

struct DynamicSpring {
    int i = 0;               // first dynamic node
    int j = 0;               // second dynamic node
    double stiffness = 0.0;
    double nominal_length = 0.0;
};

struct StaticSpring {
    int node = 0;            // dynamic node
    int anchor = 0;          // anchor index; rest length is always zero
    double stiffness = 0.0;
};

struct SpringSystem {
    std::vector<Eigen::Vector2d> dynamic_positions;
    std::vector<Eigen::Vector2d> anchor_positions;
    std::vector<DynamicSpring> dynamic_springs;
    std::vector<StaticSpring> static_springs;

    int num_dynamic() const { return static_cast<int>(dynamic_positions.size()); }
    int num_anchors() const { return static_cast<int>(anchor_positions.size()); }
    int num_springs() const {
        return static_cast<int>(dynamic_springs.size() + static_springs.size());
    }

    // Throws std::invalid_argument on any violated structural invariant.
    void validate() const {
        const int n = num_dynamic();
        const int m = num_anchors();
        std::vector<char> touched(static_cast<size_t>(n), 0);
        std::vector<std::pair<int, int>> seen;
        seen.reserve(dynamic_springs.size());
        for (const auto& s : dynamic_springs) {
            if (s.i < 0 || s.i >= n || s.j < 0 || s.j >= n)
                throw std::invalid_argument("dynamic spring references invalid node index");
            if (s.i == s.j)
                throw std::invalid_argument("dynamic spring endpoints must differ");
            if (s.stiffness < 0.0 || s.nominal_length < 0.0)
                throw std::invalid_argument("spring stiffness and nominal length must be >= 0");
            const std::pair<int, int> key{std::min(s.i, s.j), std::max(s.i, s.j)};
            if (std::find(seen.begin(), seen.end(), key) != seen.end())
                throw std::invalid_argument("duplicate dynamic spring pair");
            seen.push_back(key);
            touched[static_cast<size_t>(s.i)] = touched[static_cast<size_t>(s.j)] = 1;
        }
        for (const auto& s : static_springs) {
            if (s.node < 0 || s.node >= n)
                throw std::invalid_argument("static spring references invalid dynamic node");
            if (s.anchor < 0 || s.anchor >= m)
                throw std::invalid_argument("static spring references invalid anchor");
            if (s.stiffness < 0.0)
                throw std::invalid_argument("spring stiffness must be >= 0");
            touched[static_cast<size_t>(s.node)] = 1;
        }
        for (int i = 0; i < n; ++i)
            if (!touched[static_cast<size_t>(i)])
                throw std::invalid_argument("dynamic node " + std::to_string(i) +
                                            " has no incident spring");
    }
};

// Row per spring (dynamic springs first), column per node (dynamic nodes
// followed by anchors); +1 at the first endpoint, -1 at the second.
struct ConnectivityMatrix {
    Eigen::MatrixXd b;
    int n_dynamic = 0;
};

inline ConnectivityMatrix build_connectivity(const SpringSystem& system) {
    system.validate();
    const int n = system.num_dynamic();
    const int cols = n + system.num_anchors();
    ConnectivityMatrix out;
    out.n_dynamic = n;
    out.b = Eigen::MatrixXd::Zero(system.num_springs(), cols);
    int row = 0;
    for (const auto& s : system.dynamic_springs) {
        out.b(row, s.i) = 1.0;
        out.b(row, s.j) = -1.0;
        ++row;
    }
    for (const auto& s : system.static_springs) {
        out.b(row, s.node) = 1.0;
        out.b(row, n + s.anchor) = -1.0;
        ++row;
    }
    return out;
}

inline double energy(const SpringSystem& system) {
    double e = 0.0;
    for (const auto& s : system.static_springs) {
        const Eigen::Vector2d d = system.dynamic_positions[static_cast<size_t>(s.node)] -
                                  system.anchor_positions[static_cast<size_t>(s.anchor)];
        e += 0.5 * s.stiffness * d.squaredNorm();
    }
    for (const auto& s : system.dynamic_springs) {
        const Eigen::Vector2d d = system.dynamic_positions[static_cast<size_t>(s.i)] -
                                  system.dynamic_positions[static_cast<size_t>(s.j)];
        const double stretch = s.nominal_length - d.norm();
        e += s.stiffness * stretch * stretch;
    }
    return e;
}

// Analytic gradient of the energy w.r.t. the stacked dynamic coordinates
// (x0, y0, x1, y1, ...). A coincident dynamic pair contributes no gradient.
inline Eigen::VectorXd energy_gradient(const SpringSystem& system,
                                       const std::vector<Eigen::Vector2d>& positions) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * system.num_dynamic());
    for (const auto& s : system.static_springs) {
        const Eigen::Vector2d d =
            positions[static_cast<size_t>(s.node)] -
            system.anchor_positions[static_cast<size_t>(s.anchor)];
        g.segment<2>(2 * s.node) += s.stiffness * d;
    }
    for (const auto& s : system.dynamic_springs) {
        const Eigen::Vector2d d =
            positions[static_cast<size_t>(s.i)] - positions[static_cast<size_t>(s.j)];
        const double len = d.norm();
        if (len <= 0.0) continue;
        const Eigen::Vector2d f = 2.0 * s.stiffness * (len - s.nominal_length) * (d / len);
        g.segment<2>(2 * s.i) += f;
        g.segment<2>(2 * s.j) -= f;
    }
    return g;
}

inline Eigen::VectorXd energy_gradient(const SpringSystem& system) {
    return energy_gradient(system, system.dynamic_positions);
}

struct SolveReport {
    std::vector<Eigen::Vector2d> final_positions;
    int iterations = 0;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    bool converged = false;
    double wall_time_s = 0.0;
    std::vector<double> energy_trace;  // filled only when requested
};

namespace detail {

// Finds dynamic-node components connected through positive-stiffness dynamic
// springs that have no positive-stiffness static attachment. Those make
// B^T K B singular on the dynamic block.
inline std::vector<int> unconstrained_nodes(const SpringSystem& system) {
    const int n = system.num_dynamic();
    std::vector<int> parent(static_cast<size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](int a) {
        while (parent[static_cast<size_t>(a)] != a) {
            parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
            a = parent[static_cast<size_t>(a)];
        }
        return a;
    };
    for (const auto& s : system.dynamic_springs)
        if (s.stiffness > 0.0) parent[static_cast<size_t>(find(s.i))] = find(s.j);
    std::vector<double> static_k(static_cast<size_t>(n), 0.0);
    for (const auto& s : system.static_springs)
        static_k[static_cast<size_t>(find(s.node))] += s.stiffness;
    std::vector<int> bad;
    for (int i = 0; i < n; ++i)
        if (static_k[static_cast<size_t>(find(i))] <= 0.0) bad.push_back(i);
    return bad;
}

inline void throw_if_singular(const SpringSystem& system) {
    const std::vector<int> bad = unconstrained_nodes(system);
    if (bad.empty()) return;
    std::ostringstream oss;
    oss << "singular stiffness system: node(s)";
    for (int i : bad) oss << ' ' << i;
    oss << " have no positive-stiffness path to an anchor";
    throw SolverError(oss.str());
}

// K_dyn_hat and K_stat_hat blocks of B^T K B. Identical for both axes, so
// they are assembled and factored once per solve.
//
// `dynamic_scale` maps the 2D energy onto the 1D force model: the energy
// carries 1/2 k on static terms but a bare k on dynamic terms, so the
// equivalent 1D spring constant of a dynamic spring is 2k. With that scaling
// one IDA iteration exactly minimizes a separable majorizer of the energy,
// which makes every iteration a descent step and fixed points stationary.
struct StiffnessBlocks {
    Eigen::MatrixXd k_dyn;   // n_dyn x n_dyn
    Eigen::MatrixXd k_stat;  // n_dyn x n_anchors
};

inline StiffnessBlocks assemble_blocks(const SpringSystem& system,
                                       double dynamic_scale = 1.0) {
    const int n = system.num_dynamic();
    StiffnessBlocks blocks;
    blocks.k_dyn = Eigen::MatrixXd::Zero(n, n);
    blocks.k_stat = Eigen::MatrixXd::Zero(n, system.num_anchors());
    for (const auto& s : system.dynamic_springs) {
        const double k = dynamic_scale * s.stiffness;
        blocks.k_dyn(s.i, s.i) += k;
        blocks.k_dyn(s.j, s.j) += k;
        blocks.k_dyn(s.i, s.j) -= k;
        blocks.k_dyn(s.j, s.i) -= k;
    }
    for (const auto& s : system.static_springs) {
        blocks.k_dyn(s.node, s.node) += s.stiffness;
        blocks.k_stat(s.node, s.anchor) -= s.stiffness;
    }
    return blocks;
}

// C_dyn * L for one axis. Static springs always carry a zero entry in L, so
// only the dynamic-spring columns contribute.
inline Eigen::VectorXd c_dyn_times_lengths(const SpringSystem& system,
                                           const Eigen::VectorXd& lengths,
                                           double dynamic_scale = 1.0) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(system.num_dynamic());
    for (size_t s = 0; s < system.dynamic_springs.size(); ++s) {
        const auto& spring = system.dynamic_springs[s];
        const double kl = dynamic_scale * spring.stiffness * lengths(static_cast<Eigen::Index>(s));
        out(spring.i) += kl;
        out(spring.j) -= kl;
    }
    return out;
}

}  // namespace detail

// Closed-form 1D equilibrium: x_dyn = K_dyn_hat^-1 (C_dyn L - K_stat_hat x_stat).
// `signed_lengths` holds one entry per dynamic spring, in spring order; static
// springs have rest length zero and take no entry.
inline Eigen::VectorXd solve_1d(const Eigen::VectorXd& positions_1d,
                                const Eigen::VectorXd& anchors_1d,
                                const SpringSystem& system,
                                const Eigen::VectorXd& signed_lengths) {
    system.validate();
    if (positions_1d.size() != system.num_dynamic() ||
        anchors_1d.size() != system.num_anchors())
        throw std::invalid_argument("solve_1d: position/anchor size mismatch");
    if (signed_lengths.size() != static_cast<Eigen::Index>(system.dynamic_springs.size()))
        throw std::invalid_argument("solve_1d: one signed length per dynamic spring expected");
    detail::throw_if_singular(system);
    const detail::StiffnessBlocks blocks = detail::assemble_blocks(system);
    const Eigen::VectorXd rhs =
        detail::c_dyn_times_lengths(system, signed_lengths) - blocks.k_stat * anchors_1d;
    return blocks.k_dyn.ldlt().solve(rhs);
}

// Iterative direct approach: per iteration, project nominal lengths onto each
// axis along the current spring directions, solve both 1D systems in closed
// form and reassemble. The stiffness factorization and the anchor term are
// computed once up front.
//
// Stops when the largest node displacement drops below `tol`, or, if
// `energy_rel_tol` > 0, when an iteration improves the energy by less than
// that relative amount. The displacement criterion chases slowly rotating
// spring directions long after the energy has flattened, so benchmarks use
// the energy criterion as well.
inline SolveReport solve_ida(const SpringSystem& input, double tol = 1e-3,
                             int max_iter = 100, bool record_trace = false,
                             double energy_rel_tol = 0.0) {
    input.validate();
    if (tol <= 0.0) throw std::invalid_argument("solve_ida: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("solve_ida: max_iter must be >= 1");
    detail::throw_if_singular(input);

    const auto t0 = std::chrono::steady_clock::now();
    const int n = input.num_dynamic();
    const size_t n_springs = input.dynamic_springs.size();

    const detail::StiffnessBlocks blocks = detail::assemble_blocks(input, 2.0);
    const Eigen::LDLT<Eigen::MatrixXd> factor(blocks.k_dyn);

    Eigen::VectorXd anchors_x(input.num_anchors()), anchors_y(input.num_anchors());
    for (int a = 0; a < input.num_anchors(); ++a) {
        anchors_x(a) = input.anchor_positions[static_cast<size_t>(a)].x();
        anchors_y(a) = input.anchor_positions[static_cast<size_t>(a)].y();
    }
    const Eigen::VectorXd stat_term_x = blocks.k_stat * anchors_x;
    const Eigen::VectorXd stat_term_y = blocks.k_stat * anchors_y;

    SpringSystem work = input;
    SolveReport report;
    report.initial_energy = energy(work);
    if (record_trace) report.energy_trace.push_back(report.initial_energy);

    // Per-spring unit directions; reused when endpoints coincide.
    std::vector<Eigen::Vector2d> directions(n_springs, Eigen::Vector2d(M_SQRT1_2, M_SQRT1_2));

    Eigen::VectorXd lengths_x(static_cast<Eigen::Index>(n_springs));
    Eigen::VectorXd lengths_y(static_cast<Eigen::Index>(n_springs));

    double prev_energy = report.initial_energy;
    for (int iter = 1; iter <= max_iter; ++iter) {
        for (size_t s = 0; s < n_springs; ++s) {
            const auto& spring = input.dynamic_springs[s];
            const Eigen::Vector2d d = work.dynamic_positions[static_cast<size_t>(spring.i)] -
                                      work.dynamic_positions[static_cast<size_t>(spring.j)];
            const double len = d.norm();
            if (len > 0.0) directions[s] = d / len;
            lengths_x(static_cast<Eigen::Index>(s)) = spring.nominal_length * directions[s].x();
            lengths_y(static_cast<Eigen::Index>(s)) = spring.nominal_length * directions[s].y();
        }

        const Eigen::VectorXd new_x =
            factor.solve(detail::c_dyn_times_lengths(input, lengths_x, 2.0) - stat_term_x);
        const Eigen::VectorXd new_y =
            factor.solve(detail::c_dyn_times_lengths(input, lengths_y, 2.0) - stat_term_y);
        if (!new_x.allFinite() || !new_y.allFinite())
            throw SolverError("solve_ida: non-finite positions");

        double max_move = 0.0;
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector2d next(new_x(i), new_y(i));
            max_move = std::max(
                max_move, (next - work.dynamic_positions[static_cast<size_t>(i)]).norm());
            work.dynamic_positions[static_cast<size_t>(i)] = next;
        }

        report.iterations = iter;
        const double cur_energy = energy(work);
        if (record_trace) report.energy_trace.push_back(cur_energy);
        const bool energy_flat =
            energy_rel_tol > 0.0 &&
            prev_energy - cur_energy < energy_rel_tol * std::max(cur_energy, 1e-12);
        prev_energy = cur_energy;
        if (max_move < tol || energy_flat) {
            report.converged = true;
            break;
        }
    }

    report.final_positions = work.dynamic_positions;
    report.final_energy = energy(work);
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

// Polak-Ribiere (PR+) nonlinear conjugate gradient over the stacked dynamic
// coordinates, with a strong-Wolfe line search and restart on non-descent
// directions. Stops on gradient infinity norm < tol.
inline SolveReport solve_cgd(const SpringSystem& input, double tol = 1e-3,
                             int max_iter = 5000, bool record_trace = false) {
    input.validate();
    if (tol <= 0.0) throw std::invalid_argument("solve_cgd: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("solve_cgd: max_iter must be >= 1");

    const auto t0 = std::chrono::steady_clock::now();
    SpringSystem work = input;
    const int n = work.num_dynamic();

    auto positions_of = [n](const Eigen::VectorXd& v) {
        std::vector<Eigen::Vector2d> p(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = v.segment<2>(2 * i);
        return p;
    };
    auto eval_f = [&](const Eigen::VectorXd& v) {
        work.dynamic_positions = positions_of(v);
        return energy(work);
    };
    auto eval_g = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd g = energy_gradient(input, positions_of(v));
        if (!g.allFinite()) throw SolverError("solve_cgd: non-finite gradient");
        return g;
    };

    Eigen::VectorXd x(2 * n);
    for (int i = 0; i < n; ++i) x.segment<2>(2 * i) = input.dynamic_positions[static_cast<size_t>(i)];

    SolveReport report;
    double fx = eval_f(x);
    report.initial_energy = fx;
    if (record_trace) report.energy_trace.push_back(fx);

    Eigen::VectorXd grad = eval_g(x);
    Eigen::VectorXd dir = -grad;
    double prev_step = 1.0 / std::max(1.0, grad.lpNorm<Eigen::Infinity>());
    constexpr double wolfe_c1 = 1e-4;
    constexpr double wolfe_c2 = 0.1;

    for (int iter = 1; iter <= max_iter; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() < tol) {
            report.converged = true;
            break;
        }

        double slope = grad.dot(dir);
        if (slope >= 0.0) {  // restart
            dir = -grad;
            slope = grad.dot(dir);
        }

        // Strong Wolfe line search: bracket by step doubling, then bisect.
        double step = prev_step * 2.0;
        double lo = 0.0, f_lo = fx, hi = -1.0;
        double f_step = 0.0;
        Eigen::VectorXd g_step;
        bool accepted = false;
        double a_prev = 0.0, f_prev = fx;
        for (int probe = 0; probe < 30; ++probe) {
            f_step = eval_f(x + step * dir);
            if (f_step > fx + wolfe_c1 * step * slope || (probe > 0 && f_step >= f_prev)) {
                lo = a_prev;
                f_lo = f_prev;
                hi = step;
                break;
            }
            g_step = eval_g(x + step * dir);
            const double dphi = g_step.dot(dir);
            if (std::abs(dphi) <= -wolfe_c2 * slope) {
                accepted = true;
                break;
            }
            if (dphi >= 0.0) {
                lo = step;
                f_lo = f_step;
                hi = a_prev;
                break;
            }
            a_prev = step;
            f_prev = f_step;
            step *= 2.0;
        }
        if (!accepted && hi >= 0.0) {
            for (int zoom = 0; zoom < 30; ++zoom) {
                step = 0.5 * (lo + hi);
                f_step = eval_f(x + step * dir);
                if (f_step > fx + wolfe_c1 * step * slope || f_step >= f_lo) {
                    hi = step;
                    continue;
                }
                g_step = eval_g(x + step * dir);
                const double dphi = g_step.dot(dir);
                if (std::abs(dphi) <= -wolfe_c2 * slope) {
                    accepted = true;
                    break;
                }
                if (dphi * (hi - lo) >= 0.0) hi = lo;
                lo = step;
                f_lo = f_step;
            }
        }
        if (!accepted) {
            // Fall back to the best point found; stop if it is no better.
            f_step = eval_f(x + step * dir);
            if (!(f_step < fx)) {
                report.iterations = iter;
                if (record_trace) report.energy_trace.push_back(fx);
                break;
            }
            g_step = eval_g(x + step * dir);
        }

        x += step * dir;
        fx = f_step;
        prev_step = step;

        const double beta = std::max(
            0.0, g_step.dot(g_step - grad) / std::max(grad.squaredNorm(), 1e-300));
        dir = -g_step + beta * dir;
        grad = g_step;

        report.iterations = iter;
        if (record_trace) report.energy_trace.push_back(fx);
    }

    work.dynamic_positions = positions_of(x);
    report.final_positions = work.dynamic_positions;
    report.final_energy = fx;
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace dpt
