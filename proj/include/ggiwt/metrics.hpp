#pragma once

#include "ggiwt/linalg.hpp"
#include "ggiwt/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace ggiwt {

struct MetricConfig {
    /// Base-distance cutoff (m).
    double cutoff = 10.0;
    double order = 2.0;
    /// Cost per track switch; assigned/unassigned transitions count half.
    double switch_penalty = 2.0;
    /// State-space bound for the exact solver.
    std::size_t max_states = 20000;
};

/// Per-scan metric values. total^p = c_l^p + c_m^p + c_f^p + c_t^p.
struct MetricReport {
    std::vector<double> total, c_l, c_m, c_f, c_t;
    std::vector<double> est_card, true_card;

    [[nodiscard]] std::size_t size() const { return total.size(); }

    void push_back(double tot, double l, double m, double f, double t, double ec, double tc) {
        total.push_back(tot);
        c_l.push_back(l);
        c_m.push_back(m);
        c_f.push_back(f);
        c_t.push_back(t);
        est_card.push_back(ec);
        true_card.push_back(tc);
    }

    friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// Gaussian-Wasserstein distance between (position, extent) pairs.
[[nodiscard]] inline double gw_distance(const Vec2& ma, const Mat2& xa, const Vec2& mb, const Mat2& xb) {
    if (!linalg::is_spd(xa, -1e-12) || !linalg::is_spd(xb, -1e-12))
        throw NonSPDInput("gw_distance: extent is not symmetric positive semi-definite");
    // semi-definite extents are valid here, so no eigenvalue floor
    const Mat2 ra = linalg::sqrtm_spd(xa, 0.0);
    const Mat2 cross = linalg::sqrtm_spd(ra * xb * ra, 0.0);
    const double d2 = (ma - mb).squaredNorm() + (xa + xb - 2.0 * cross).trace();
    return std::sqrt(std::max(d2, 0.0));
}

struct TrajectoryDistance {
    double total = 0.0;
    double c_l = 0.0;
    double c_m = 0.0;
    double c_f = 0.0;
    double c_t = 0.0;
    /// False when the instance exceeded max_states and the per-step
    /// assignment fallback was used.
    bool exact = true;
};

namespace detail {

/// Min-cost square assignment (Hungarian / Jonker-Volgenant potentials).
/// Returns col assigned to each row.
inline std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

/// Enumerates every partial injection from nx truths into ny estimates;
/// entry i is the assigned estimate index or -1.
inline void enumerate_assignments(int nx, int ny, std::vector<int>& cur, std::vector<char>& used,
                                  std::vector<std::vector<int>>& out, std::size_t limit) {
    if (out.size() > limit) return;
    const int i = static_cast<int>(cur.size());
    if (i == nx) {
        out.push_back(cur);
        return;
    }
    cur.push_back(-1);
    enumerate_assignments(nx, ny, cur, used, out, limit);
    cur.pop_back();
    for (int j = 0; j < ny; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        used[static_cast<std::size_t>(j)] = 1;
        cur.push_back(j);
        enumerate_assignments(nx, ny, cur, used, out, limit);
        cur.pop_back();
        used[static_cast<std::size_t>(j)] = 0;
    }
}

inline double half_switches(const std::vector<int>& a, const std::vector<int>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) continue;
        s += (a[i] < 0 || b[i] < 0) ? 0.5 : 1.0;
    }
    return s;
}

}  // namespace detail

/// Trajectory metric with Gaussian-Wasserstein base distance over scans
/// [0, window_end]. Minimizes, over one assignment per scan,
///   sum_t [ sum_assigned min(d, c)^p + c^p / 2 (#missed + #false) ]
///   + switch_penalty * (#switches)
/// where a change between two estimates is one switch and a change to or
/// from unassigned is half a switch. Estimates (truths) that never come
/// within the cutoff of any truth (estimate) are charged as false (missed)
/// directly; the rest is solved exactly by dynamic programming over the
/// per-scan assignment states.
[[nodiscard]] inline TrajectoryDistance trajectory_distance(std::span<const EstimatedTrajectory> truth,
                                                            std::span<const EstimatedTrajectory> est,
                                                            const MetricConfig& cfg, int window_end) {
    const int T = window_end + 1;
    const double cp = std::pow(cfg.cutoff, cfg.order);
    const double half = 0.5 * cp;

    auto pos = [](const EstimatedTrajectory& tr, int t) -> Vec2 {
        return tr.states[static_cast<std::size_t>(t - tr.birth_time)].head<2>();
    };
    auto ext = [](const EstimatedTrajectory& tr, int t) -> const Mat2& {
        return tr.extents[static_cast<std::size_t>(t - tr.birth_time)];
    };
    auto exists = [T](const EstimatedTrajectory& tr, int t) { return t < T && tr.exists_at(t); };

    const int nx_all = static_cast<int>(truth.size());
    const int ny_all = static_cast<int>(est.size());

    // base[i][j][t]: min(d, c)^p where both exist, otherwise unused.
    std::vector<std::vector<std::vector<double>>> base(
        static_cast<std::size_t>(nx_all),
        std::vector<std::vector<double>>(static_cast<std::size_t>(ny_all), std::vector<double>(static_cast<std::size_t>(T), cp)));
    std::vector<char> x_close(static_cast<std::size_t>(nx_all), 0), y_close(static_cast<std::size_t>(ny_all), 0);
    for (int i = 0; i < nx_all; ++i) {
        for (int j = 0; j < ny_all; ++j) {
            const auto& a = truth[static_cast<std::size_t>(i)];
            const auto& b = est[static_cast<std::size_t>(j)];
            const int t0 = std::max(a.birth_time, b.birth_time);
            const int t1 = std::min({a.end_time(), b.end_time(), T - 1});
            for (int t = t0; t <= t1; ++t) {
                const double d = gw_distance(pos(a, t), ext(a, t), pos(b, t), ext(b, t));
                if (d < cfg.cutoff) {
                    base[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][static_cast<std::size_t>(t)] =
                        std::pow(d, cfg.order);
                    x_close[static_cast<std::size_t>(i)] = 1;
                    y_close[static_cast<std::size_t>(j)] = 1;
                }
            }
        }
    }

    double loc = 0.0, missed = 0.0, falses = 0.0, switches = 0.0;
    std::vector<int> xs, ys;
    for (int i = 0; i < nx_all; ++i) {
        if (x_close[static_cast<std::size_t>(i)]) {
            xs.push_back(i);
        } else {
            for (int t = 0; t < T; ++t) missed += exists(truth[static_cast<std::size_t>(i)], t) ? half : 0.0;
        }
    }
    for (int j = 0; j < ny_all; ++j) {
        if (y_close[static_cast<std::size_t>(j)]) {
            ys.push_back(j);
        } else {
            for (int t = 0; t < T; ++t) falses += exists(est[static_cast<std::size_t>(j)], t) ? half : 0.0;
        }
    }

    const int nx = static_cast<int>(xs.size());
    const int ny = static_cast<int>(ys.size());

    struct StepCost {
        double loc = 0.0, missed = 0.0, falses = 0.0;
        [[nodiscard]] double sum() const { return loc + missed + falses; }
    };
    auto step_cost = [&](const std::vector<int>& a, int t) {
        StepCost c;
        std::vector<char> y_used(static_cast<std::size_t>(ny), 0);
        for (int i = 0; i < nx; ++i) {
            const auto& tx = truth[static_cast<std::size_t>(xs[static_cast<std::size_t>(i)])];
            const bool ex = exists(tx, t);
            const int j = a[static_cast<std::size_t>(i)];
            if (j < 0) {
                if (ex) c.missed += half;
                continue;
            }
            y_used[static_cast<std::size_t>(j)] = 1;
            const auto& ty = est[static_cast<std::size_t>(ys[static_cast<std::size_t>(j)])];
            const bool ey = exists(ty, t);
            if (ex && ey) {
                const double b = base[static_cast<std::size_t>(xs[static_cast<std::size_t>(i)])]
                                     [static_cast<std::size_t>(ys[static_cast<std::size_t>(j)])][static_cast<std::size_t>(t)];
                if (b < cp) {
                    c.loc += b;
                } else {
                    c.missed += half;
                    c.falses += half;
                }
            } else if (ex) {
                c.missed += half;
            } else if (ey) {
                c.falses += half;
            }
        }
        for (int j = 0; j < ny; ++j) {
            if (!y_used[static_cast<std::size_t>(j)] && exists(est[static_cast<std::size_t>(ys[static_cast<std::size_t>(j)])], t))
                c.falses += half;
        }
        return c;
    };

    TrajectoryDistance out;
    std::vector<std::vector<int>> states;
    {
        std::vector<int> cur;
        std::vector<char> used(static_cast<std::size_t>(ny), 0);
        detail::enumerate_assignments(nx, ny, cur, used, states, cfg.max_states);
    }

    std::vector<std::vector<int>> path(static_cast<std::size_t>(T));
    if (nx == 0 || ny == 0) {
        for (auto& p : path) p.assign(static_cast<std::size_t>(nx), -1);
    } else if (states.size() <= cfg.max_states) {
        const std::size_t S = states.size();
        std::vector<std::vector<double>> trans(S, std::vector<double>(S));
        for (std::size_t a = 0; a < S; ++a)
            for (std::size_t b = 0; b < S; ++b) trans[a][b] = cfg.switch_penalty * detail::half_switches(states[a], states[b]);

        std::vector<double> value(S), next(S);
        std::vector<std::vector<std::size_t>> back(static_cast<std::size_t>(T), std::vector<std::size_t>(S, 0));
        for (std::size_t s = 0; s < S; ++s) value[s] = step_cost(states[s], 0).sum();
        for (int t = 1; t < T; ++t) {
            for (std::size_t s = 0; s < S; ++s) {
                double best = std::numeric_limits<double>::infinity();
                std::size_t arg = 0;
                for (std::size_t r = 0; r < S; ++r) {
                    const double v = value[r] + trans[r][s];
                    if (v < best) {
                        best = v;
                        arg = r;
                    }
                }
                next[s] = best + step_cost(states[s], t).sum();
                back[static_cast<std::size_t>(t)][s] = arg;
            }
            std::swap(value, next);
        }
        std::size_t s = static_cast<std::size_t>(std::min_element(value.begin(), value.end()) - value.begin());
        for (int t = T - 1; t >= 0; --t) {
            path[static_cast<std::size_t>(t)] = states[s];
            s = back[static_cast<std::size_t>(t)][s];
        }
    } else {
        // Per-scan optimal assignment, switches charged afterwards.
        out.exact = false;
        const int n = nx + ny;
        for (int t = 0; t < T; ++t) {
            std::vector<std::vector<double>> cost(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i < nx && j < ny) {
                        std::vector<int> a(static_cast<std::size_t>(nx), -1);
                        a[static_cast<std::size_t>(i)] = j;
                        // pair cost relative to leaving both unassigned
                        std::vector<int> none(static_cast<std::size_t>(nx), -1);
                        StepCost with = step_cost(a, t), without = step_cost(none, t);
                        cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = with.sum() - without.sum();
                    }
                }
            }
            const auto rc = detail::hungarian(cost);
            std::vector<int> a(static_cast<std::size_t>(nx), -1);
            for (int i = 0; i < nx; ++i) {
                const int j = rc[static_cast<std::size_t>(i)];
                if (j < ny && cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] < 0.0) a[static_cast<std::size_t>(i)] = j;
            }
            path[static_cast<std::size_t>(t)] = a;
        }
    }

    for (int t = 0; t < T; ++t) {
        const StepCost c = step_cost(path[static_cast<std::size_t>(t)], t);
        loc += c.loc;
        missed += c.missed;
        falses += c.falses;
        if (t > 0) switches += cfg.switch_penalty * detail::half_switches(path[static_cast<std::size_t>(t - 1)], path[static_cast<std::size_t>(t)]);
    }

    const double inv_p = 1.0 / cfg.order;
    out.c_l = std::pow(loc, inv_p);
    out.c_m = std::pow(missed, inv_p);
    out.c_f = std::pow(falses, inv_p);
    out.c_t = std::pow(switches, inv_p);
    out.total = std::pow(loc + missed + falses + switches, inv_p);
    return out;
}

/// Window ends at the latest scan covered by either set.
[[nodiscard]] inline TrajectoryDistance trajectory_distance(std::span<const EstimatedTrajectory> truth,
                                                            std::span<const EstimatedTrajectory> est,
                                                            const MetricConfig& cfg) {
    int end = -1;
    for (const auto& t : truth) end = std::max(end, t.end_time());
    for (const auto& t : est) end = std::max(end, t.end_time());
    return trajectory_distance(truth, est, cfg, end);
}

/// Root-mean-square across runs per scan; cardinalities are averaged.
[[nodiscard]] inline MetricReport rms_over_runs(std::span<const MetricReport> runs) {
    MetricReport out;
    if (runs.empty()) return out;
    const std::size_t n = runs.front().size();
    for (const auto& r : runs) {
        if (r.size() != n || r.est_card.size() != n || r.true_card.size() != n)
            throw LengthMismatch("rms_over_runs: reports have different lengths");
    }
    const double count = static_cast<double>(runs.size());
    auto rms = [&](auto member, std::size_t k) {
        double s = 0.0;
        for (const auto& r : runs) s += (r.*member)[k] * (r.*member)[k];
        return std::sqrt(s / count);
    };
    auto mean = [&](auto member, std::size_t k) {
        double s = 0.0;
        for (const auto& r : runs) s += (r.*member)[k];
        return s / count;
    };
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back(rms(&MetricReport::total, k), rms(&MetricReport::c_l, k), rms(&MetricReport::c_m, k),
                      rms(&MetricReport::c_f, k), rms(&MetricReport::c_t, k), mean(&MetricReport::est_card, k),
                      mean(&MetricReport::true_card, k));
    }
    return out;
}

}  // namespace ggiwt
