#pragma once

#include "ggiwt/config.hpp"
#include "ggiwt/ggiw_phd.hpp"
#include "ggiwt/ggiwt_phd.hpp"
#include "ggiwt/metrics.hpp"
#include "ggiwt/partitioning.hpp"
#include "ggiwt/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace ggiwt {

inline constexpr const char* kBaselineName = "ggiwphd";
inline constexpr const char* kTrajectoryName = "ggiwtphd";
inline constexpr const char* kTrajectoryNoSmoothName = "ggiwtphd_nosmooth";

struct FilterSelection {
    bool baseline = true;
    bool trajectory = true;
    bool trajectory_nosmooth = true;

    /// Filter names in output order.
    [[nodiscard]] std::vector<std::string> names() const {
        std::vector<std::string> n;
        if (baseline) n.emplace_back(kBaselineName);
        if (trajectory) n.emplace_back(kTrajectoryName);
        if (trajectory_nosmooth) n.emplace_back(kTrajectoryNoSmoothName);
        return n;
    }
};

struct RunResult {
    std::map<std::string, MetricReport> reports;
    /// Estimates extracted at the final scan.
    std::map<std::string, std::vector<EstimatedTrajectory>> final_estimates;
};

struct MonteCarloResult {
    std::vector<std::string> filters;
    std::map<std::string, std::vector<MetricReport>> per_run;
    std::map<std::string, MetricReport> aggregate;
    /// Final-scan estimates of the first run.
    std::map<std::string, std::vector<EstimatedTrajectory>> final_estimates;
};

/// Scans of one run; every filter consumes exactly these.
[[nodiscard]] inline std::vector<std::vector<Vec2>> simulate_scans(const std::vector<GroundTruthObject>& truth,
                                                                   const ExperimentConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<Vec2>> scans;
    scans.reserve(static_cast<std::size_t>(cfg.scenario.num_scans));
    for (int k = 0; k < cfg.scenario.num_scans; ++k) scans.push_back(generate_scan(truth, k, cfg.scenario, cfg.meas, rng));
    return scans;
}

[[nodiscard]] inline RunResult run_single(const ExperimentConfig& cfg, const FilterSelection& sel, std::uint64_t seed) {
    const auto truth = generate_scenario(cfg.scenario, cfg.motion);
    const auto scans = simulate_scans(truth, cfg, seed);

    ggiw_phd::Recursion base{cfg.filter, cfg.motion, cfg.meas, {}, {}};
    ggiwt_phd::Recursion traj{cfg.filter, cfg.motion, cfg.meas, {}};
    const bool run_traj = sel.trajectory || sel.trajectory_nosmooth;

    RunResult out;
    for (int k = 0; k < cfg.scenario.num_scans; ++k) {
        const auto& scan = scans[static_cast<std::size_t>(k)];
        const auto partitions = generate_partitions(scan, cfg.filter.eps_grid);

        std::vector<EstimatedTrajectory> truth_k;
        for (const auto& obj : truth) {
            if (obj.alive_at(k)) truth_k.push_back(obj.trajectory_until(k));
        }
        const double true_card = static_cast<double>(truth_k.size());
        auto record = [&](const std::string& name, const std::vector<EstimatedTrajectory>& est, double card) {
            const auto d = trajectory_distance(truth_k, est, cfg.metric, k);
            out.reports[name].push_back(d.total, d.c_l, d.c_m, d.c_f, d.c_t, card, true_card);
            if (k + 1 == cfg.scenario.num_scans) out.final_estimates[name] = est;
        };

        if (sel.baseline) {
            const auto& est = base.step(scan, partitions);
            record(kBaselineName, base.alive_trajectories(), static_cast<double>(est.size()));
        }
        if (run_traj) {
            const auto step = traj.step(scan, partitions);
            const double card = static_cast<double>(step.estimated.size());
            if (sel.trajectory) record(kTrajectoryName, step.smoothed, card);
            if (sel.trajectory_nosmooth) record(kTrajectoryNoSmoothName, step.estimated, card);
        }
    }
    return out;
}

/// Run r uses seed base_seed + r. Runs are distributed over threads; the
/// result does not depend on the thread count.
[[nodiscard]] inline MonteCarloResult monte_carlo(const ExperimentConfig& cfg, const FilterSelection& sel, int runs,
                                                  std::uint64_t base_seed, unsigned threads = 0) {
    if (runs < 1) throw Error("monte_carlo: runs must be at least 1");
    std::vector<RunResult> results(static_cast<std::size_t>(runs));
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(runs));

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int r = next++; r < runs; r = next++) {
            try {
                results[static_cast<std::size_t>(r)] = run_single(cfg, sel, base_seed + static_cast<std::uint64_t>(r));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    MonteCarloResult mc;
    mc.filters = sel.names();
    for (const auto& name : mc.filters) {
        auto& v = mc.per_run[name];
        for (auto& r : results) v.push_back(std::move(r.reports[name]));
        mc.aggregate[name] = rms_over_runs(v);
        mc.final_estimates[name] = results.front().final_estimates[name];
    }
    return mc;
}

/// Scan-averaged value of a per-scan series.
[[nodiscard]] inline double scan_mean(const std::vector<double>& v, int first = 0, int last = -1) {
    if (last < 0) last = static_cast<int>(v.size()) - 1;
    double s = 0.0;
    int n = 0;
    for (int k = first; k <= last && k < static_cast<int>(v.size()); ++k, ++n) s += v[static_cast<std::size_t>(k)];
    return n > 0 ? s / n : 0.0;
}

}  // namespace ggiwt
