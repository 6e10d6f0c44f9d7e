#pragma once

#include "ggiwt/evidence.hpp"
#include "ggiwt/partitioning.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <vector>

namespace ggiwt {

/// Parameters shared by the GGIW and GGIWT PHD filters.
struct FilterConfig {
    double p_survival = 0.99;
    double p_detect = 0.99;
    /// Expected clutter count per scan.
    double clutter_rate = 100.0;
    /// Clutter spatial density, 1 / surveillance area.
    double clutter_density = 1.0 / (400.0 * 400.0);

    /// Template for objects born at cell centroids; the position entries
    /// of kin.mean are replaced by the centroid.
    GGIWParams birth_template;
    double birth_weight = 0.03;
    /// Optional birth components appended in every prediction.
    std::vector<std::pair<double, GGIWParams>> persistent_birth;

    double prune_T = 1e-3;
    double merge_U = 5.0;
    std::size_t cap_M = 50;
    double extract_threshold = 0.5;

    /// Squared Mahalanobis centroid gate; pairs beyond it get zero likelihood.
    double gate = 100.0;
    /// DBSCAN eps values used to build the partitions of each scan.
    std::vector<double> eps_grid;
    /// Trajectory covariance window in scans; 0 keeps the full history.
    std::size_t lscan = 0;
};

/// Default eps grid: log-spaced between the sensor-noise scale and four
/// times the largest birth-extent semi-axis.
[[nodiscard]] inline std::vector<double> default_eps_grid(const FilterConfig& cfg, double sigma_r, int count = 10) {
    const double lo = std::max(2.0 * sigma_r, 1.0);
    Eigen::SelfAdjointEigenSolver<Mat2> es(iw_mean(cfg.birth_template.ext));
    const double hi = 4.0 * std::sqrt(es.eigenvalues().maxCoeff());
    return log_spaced_grid(lo, hi, count);
}

/// Missed-detection branch of one predicted component.
struct MissedDetection {
    double log_factor = 0.0;  // log of 1 - P_D + P_D (beta / (beta + 1))^alpha
    GammaParams rate;
};

/// Effective non-detection factor and the two-term gamma mixture reduced to
/// one gamma by matching mean and variance.
[[nodiscard]] inline MissedDetection missed_detection(const GammaParams& g, double p_detect) {
    const double p0 = std::exp(log_zero_count_probability(g));
    const double w_miss = 1.0 - p_detect;
    const double w_zero = p_detect * p0;
    const double q = w_miss + w_zero;
    MissedDetection out;
    out.log_factor = std::log(q);
    if (!(q > 0.0)) {
        out.rate = g;
        return out;
    }
    const double a = g.alpha;
    const double b1 = g.beta;
    const double b2 = g.beta + 1.0;
    const double pi1 = w_miss / q;
    const double pi2 = w_zero / q;
    const double mean = pi1 * a / b1 + pi2 * a / b2;
    const double second = pi1 * a * (a + 1.0) / (b1 * b1) + pi2 * a * (a + 1.0) / (b2 * b2);
    const double var = second - mean * mean;
    if (!(var > 0.0)) {
        out.rate = g;
        return out;
    }
    out.rate = {mean * mean / var, mean / var};
    return out;
}

/// One detected or birth hypothesis produced by the update.
struct DetectionCandidate {
    std::size_t partition = 0;
    std::size_t cell = 0;          // index into PhdUpdateResult::cells
    std::size_t component = 0;     // predicted component index; unused for births
    double log_weight = 0.0;
    CellUpdate update;
};

struct PhdUpdateResult {
    std::vector<MissedDetection> missed;
    std::vector<double> missed_log_weight;
    std::vector<CellStats> cells;             // unique cells across partitions
    std::vector<double> partition_log_weight; // normalized log omega_P
    std::vector<DetectionCandidate> detected;
    std::vector<DetectionCandidate> births;
};

/// Weight arithmetic of the extended-object PHD update, computed from the
/// predicted single-scan GGIW marginals only. Candidates whose linear
/// weight is not above min_weight are skipped.
[[nodiscard]] inline PhdUpdateResult phd_update(std::span<const GGIWParams> predicted,
                                                std::span<const double> predicted_log_weight,
                                                std::span<const Vec2> scan, std::span<const Partition> partitions,
                                                const FilterConfig& cfg, const MeasModel& mm,
                                                double min_weight = 0.0) {
    if (!scan.empty() && partitions.empty()) throw NoPartitions("update: non-empty scan without partitions");
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    const double log_min_weight = min_weight > 0.0 ? std::log(min_weight) : kNegInf;
    const std::size_t J = predicted.size();

    PhdUpdateResult res;
    res.missed.reserve(J);
    res.missed_log_weight.reserve(J);
    for (std::size_t j = 0; j < J; ++j) {
        res.missed.push_back(missed_detection(predicted[j].rate, cfg.p_detect));
        res.missed_log_weight.push_back(predicted_log_weight[j] + res.missed.back().log_factor);
    }
    if (scan.empty()) return res;

    for (const auto& p : partitions) {
        if (!is_valid_partition(p, scan.size())) throw Error("update: partition does not cover the scan");
    }

    std::vector<PreparedComponent> prepared;
    prepared.reserve(J);
    for (const auto& g : predicted) prepared.push_back(prepare_component(g, mm));

    const double log_pd = std::log(cfg.p_detect);
    const double log_clutter = std::log(cfg.clutter_rate * cfg.clutter_density);
    const double log_wb = std::log(cfg.birth_weight);

    struct CellTerms {
        double log_d = 0.0;
        std::vector<std::pair<std::size_t, CellUpdate>> comps;  // gated-in components
        std::vector<double> comp_log_l;
        CellUpdate birth;
    };

    std::map<std::vector<std::size_t>, std::size_t> cell_index;
    std::vector<CellTerms> terms;
    std::vector<std::vector<std::size_t>> part_cells(partitions.size());

    std::vector<Vec2> pts;
    for (std::size_t pi = 0; pi < partitions.size(); ++pi) {
        for (const auto& c : partitions[pi].cells) {
            auto [it, inserted] = cell_index.try_emplace(c.indices, res.cells.size());
            part_cells[pi].push_back(it->second);
            if (!inserted) continue;

            pts.clear();
            for (std::size_t i : c.indices) pts.push_back(scan[i]);
            const CellStats st = cell_stats(pts);
            res.cells.push_back(st);

            CellTerms t;
            const double n = static_cast<double>(st.size);
            // whole cell as clutter: prod lambda c(z) / (lambda c)^|W| = 1
            std::vector<double> log_terms{0.0};
            for (std::size_t j = 0; j < J; ++j) {
                if (centroid_distance2(prepared[j], st) > cfg.gate) continue;
                CellUpdate u = ggiw_cell_update(prepared[j], st);
                const double log_l = log_pd + u.log_evidence - n * log_clutter;
                t.comp_log_l.push_back(log_l);
                log_terms.push_back(log_l + predicted_log_weight[j]);
                t.comps.emplace_back(j, std::move(u));
            }
            GGIWParams born = cfg.birth_template;
            born.kin.mean.head<2>() = st.centroid;
            t.birth = ggiw_cell_update(born, st, mm);
            t.log_d = linalg::log_sum_exp(log_terms);
            terms.push_back(std::move(t));
        }
    }

    res.partition_log_weight.resize(partitions.size());
    for (std::size_t pi = 0; pi < partitions.size(); ++pi) {
        double s = 0.0;
        for (std::size_t ci : part_cells[pi]) s += terms[ci].log_d;
        res.partition_log_weight[pi] = s;
    }
    const double log_norm = linalg::log_sum_exp(res.partition_log_weight);
    for (double& w : res.partition_log_weight) w -= log_norm;

    for (std::size_t pi = 0; pi < partitions.size(); ++pi) {
        const double log_omega = res.partition_log_weight[pi];
        if (!std::isfinite(log_omega)) continue;
        for (std::size_t ci : part_cells[pi]) {
            const CellTerms& t = terms[ci];
            for (std::size_t k = 0; k < t.comps.size(); ++k) {
                const std::size_t j = t.comps[k].first;
                const double lw = log_omega + t.comp_log_l[k] + predicted_log_weight[j] - t.log_d;
                if (!(lw > log_min_weight)) continue;
                res.detected.push_back({pi, ci, j, lw, t.comps[k].second});
            }
            const double lb = log_omega + log_wb;
            if (lb > log_min_weight) res.births.push_back({pi, ci, 0, lb, t.birth});
        }
    }
    return res;
}

}  // namespace ggiwt
