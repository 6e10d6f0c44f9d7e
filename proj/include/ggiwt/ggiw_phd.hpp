#pragma once

#include "ggiwt/phd_update.hpp"
#include "ggiwt/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <vector>

namespace ggiwt {

/// GGIW PHD filter with labeled components. Trajectories are assembled
/// afterwards by following labels across scans.
namespace ggiw_phd {

struct Component {
    double weight = 0.0;
    GGIWParams params;
    std::int64_t label = -1;
};

struct Mixture {
    std::vector<Component> components;
    int time = -1;
    /// Next unused label; labels are never reused within a run.
    std::int64_t next_label = 0;

    [[nodiscard]] double total_weight() const {
        double s = 0.0;
        for (const auto& c : components) s += c.weight;
        return s;
    }
};

struct Estimate {
    std::int64_t label = -1;
    double weight = 0.0;
    double rate = 0.0;
    Vec5 state = Vec5::Zero();
    Mat2 extent = Mat2::Identity();
};

[[nodiscard]] inline GGIWParams predict_params(const GGIWParams& p, const MotionConfig& motion) {
    GGIWParams out;
    const Mat5 f = kinematics_jacobian(p.kin.mean, motion);
    out.kin.mean = predict_kinematics(p.kin.mean, motion);
    out.kin.cov = f * p.kin.cov * f.transpose() + process_noise(motion);
    linalg::symmetrize(out.kin.cov);
    out.ext = predict_extent(p.ext, p.kin.mean, motion);
    out.rate = predict_rate(p.rate, motion);
    return out;
}

[[nodiscard]] inline Mixture predict(const Mixture& mix, const FilterConfig& cfg, const MotionConfig& motion) {
    Mixture out;
    out.time = mix.time + 1;
    out.next_label = mix.next_label;
    out.components.reserve(mix.components.size() + cfg.persistent_birth.size());
    for (const auto& c : mix.components) {
        out.components.push_back({cfg.p_survival * c.weight, predict_params(c.params, motion), c.label});
    }
    for (const auto& [w, params] : cfg.persistent_birth) {
        out.components.push_back({w, params, out.next_label++});
    }
    return out;
}

[[nodiscard]] inline Mixture update(const Mixture& pred, std::span<const Vec2> scan, std::span<const Partition> partitions,
                                    const FilterConfig& cfg, const MeasModel& mm, double min_weight = 0.0) {
    std::vector<GGIWParams> params;
    std::vector<double> log_w;
    params.reserve(pred.components.size());
    for (const auto& c : pred.components) {
        params.push_back(c.params);
        log_w.push_back(std::log(c.weight));
    }
    const PhdUpdateResult res = phd_update(params, log_w, scan, partitions, cfg, mm, min_weight);

    Mixture out;
    out.time = pred.time;
    out.next_label = pred.next_label;
    for (std::size_t j = 0; j < pred.components.size(); ++j) {
        const double w = std::exp(res.missed_log_weight[j]);
        if (!(w > min_weight)) continue;
        Component c = pred.components[j];
        c.weight = w;
        c.params.rate = res.missed[j].rate;
        out.components.push_back(std::move(c));
    }
    for (const auto& d : res.detected) {
        out.components.push_back({std::exp(d.log_weight), d.update.posterior, pred.components[d.component].label});
    }
    for (const auto& b : res.births) {
        out.components.push_back({std::exp(b.log_weight), b.update.posterior, out.next_label++});
    }
    return out;
}

/// Prune (w > T and alpha/beta > 1), merge by weighted averaging around the
/// heaviest remaining component, then cap to the M heaviest.
[[nodiscard]] inline Mixture reduce(const Mixture& mix, const FilterConfig& cfg) {
    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < mix.components.size(); ++i) {
        const auto& c = mix.components[i];
        if (c.weight > cfg.prune_T && gamma_mean(c.params.rate) > 1.0) remaining.push_back(i);
    }

    Mixture out;
    out.time = mix.time;
    out.next_label = mix.next_label;
    while (!remaining.empty()) {
        std::size_t j = remaining.front();
        for (std::size_t i : remaining) {
            if (mix.components[i].weight > mix.components[j].weight) j = i;
        }
        const auto& dom = mix.components[j];
        const Eigen::LDLT<Mat5> p_inv(dom.params.kin.cov);

        std::vector<std::size_t> group;
        std::vector<std::size_t> rest;
        for (std::size_t i : remaining) {
            const Vec5 dm = mix.components[i].params.kin.mean - dom.params.kin.mean;
            (dm.dot(p_inv.solve(dm)) <= cfg.merge_U ? group : rest).push_back(i);
        }

        Component merged;
        merged.label = dom.label;
        merged.params.kin.mean.setZero();
        merged.params.kin.cov.setZero();
        merged.params.ext.scale.setZero();
        merged.params.ext.dof = 0.0;
        merged.params.rate = {0.0, 0.0};
        for (std::size_t i : group) merged.weight += mix.components[i].weight;
        for (std::size_t i : group) {
            const auto& c = mix.components[i];
            const double f = c.weight / merged.weight;
            merged.params.rate.alpha += f * c.params.rate.alpha;
            merged.params.rate.beta += f * c.params.rate.beta;
            merged.params.kin.mean += f * c.params.kin.mean;
            merged.params.kin.cov += f * c.params.kin.cov;
            merged.params.ext.dof += f * c.params.ext.dof;
            merged.params.ext.scale += f * c.params.ext.scale;
        }
        out.components.push_back(std::move(merged));
        remaining = std::move(rest);
    }

    if (out.components.size() > cfg.cap_M) {
        std::stable_sort(out.components.begin(), out.components.end(),
                         [](const Component& a, const Component& b) { return a.weight > b.weight; });
        out.components.resize(cfg.cap_M);
    }
    return out;
}

[[nodiscard]] inline std::vector<Estimate> extract(const Mixture& mix, const FilterConfig& cfg) {
    std::vector<Estimate> out;
    for (const auto& c : mix.components) {
        if (!(c.weight > cfg.extract_threshold)) continue;
        out.push_back({c.label, c.weight, gamma_mean(c.params.rate), c.params.kin.mean, iw_mean(c.params.ext)});
    }
    return out;
}

struct ScanEstimates {
    int time = 0;
    std::vector<Estimate> estimates;
};

/// Concatenates same-label estimates across scans. A one-scan gap is bridged
/// by prediction; a longer gap ends the trajectory. When a label appears
/// more than once in a scan the heaviest estimate is used.
[[nodiscard]] inline std::vector<EstimatedTrajectory> build_labeled_trajectories(std::span<const ScanEstimates> history,
                                                                                 const MotionConfig& motion) {
    std::vector<EstimatedTrajectory> done;
    std::map<std::int64_t, EstimatedTrajectory> open;
    const int last_time = history.empty() ? 0 : history.back().time;

    for (const auto& scan : history) {
        std::map<std::int64_t, const Estimate*> best;
        for (const auto& e : scan.estimates) {
            auto [it, inserted] = best.try_emplace(e.label, &e);
            if (!inserted && e.weight > it->second->weight) it->second = &e;
        }
        for (auto it = open.begin(); it != open.end();) {
            if (scan.time - it->second.end_time() > 2 ||
                (scan.time - it->second.end_time() == 2 && !best.contains(it->first))) {
                it->second.alive = false;
                done.push_back(std::move(it->second));
                it = open.erase(it);
            } else {
                ++it;
            }
        }
        for (const auto& [label, e] : best) {
            auto it = open.find(label);
            if (it == open.end()) {
                EstimatedTrajectory t;
                t.birth_time = scan.time;
                t.label = label;
                it = open.emplace(label, std::move(t)).first;
            } else if (scan.time - it->second.end_time() == 2) {
                EstimatedTrajectory& t = it->second;
                const Vec5 prev = t.states.back();
                t.states.push_back(predict_kinematics(prev, motion));
                t.extents.push_back(rotate_extent(t.extents.back(), prev(kYawRate), motion.Ts));
            }
            it->second.states.push_back(e->state);
            it->second.extents.push_back(e->extent);
            it->second.rate = e->rate;
        }
    }
    for (auto& [label, t] : open) {
        t.alive = t.end_time() == last_time;
        done.push_back(std::move(t));
    }
    std::sort(done.begin(), done.end(), [](const EstimatedTrajectory& a, const EstimatedTrajectory& b) {
        return a.birth_time != b.birth_time ? a.birth_time < b.birth_time : a.label < b.label;
    });
    return done;
}

/// One predict / update / reduce / extract cycle.
struct Recursion {
    FilterConfig cfg;
    MotionConfig motion;
    MeasModel mm;
    Mixture mix;
    std::vector<ScanEstimates> history;

    const std::vector<Estimate>& step(std::span<const Vec2> scan, std::span<const Partition> partitions) {
        Mixture pred = predict(mix, cfg, motion);
        mix = reduce(update(pred, scan, partitions, cfg, mm, cfg.prune_T), cfg);
        history.push_back({mix.time, extract(mix, cfg)});
        return history.back().estimates;
    }

    /// Labeled trajectories present at the latest scan.
    [[nodiscard]] std::vector<EstimatedTrajectory> alive_trajectories() const {
        std::vector<EstimatedTrajectory> out;
        for (auto& t : build_labeled_trajectories(history, motion)) {
            if (t.alive) out.push_back(std::move(t));
        }
        return out;
    }
};

}  // namespace ggiw_phd
}  // namespace ggiwt
