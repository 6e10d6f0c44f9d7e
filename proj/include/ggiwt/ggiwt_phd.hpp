#pragma once

#include "ggiwt/ggiw_phd.hpp"
#include "ggiwt/phd_update.hpp"
#include "ggiwt/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace ggiwt {

/// GGIW trajectory PHD filter: every component is a density over a whole
/// trajectory (stacked kinematic Gaussian plus per-step inverse Wishart
/// extent parameters) that began at birth_time.
namespace ggiwt_phd {

struct TrajectoryComponent {
    double weight = 0.0;
    int birth_time = 0;
    GammaParams rate;
    VecX mean;  // 5n
    MatX cov;   // 5n x 5n
    std::vector<double> ext_dofs;
    std::vector<Mat2> ext_scales;
    /// Predicted extent parameters at each step, kept for smoothing. For the
    /// first step this is the birth prior.
    std::vector<InverseWishartParams> pred_ext;

    [[nodiscard]] int length() const { return static_cast<int>(ext_dofs.size()); }
    [[nodiscard]] Eigen::Index last_offset() const { return mean.size() - kStateDim; }

    [[nodiscard]] Vec5 state(int step) const { return mean.segment<kStateDim>(kStateDim * step); }

    [[nodiscard]] InverseWishartParams ext(int step) const {
        return {ext_dofs[static_cast<std::size_t>(step)], ext_scales[static_cast<std::size_t>(step)]};
    }

    /// Single-scan GGIW density of the most recent state.
    [[nodiscard]] GGIWParams last_marginal() const {
        GGIWParams g;
        g.rate = rate;
        g.kin.mean = mean.tail<kStateDim>();
        g.kin.cov = cov.bottomRightCorner<kStateDim, kStateDim>();
        g.ext = ext(length() - 1);
        return g;
    }

    /// One-step trajectory from a GGIW density.
    [[nodiscard]] static TrajectoryComponent from_ggiw(double w, int t, const GGIWParams& posterior,
                                                       const InverseWishartParams& prior_ext) {
        TrajectoryComponent c;
        c.weight = w;
        c.birth_time = t;
        c.rate = posterior.rate;
        c.mean = posterior.kin.mean;
        c.cov = posterior.kin.cov;
        c.ext_dofs = {posterior.ext.dof};
        c.ext_scales = {posterior.ext.scale};
        c.pred_ext = {prior_ext};
        return c;
    }
};

struct TrajectoryMixture {
    std::vector<TrajectoryComponent> components;
    int time = -1;

    [[nodiscard]] double total_weight() const {
        double s = 0.0;
        for (const auto& c : components) s += c.weight;
        return s;
    }
};

/// Appends the predicted state to the trajectory. History blocks of the
/// mean and covariance are copied unchanged.
[[nodiscard]] inline TrajectoryComponent predict_component(const TrajectoryComponent& c, const FilterConfig& cfg,
                                                           const MotionConfig& motion) {
    const Eigen::Index N = c.mean.size();
    const Eigen::Index last = c.last_offset();
    const Vec5 x = c.mean.tail<kStateDim>();
    const Mat5 f = kinematics_jacobian(x, motion);

    TrajectoryComponent out;
    out.weight = cfg.p_survival * c.weight;
    out.birth_time = c.birth_time;
    out.rate = predict_rate(c.rate, motion);

    out.mean.resize(N + kStateDim);
    out.mean.head(N) = c.mean;
    out.mean.tail<kStateDim>() = predict_kinematics(x, motion);

    out.cov.resize(N + kStateDim, N + kStateDim);
    out.cov.topLeftCorner(N, N) = c.cov;
    // P F'^T only involves the last block column of P.
    const MatX cross = c.cov.middleCols<kStateDim>(last) * f.transpose();
    out.cov.topRightCorner(N, kStateDim) = cross;
    out.cov.bottomLeftCorner(kStateDim, N) = cross.transpose();
    Mat5 pll = f * c.cov.block<kStateDim, kStateDim>(last, last) * f.transpose() + process_noise(motion);
    linalg::symmetrize(pll);
    out.cov.bottomRightCorner<kStateDim, kStateDim>() = pll;

    const InverseWishartParams ext = predict_extent(c.ext(c.length() - 1), x, motion);
    out.ext_dofs = c.ext_dofs;
    out.ext_dofs.push_back(ext.dof);
    out.ext_scales = c.ext_scales;
    out.ext_scales.push_back(ext.scale);
    out.pred_ext = c.pred_ext;
    out.pred_ext.push_back(ext);

    if (cfg.lscan > 0 && static_cast<std::size_t>(out.length()) > cfg.lscan) {
        // decouple states older than the window from the recent ones
        const Eigen::Index split = (out.length() - static_cast<Eigen::Index>(cfg.lscan)) * kStateDim;
        const Eigen::Index tail = out.cov.rows() - split;
        out.cov.topRightCorner(split, tail).setZero();
        out.cov.bottomLeftCorner(tail, split).setZero();
    }
    return out;
}

[[nodiscard]] inline TrajectoryMixture t_predict(const TrajectoryMixture& mix, const FilterConfig& cfg,
                                                 const MotionConfig& motion) {
    TrajectoryMixture out;
    out.time = mix.time + 1;
    out.components.reserve(mix.components.size() + cfg.persistent_birth.size());
    for (const auto& c : mix.components) out.components.push_back(predict_component(c, cfg, motion));
    for (const auto& [w, params] : cfg.persistent_birth) {
        out.components.push_back(TrajectoryComponent::from_ggiw(w, out.time, params, params.ext));
    }
    return out;
}

/// Conditions the whole trajectory on a cell through the last-state
/// innovation; the extent is updated at the last step only.
[[nodiscard]] inline TrajectoryComponent update_component(const TrajectoryComponent& c, const CellUpdate& u,
                                                          double weight) {
    TrajectoryComponent out = c;
    out.weight = weight;
    const Eigen::Index last = c.last_offset();
    // P H'^T: the position columns of the last block.
    const MatX pht = c.cov.middleCols<2>(last);
    const MatX gain = pht * u.innovation_cov_inv;
    out.mean += gain * u.innovation;
    out.cov.noalias() -= gain * u.innovation_cov * gain.transpose();
    out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();
    out.ext_dofs.back() = u.posterior.ext.dof;
    out.ext_scales.back() = u.posterior.ext.scale;
    out.rate = u.posterior.rate;
    return out;
}

/// Same hypothesis structure and weights as the GGIW PHD update; weights
/// depend on the last-state marginals only. Candidates whose weight is not
/// above min_weight are not materialized.
[[nodiscard]] inline TrajectoryMixture t_update(const TrajectoryMixture& pred, std::span<const Vec2> scan,
                                                std::span<const Partition> partitions, const FilterConfig& cfg,
                                                const MeasModel& mm, double min_weight = 0.0) {
    std::vector<GGIWParams> marginals;
    std::vector<double> log_w;
    marginals.reserve(pred.components.size());
    for (const auto& c : pred.components) {
        marginals.push_back(c.last_marginal());
        log_w.push_back(std::log(c.weight));
    }
    const PhdUpdateResult res = phd_update(marginals, log_w, scan, partitions, cfg, mm, min_weight);

    TrajectoryMixture out;
    out.time = pred.time;
    for (std::size_t j = 0; j < pred.components.size(); ++j) {
        const double w = std::exp(res.missed_log_weight[j]);
        if (!(w > min_weight)) continue;
        TrajectoryComponent c = pred.components[j];
        c.weight = w;
        c.rate = res.missed[j].rate;
        out.components.push_back(std::move(c));
    }
    for (const auto& d : res.detected) {
        out.components.push_back(update_component(pred.components[d.component], d.update, std::exp(d.log_weight)));
    }
    for (const auto& b : res.births) {
        out.components.push_back(
            TrajectoryComponent::from_ggiw(std::exp(b.log_weight), pred.time, b.update.posterior, cfg.birth_template.ext));
    }
    return out;
}

/// Prune (w > T and alpha/beta > 1), absorb every component gated on the
/// last-state marginal of the heaviest one into it, then cap to M.
[[nodiscard]] inline TrajectoryMixture t_reduce(const TrajectoryMixture& mix, const FilterConfig& cfg) {
    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < mix.components.size(); ++i) {
        const auto& c = mix.components[i];
        if (c.weight > cfg.prune_T && gamma_mean(c.rate) > 1.0) remaining.push_back(i);
    }

    TrajectoryMixture out;
    out.time = mix.time;
    while (!remaining.empty()) {
        std::size_t j = remaining.front();
        for (std::size_t i : remaining) {
            if (mix.components[i].weight > mix.components[j].weight) j = i;
        }
        const auto& dom = mix.components[j];
        const Vec5 m_dom = dom.mean.tail<kStateDim>();
        const Eigen::LDLT<Mat5> p_inv(Mat5(dom.cov.bottomRightCorner<kStateDim, kStateDim>()));

        double w = 0.0;
        std::vector<std::size_t> rest;
        for (std::size_t i : remaining) {
            const Vec5 dm = mix.components[i].mean.tail<kStateDim>() - m_dom;
            if (dm.dot(p_inv.solve(dm)) <= cfg.merge_U) {
                w += mix.components[i].weight;
            } else {
                rest.push_back(i);
            }
        }
        TrajectoryComponent survivor = dom;
        survivor.weight = w;
        out.components.push_back(std::move(survivor));
        remaining = std::move(rest);
    }

    if (out.components.size() > cfg.cap_M) {
        std::stable_sort(out.components.begin(), out.components.end(),
                         [](const TrajectoryComponent& a, const TrajectoryComponent& b) { return a.weight > b.weight; });
        out.components.resize(cfg.cap_M);
    }
    return out;
}

[[nodiscard]] inline EstimatedTrajectory to_estimate(const TrajectoryComponent& c) {
    EstimatedTrajectory t;
    t.birth_time = c.birth_time;
    t.rate = gamma_mean(c.rate);
    t.alive = true;
    for (int k = 0; k < c.length(); ++k) {
        t.states.push_back(c.state(k));
        t.extents.push_back(iw_mean(c.ext(k)));
    }
    return t;
}

[[nodiscard]] inline std::vector<EstimatedTrajectory> t_extract(const TrajectoryMixture& mix, const FilterConfig& cfg) {
    std::vector<EstimatedTrajectory> out;
    for (const auto& c : mix.components) {
        if (c.weight > cfg.extract_threshold) out.push_back(to_estimate(c));
    }
    return out;
}

/// Backward extent smoothing over one trajectory component. The final step
/// keeps its filtered parameters; every earlier step receives the
/// dof and (de-rotated) scale corrections of its successor. Kinematics are
/// already smoothed by the update and pass through unchanged.
[[nodiscard]] inline EstimatedTrajectory smooth_extents(const TrajectoryComponent& c, const MotionConfig& motion) {
    EstimatedTrajectory t = to_estimate(c);
    t.smoothed = true;
    const int n = c.length();
    std::vector<double> v_s(c.ext_dofs);
    std::vector<Mat2> V_s(c.ext_scales);
    for (int k = n - 2; k >= 0; --k) {
        const auto ku = static_cast<std::size_t>(k);
        const double dv = v_s[ku + 1] - c.pred_ext[ku + 1].dof;
        const Mat2 dV = V_s[ku + 1] - c.pred_ext[ku + 1].scale;
        const Mat2 m = linalg::rotation(c.state(k)(kYawRate) * motion.Ts);
        double v = c.ext_dofs[ku] + dv;
        Mat2 V = c.ext_scales[ku] + m.transpose() * dV * m;
        linalg::symmetrize(V);
        if (!(v > InverseWishartParams::kMinDof) || !linalg::is_spd(V)) {
            t.smoothing_fallback_steps.push_back(k);
            v = c.ext_dofs[ku];
            V = c.ext_scales[ku];
        }
        v_s[ku] = v;
        V_s[ku] = V;
        t.extents[ku] = iw_mean({v, V});
    }
    std::sort(t.smoothing_fallback_steps.begin(), t.smoothing_fallback_steps.end());
    return t;
}

struct StepOutput {
    std::vector<EstimatedTrajectory> estimated;  // unsmoothed
    std::vector<EstimatedTrajectory> smoothed;
};

/// Predict, update, reduce, extract and smooth, one scan at a time.
struct Recursion {
    FilterConfig cfg;
    MotionConfig motion;
    MeasModel mm;
    TrajectoryMixture mix;

    StepOutput step(std::span<const Vec2> scan, std::span<const Partition> partitions) {
        TrajectoryMixture pred = t_predict(mix, cfg, motion);
        mix = t_reduce(t_update(pred, scan, partitions, cfg, mm, cfg.prune_T), cfg);
        StepOutput out;
        for (const auto& c : mix.components) {
            if (!(c.weight > cfg.extract_threshold)) continue;
            out.estimated.push_back(to_estimate(c));
            out.smoothed.push_back(smooth_extents(c, motion));
        }
        return out;
    }
};

}  // namespace ggiwt_phd
}  // namespace ggiwt
