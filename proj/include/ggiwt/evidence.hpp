#pragma once

#include "ggiwt/models.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace ggiwt {

/// Sufficient statistics of one cell: size, centroid, and centered scatter.
struct CellStats {
    int size = 0;
    Vec2 centroid = Vec2::Zero();
    Mat2 scatter = Mat2::Zero();
};

[[nodiscard]] inline CellStats cell_stats(std::span<const Vec2> points) {
    CellStats s;
    s.size = static_cast<int>(points.size());
    if (s.size == 0) return s;
    for (const auto& p : points) s.centroid += p;
    s.centroid /= static_cast<double>(s.size);
    for (const auto& p : points) {
        const Vec2 d = p - s.centroid;
        s.scatter += d * d.transpose();
    }
    return s;
}

/// Result of conditioning one predicted GGIW density on one cell.
struct CellUpdate {
    GGIWParams posterior;
    /// log of the marginal likelihood of the cell (set likelihood, rate,
    /// kinematics and extent integrated out). No clutter normalization.
    double log_evidence = 0.0;
    Mat2 innovation_cov;     // S
    Mat2 innovation_cov_inv; // S^-1
    Vec2 innovation;         // centroid - H m
};

/// Cell-independent quantities of a predicted GGIW density, computed once
/// per component and reused for every cell in a scan.
struct PreparedComponent {
    const GGIWParams* prior = nullptr;
    Vec2 position = Vec2::Zero();
    Mat2 x_hat;              // extent mean
    Mat2 r_hat;              // rho X_hat + R(position)
    Mat2 hph;                // H P H^T
    Eigen::Matrix<double, 5, 2> pht;
    Mat2 x_sqrt;
    Mat2 r_isqrt;
    double log_det_r = 0.0;
    double log_det_x = 0.0;
    double log_det_v = 0.0;
};

[[nodiscard]] inline PreparedComponent prepare_component(const GGIWParams& prior, const MeasModel& mm) {
    PreparedComponent pc;
    pc.prior = &prior;
    const Mat25 h = MeasModel::H();
    pc.position = h * prior.kin.mean;
    pc.x_hat = iw_mean(prior.ext);
    pc.r_hat = mm.rho * pc.x_hat + converted_noise_cov(pc.position, mm);
    linalg::symmetrize(pc.r_hat);
    pc.pht = prior.kin.cov * h.transpose();
    pc.hph = h * pc.pht;
    linalg::symmetrize(pc.hph);
    pc.log_det_r = linalg::log_det_spd(pc.r_hat, "measurement spread R_hat");
    pc.log_det_x = linalg::log_det_spd(pc.x_hat, "extent mean");
    pc.log_det_v = linalg::log_det_spd(prior.ext.scale, "extent scale V");
    pc.x_sqrt = linalg::sqrtm_spd_2x2(pc.x_hat);
    pc.r_isqrt = linalg::sqrtm_spd_2x2(pc.r_hat).inverse();
    return pc;
}

/// Squared Mahalanobis distance of the cell centroid from the predicted
/// position under the innovation covariance S.
[[nodiscard]] inline double centroid_distance2(const PreparedComponent& pc, const CellStats& cell) {
    const Mat2 s = pc.hph + pc.r_hat / static_cast<double>(cell.size);
    const Vec2 e = cell.centroid - pc.position;
    return e.dot(s.ldlt().solve(e));
}

/// Conjugate random-matrix update of a predicted GGIW density with a
/// non-empty cell, together with its log-evidence.
[[nodiscard]] inline CellUpdate ggiw_cell_update(const PreparedComponent& pc, const CellStats& cell) {
    constexpr int d = kExtentDim;
    if (cell.size <= 0) throw Error("ggiw_cell_update: empty cell");
    const GGIWParams& prior = *pc.prior;
    const double n = static_cast<double>(cell.size);

    Mat2 s = pc.hph + pc.r_hat / n;
    linalg::symmetrize(s);
    const double log_det_s = linalg::log_det_spd(s, "innovation covariance S");

    CellUpdate out;
    out.innovation_cov = s;
    out.innovation_cov_inv = s.inverse();
    out.innovation = cell.centroid - pc.position;

    const Eigen::Matrix<double, 5, 2> gain = pc.pht * out.innovation_cov_inv;
    GGIWParams& post = out.posterior;
    post.kin.mean = prior.kin.mean + gain * out.innovation;
    post.kin.cov = prior.kin.cov - gain * s * gain.transpose();
    linalg::symmetrize(post.kin.cov);

    const Mat2 s_isqrt = linalg::sqrtm_spd_2x2(s).inverse();
    const Vec2 e = pc.x_sqrt * s_isqrt * out.innovation;
    const Mat2 n_hat = e * e.transpose();
    const Mat2 z_hat = pc.x_sqrt * pc.r_isqrt * cell.scatter * pc.r_isqrt * pc.x_sqrt;

    post.ext.dof = prior.ext.dof + n;
    post.ext.scale = prior.ext.scale + n_hat + z_hat;
    linalg::symmetrize(post.ext.scale);
    post.rate.alpha = prior.rate.alpha + n;
    post.rate.beta = prior.rate.beta + 1.0;

    // Rate part: Poisson count (with the M! of the set likelihood) under the gamma prior.
    const double a = prior.rate.alpha;
    const double b = prior.rate.beta;
    const double log_rate = std::lgamma(a + n) - std::lgamma(a) + a * std::log(b) - (a + n) * std::log1p(b);

    // Extent/kinematic part: plug-in Gaussian likelihood at the predicted extent
    // mean, extended over the inverse Wishart prior through its normalizers.
    const double nu = prior.ext.dof - d - 1.0;
    const double nu_post = post.ext.dof - d - 1.0;
    const double log_det_v_post = linalg::log_det_spd(post.ext.scale, "updated extent scale V");
    const double log_giw = -0.5 * d * n * std::log(std::numbers::pi) - 0.5 * d * std::log(n) -
                           0.5 * (n - 1.0) * pc.log_det_r - 0.5 * log_det_s + 0.5 * n * pc.log_det_x +
                           0.5 * nu * pc.log_det_v - 0.5 * nu_post * log_det_v_post +
                           linalg::log_mvgamma(d, 0.5 * nu_post) - linalg::log_mvgamma(d, 0.5 * nu);

    out.log_evidence = log_rate + log_giw;
    return out;
}

[[nodiscard]] inline CellUpdate ggiw_cell_update(const GGIWParams& prior, const CellStats& cell, const MeasModel& mm) {
    return ggiw_cell_update(prepare_component(prior, mm), cell);
}

[[nodiscard]] inline double cell_evidence(const GGIWParams& comp, std::span<const Vec2> cell, const MeasModel& mm) {
    return ggiw_cell_update(comp, cell_stats(cell), mm).log_evidence;
}

}  // namespace ggiwt
