#pragma once

#include "ggiwt/distributions.hpp"

#include <cmath>

namespace ggiwt {

/// Index of each component in a kinematic state vector.
enum StateIndex : int { kPx = 0, kPy = 1, kSpeed = 2, kHeading = 3, kYawRate = 4 };

/// Kinematic state [px, py, v, phi, omega]. Heading is kept unwrapped.
using KinematicState = Vec5;

struct MotionConfig {
    double Ts = 1.0;
    double sigma_v = 0.2;
    double sigma_omega = 0.2 * std::numbers::pi / 180.0;
    double n_e = 120.0;
    double eta = 2.0;
    /// Extent dof forgetting time constant in seconds.
    double tau_ext = 9.0;
};

/// Time constant for which one-step dof retention matches a Wishart
/// transition with n_e degrees of freedom at a reference dof.
[[nodiscard]] inline double tau_ext_from_ne(double n_e, double ref_dof, double Ts) {
    const double excess = ref_dof - InverseWishartParams::kMinDof;
    return -Ts / std::log(n_e / (n_e + excess));
}

struct MeasModel {
    double sigma_r = 1.0;
    double sigma_phi = 0.01 * std::numbers::pi / 180.0;
    double rho = 0.75;

    [[nodiscard]] static Mat25 H() {
        Mat25 h = Mat25::Zero();
        h(0, 0) = 1.0;
        h(1, 1) = 1.0;
        return h;
    }
};

[[nodiscard]] inline KinematicState predict_kinematics(const KinematicState& x, const MotionConfig& cfg) {
    KinematicState out = x;
    out(kPx) += cfg.Ts * x(kSpeed) * std::cos(x(kHeading));
    out(kPy) += cfg.Ts * x(kSpeed) * std::sin(x(kHeading));
    out(kHeading) += cfg.Ts * x(kYawRate);
    return out;
}

[[nodiscard]] inline Mat5 kinematics_jacobian(const KinematicState& x, const MotionConfig& cfg) {
    const double c = std::cos(x(kHeading));
    const double s = std::sin(x(kHeading));
    const double v = x(kSpeed);
    Mat5 f = Mat5::Identity();
    f(kPx, kSpeed) = cfg.Ts * c;
    f(kPx, kHeading) = -cfg.Ts * v * s;
    f(kPy, kSpeed) = cfg.Ts * s;
    f(kPy, kHeading) = cfg.Ts * v * c;
    f(kHeading, kYawRate) = cfg.Ts;
    return f;
}

[[nodiscard]] inline Mat5 process_noise(const MotionConfig& cfg) {
    Eigen::Matrix<double, 5, 2> g = Eigen::Matrix<double, 5, 2>::Zero();
    g(kSpeed, 0) = cfg.Ts;
    g(kYawRate, 1) = cfg.Ts;
    const Vec2 var(cfg.sigma_v * cfg.sigma_v, cfg.sigma_omega * cfg.sigma_omega);
    return g * var.asDiagonal() * g.transpose();
}

[[nodiscard]] inline Mat2 rotate_extent(const Mat2& X, double omega, double Ts) {
    const Mat2 m = linalg::rotation(omega * Ts);
    Mat2 out = m * X * m.transpose();
    linalg::symmetrize(out);
    return out;
}

/// Exponential dof forgetting around the rotated extent; keeps the mean
/// equal to the rotated prior mean.
[[nodiscard]] inline InverseWishartParams predict_extent(const InverseWishartParams& iw, const KinematicState& x,
                                                         const MotionConfig& cfg) {
    constexpr double kMin = InverseWishartParams::kMinDof;
    const double excess = iw.dof - kMin;
    if (!(excess > 0.0)) throw DofTooSmall("predict_extent: dof must exceed 2d + 2");
    const double decay = std::exp(-cfg.Ts / cfg.tau_ext);
    InverseWishartParams out;
    out.dof = kMin + decay * excess;
    out.scale = ((out.dof - kMin) / excess) * rotate_extent(iw.scale, x(kYawRate), cfg.Ts);
    return out;
}

/// Rate forgetting: mean preserved, variance multiplied by eta.
[[nodiscard]] inline GammaParams predict_rate(const GammaParams& g, const MotionConfig& cfg) {
    return {g.alpha / cfg.eta, g.beta / cfg.eta};
}

[[nodiscard]] inline Vec2 polar_to_cartesian(double r, double phi) {
    return {r * std::cos(phi), r * std::sin(phi)};
}

/// Range/bearing noise linearized into Cartesian coordinates at p.
[[nodiscard]] inline Mat2 converted_noise_cov(const Vec2& p, const MeasModel& mm) {
    const double r = p.norm();
    if (!(r >= 1e-9)) throw DegeneratePosition("converted_noise_cov: position at the sensor origin");
    const double phi = std::atan2(p.y(), p.x());
    Mat2 j;
    j << std::cos(phi), -r * std::sin(phi), std::sin(phi), r * std::cos(phi);
    const Vec2 var(mm.sigma_r * mm.sigma_r, mm.sigma_phi * mm.sigma_phi);
    Mat2 out = j * var.asDiagonal() * j.transpose();
    linalg::symmetrize(out);
    return out;
}

}  // namespace ggiwt
