#pragma once

#include "ggiwt/linalg.hpp"

#include <cmath>

namespace ggiwt {

/// Gamma density over the measurement rate; shape alpha, rate beta.
struct GammaParams {
    double alpha = 1.0;
    double beta = 1.0;

    [[nodiscard]] bool valid() const {
        return std::isfinite(alpha) && std::isfinite(beta) && alpha > 0.0 && beta > 0.0;
    }
};

struct GaussianParams {
    Vec5 mean = Vec5::Zero();
    Mat5 cov = Mat5::Identity();
};

/// Inverse Wishart over the 2x2 extent matrix, parametrized so that the
/// mean is scale / (dof - 2d - 2).
struct InverseWishartParams {
    double dof = 10.0;
    Mat2 scale = Mat2::Identity();

    static constexpr int dim = kExtentDim;
    /// Smallest dof for which the mean exists is strictly above this.
    static constexpr double kMinDof = 2.0 * dim + 2.0;

    [[nodiscard]] bool valid() const { return dof > kMinDof && linalg::is_spd(scale); }
};

/// Gamma x Gaussian x inverse-Wishart parameters of one extended object.
struct GGIWParams {
    GammaParams rate;
    GaussianParams kin;
    InverseWishartParams ext;
};

[[nodiscard]] inline double gamma_mean(const GammaParams& g) { return g.alpha / g.beta; }

[[nodiscard]] inline double gamma_variance(const GammaParams& g) {
    return g.alpha / (g.beta * g.beta);
}

[[nodiscard]] inline Mat2 iw_mean(const InverseWishartParams& iw) {
    const double denom = iw.dof - InverseWishartParams::kMinDof;
    if (!(denom > 0.0))
        throw DofTooSmall("inverse Wishart dof " + std::to_string(iw.dof) +
                          " must exceed " + std::to_string(InverseWishartParams::kMinDof));
    return iw.scale / denom;
}

/// log of the gamma-Poisson (negative binomial) probability of observing n
/// detections from an object whose rate follows g.
[[nodiscard]] inline double log_cell_count_evidence(const GammaParams& g, int n) {
    const double a = g.alpha;
    const double b = g.beta;
    return std::lgamma(a + n) - std::lgamma(a) - std::lgamma(n + 1.0) + a * std::log(b / (b + 1.0)) -
           n * std::log1p(b);
}

[[nodiscard]] inline double cell_count_evidence(const GammaParams& g, int n) {
    return std::exp(log_cell_count_evidence(g, n));
}

/// Probability of zero detections: (beta / (beta + 1))^alpha.
[[nodiscard]] inline double log_zero_count_probability(const GammaParams& g) {
    return g.alpha * (std::log(g.beta) - std::log1p(g.beta));
}

}  // namespace ggiwt
