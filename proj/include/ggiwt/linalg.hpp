#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ggiwt {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat25 = Eigen::Matrix<double, 2, 5>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Extent dimension. Everything in this library is planar.
inline constexpr int kExtentDim = 2;
/// Kinematic state dimension: [px, py, v, phi, omega].
inline constexpr int kStateDim = 5;

// ---- Errors ----

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DofTooSmall : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

class DegeneratePosition : public Error {
public:
    using Error::Error;
};

class NonSPDInput : public Error {
public:
    using Error::Error;
};

class NoPartitions : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class UnknownScenario : public Error {
public:
    using Error::Error;
};

namespace linalg {

inline constexpr double kEigenFloor = 1e-12;

template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& m) {
    m = (0.5 * (m + m.transpose())).eval();
}

/// Symmetric (spectral) square root; eigenvalues are floored at `floor`.
inline Mat2 sqrtm_spd(const Mat2& a, double floor = kEigenFloor) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (a + a.transpose()));
    Vec2 ev = es.eigenvalues().cwiseMax(floor).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Inverse of the symmetric square root.
inline Mat2 inv_sqrtm_spd(const Mat2& a) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (a + a.transpose()));
    Vec2 ev = es.eigenvalues().cwiseMax(kEigenFloor).cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Closed-form principal square root of a 2x2 SPD matrix:
/// sqrt(A) = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A)).
inline Mat2 sqrtm_spd_2x2(const Mat2& a) {
    const double sd = std::sqrt(std::max(a.determinant(), kEigenFloor * kEigenFloor));
    const double t = std::sqrt(a.trace() + 2.0 * sd);
    return (a + sd * Mat2::Identity()) / t;
}

inline bool is_spd(const Mat2& a, double tol = 0.0) {
    if (!a.allFinite()) return false;
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, a.cwiseAbs().maxCoeff()))
        return false;
    Eigen::SelfAdjointEigenSolver<Mat2> es(a);
    return es.eigenvalues().minCoeff() > tol;
}

/// log|A| of a symmetric positive definite matrix, via Cholesky.
template <typename Derived>
double log_det_spd(const Eigen::MatrixBase<Derived>& a, const char* what = "matrix") {
    Eigen::LLT<Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>> llt(a);
    if (llt.info() != Eigen::Success)
        throw SingularMatrix(std::string(what) + " is not positive definite");
    const auto& l = llt.matrixL();
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) s += std::log(l(i, i));
    return 2.0 * s;
}

inline Mat2 rotation(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Mat2 m;
    m << c, -s, s, c;
    return m;
}

/// Multivariate log-gamma, log Gamma_d(a).
inline double log_mvgamma(int d, double a) {
    double r = 0.25 * d * (d - 1) * std::log(std::numbers::pi);
    for (int j = 1; j <= d; ++j) r += std::lgamma(a + 0.5 * (1 - j));
    return r;
}

/// log(sum(exp(x))) over a range; -inf for an empty range.
template <typename Range>
double log_sum_exp(const Range& xs) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : xs) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - mx);
    return mx + std::log(s);
}

}  // namespace linalg
}  // namespace ggiwt
